#pragma once

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "aswdata.hpp"
#include "cohen.hpp"
#include "error.hpp"
#include "rational.hpp"
#include "tate.hpp"

namespace diffcond {

// Laurent polynomial with rational coefficients over named variables.
struct Expr {
    int nvars = 0;
    std::map<std::vector<int>, Rational> terms;

    static Expr constant(int n, const Rational& c) {
        Expr e{n, {}};
        if (c != Rational(0)) e.terms[std::vector<int>(n, 0)] = c;
        return e;
    }
    static Expr variable(int n, int i) {
        Expr e{n, {}};
        std::vector<int> m(n, 0);
        m[i] = 1;
        e.terms[m] = Rational(1);
        return e;
    }
    void add(const std::vector<int>& m, const Rational& c) {
        Rational& r = terms[m];
        r += c;
        if (r == Rational(0)) terms.erase(m);
    }
    Expr operator+(const Expr& o) const {
        Expr r(*this);
        for (const auto& [m, c] : o.terms) r.add(m, c);
        return r;
    }
    Expr operator-() const {
        Expr r(*this);
        for (auto& [m, c] : r.terms) c = -c;
        return r;
    }
    Expr operator*(const Expr& o) const {
        Expr r{nvars, {}};
        for (const auto& [m1, c1] : terms)
            for (const auto& [m2, c2] : o.terms) {
                std::vector<int> m(m1);
                for (int i = 0; i < nvars; ++i) m[i] += m2[i];
                r.add(m, c1 * c2);
            }
        return r;
    }
    bool is_monomial() const { return terms.size() == 1; }
    Expr inv_monomial() const {
        if (!is_monomial()) throw error(errc::parse_error, "division only by monomials or constants");
        const auto& [m, c] = *terms.begin();
        std::vector<int> mm(m);
        for (int& e : mm) e = -e;
        Expr r{nvars, {}};
        r.terms[mm] = Rational(1) / c;
        return r;
    }
    Expr pow(int e) const {
        if (e < 0) return inv_monomial().pow(-e);
        Expr r = constant(nvars, Rational(1));
        for (int i = 0; i < e; ++i) r = r * *this;
        return r;
    }
};

// Recursive-descent parser; `names` lists the variables, `constants` named integers such as p.
class ExprParser {
public:
    ExprParser(std::vector<std::string> names, std::map<std::string, std::int64_t> constants = {})
        : names_(std::move(names)), consts_(std::move(constants)) {}

    Expr parse(const std::string& text) {
        s_ = text;
        i_ = 0;
        Expr e = expr();
        skip();
        if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw error(errc::parse_error, "in '" + s_ + "' at " + std::to_string(i_) + ": " + why);
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    int n() const { return static_cast<int>(names_.size()); }

    Expr expr() {
        Expr r = term();
        while (true) {
            if (eat('+')) r = r + term();
            else if (eat('-')) r = r + (-term());
            else return r;
        }
    }
    Expr term() {
        Expr r = factor();
        while (true) {
            if (eat('*')) r = r * factor();
            else if (eat('/')) r = r * factor().inv_monomial();
            else return r;
        }
    }
    Expr factor() {
        if (eat('-')) return -factor();
        Expr base = atom();
        if (eat('^')) {
            skip();
            bool neg = false;
            if (eat('-')) neg = true;
            else if (eat('(')) {
                neg = eat('-');
                int e = integer();
                if (!eat(')')) fail("expected ')'");
                return base.pow(neg ? -e : e);
            }
            int e = integer();
            return base.pow(neg ? -e : e);
        }
        return base;
    }
    int integer() {
        skip();
        std::size_t st = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (st == i_) fail("expected an integer");
        return std::stoi(s_.substr(st, i_ - st));
    }
    Expr atom() {
        skip();
        if (eat('(')) {
            Expr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            std::size_t st = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            return Expr::constant(n(), Rational(std::stoll(s_.substr(st, i_ - st))));
        }
        if (i_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) {
            std::size_t st = i_;
            while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
            const std::string id = s_.substr(st, i_ - st);
            for (int k = 0; k < n(); ++k)
                if (names_[k] == id) return Expr::variable(n(), k);
            auto it = consts_.find(id);
            if (it != consts_.end()) return Expr::constant(n(), Rational(it->second));
            fail("unknown symbol '" + id + "'");
        }
        fail("expected a term");
    }

    std::vector<std::string> names_;
    std::map<std::string, std::int64_t> consts_;
    std::string s_;
    std::size_t i_ = 0;
};

inline std::int64_t rational_mod(const Rational& r, std::int64_t mod, int p) {
    if (r.denominator() % p == 0) throw error(errc::parse_error, "coefficient denominator divisible by p");
    // inverse of the denominator mod p^N by Newton lifting from mod p
    const std::int64_t d = mod_norm(r.denominator(), mod);
    std::int64_t x = Fp(p, d).inv().v;
    for (int it = 0; it < 64; ++it) x = static_cast<std::int64_t>(mod_norm(static_cast<__int128>(x) * mod_norm(2 - static_cast<__int128>(d) * x, mod), mod));
    return static_cast<std::int64_t>(mod_norm(static_cast<__int128>(mod_norm(r.numerator(), mod)) * x, mod));
}

namespace detail {

// names: [s, b_1..b_m] with 'b' accepted for b_1 when m = 1
inline std::vector<std::string> datum_names(const KappaCtx& k) {
    std::vector<std::string> n{"s"};
    for (const auto& b : k.names) n.push_back(b);
    if (k.m == 1) n.push_back("b");
    return n;
}

}  // namespace detail

// f(s, b) over F_p(b), exponents of b non-negative
inline ASWData parse_datum(const std::string& text, const KappaCtx& k) {
    auto names = detail::datum_names(k);
    Expr e = ExprParser(names).parse(text);
    ASWData f(k);
    for (const auto& [m, c] : e.terms) {
        Mono bm(k.m, 0);
        for (int j = 0; j < k.m; ++j) bm[j] = m[1 + j];
        if (k.m == 1) bm[0] += m[2];
        for (int x : bm)
            if (x < 0) throw error(errc::parse_error, "negative power of a residue variable");
        FpPoly q(k.p, k.m);
        q.add_term(bm, Fp(k.p, rational_mod(c, k.p, k.p)));
        f.add(m[0], ResidueElem(k, q));
    }
    return f;
}

// series in u_1..u_n, S (or s) and b over kappa
inline KappaSeries parse_kappa_series(const std::string& text, const KappaCtx& k, int n, int prec) {
    std::vector<std::string> names = u_names(n);
    names.push_back("S");
    names.push_back("s");
    for (const auto& b : k.names) names.push_back(b);
    if (k.m == 1) names.push_back("b");
    Expr e = ExprParser(names).parse(text);
    KappaSeries r(k, n, prec);
    for (const auto& [m, c] : e.terms) {
        Mono u(m.begin(), m.begin() + n);
        for (int x : u)
            if (x < 0) throw error(errc::parse_error, "negative power of u");
        const int j = m[n] + m[n + 1];
        Mono bm(k.m, 0);
        for (int t = 0; t < k.m; ++t) bm[t] = m[n + 2 + t];
        if (k.m == 1) bm[0] += m[n + 3];
        FpPoly q(k.p, k.m);
        q.add_term(bm, Fp(k.p, rational_mod(c, k.p, k.p)));
        r.add(u, j, ResidueElem(k, q));
    }
    return r;
}

// series over the Cohen ring: as above plus the constant p
inline LiftSeries parse_lift_series(const std::string& text, const CohenCtx& c, int n, int prec) {
    std::vector<std::string> names = u_names(n);
    names.push_back("S");
    names.push_back("s");
    const auto up = c.upper_names();
    for (const auto& b : up) names.push_back(b);
    if (c.m() == 1) names.push_back("B");
    for (const auto& b : c.kappa.names) names.push_back(b);
    if (c.m() == 1) names.push_back("b");
    Expr e = ExprParser(names, {{"p", c.p()}}).parse(text);
    LiftSeries r(c, n, prec);
    const int base = n + 2;
    for (const auto& [m, x] : e.terms) {
        Mono u(m.begin(), m.begin() + n);
        for (int t : u)
            if (t < 0) throw error(errc::parse_error, "negative power of u");
        const int j = m[n] + m[n + 1];
        Mono bm(c.m(), 0);
        const int stride = c.m() + (c.m() == 1 ? 1 : 0);
        for (int g = 0; g < 2; ++g)
            for (int t = 0; t < c.m(); ++t) bm[t] += m[base + g * stride + t];
        if (c.m() == 1) bm[0] += m[base + 1] + m[base + stride + 1];
        for (int t : bm)
            if (t < 0) throw error(errc::parse_error, "negative power of a residue variable");
        PiPoly q(c.pi, c.m());
        q.add_term(bm, PiInt(c.pi, rational_mod(x, c.pi.mod, c.p())));
        r.add(u, j, CohenElem(c, q));
    }
    return r;
}

}  // namespace diffcond
