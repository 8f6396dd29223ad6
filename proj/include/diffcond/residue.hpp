#pragma once

#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "modular.hpp"
#include "poly.hpp"

namespace diffcond {

using FpPoly = Poly<Fp>;

namespace detail {

inline FpPoly monic(const FpPoly& a) {
    if (a.is_zero()) return a;
    return a.scale(a.lead_coeff().inv());
}

inline FpPoly exact_div(const FpPoly& a, const FpPoly& d) {
    if (d.is_zero()) throw error(errc::division_by_zero, "polynomial division by zero");
    FpPoly q(a.ctx(), a.nvars()), r(a);
    const Mono& ld = d.lead_mono();
    Fp inv = d.lead_coeff().inv();
    while (!r.is_zero()) {
        const Mono lm = r.lead_mono();
        if (!mono_divides(ld, lm)) throw error(errc::division_by_zero, "inexact polynomial division");
        Mono t = mono_sub(lm, ld);
        Fp c = r.lead_coeff() * inv;
        q.add_term(t, c);
        r = r - d.mul_term(t, c);
    }
    return q;
}

inline int main_var(const FpPoly& a) {
    int v = -1;
    for (const auto& [m, c] : a.terms())
        for (int i = 0; i < a.nvars(); ++i)
            if (m[i] > 0) v = std::max(v, i);
    return v;
}

FpPoly gcd(const FpPoly& a, const FpPoly& b);

inline FpPoly content(const FpPoly& a, int v) {
    FpPoly g(a.ctx(), a.nvars());
    for (const auto& [e, c] : a.split(v)) {
        g = gcd(g, c);
        if (g.is_constant() && !g.is_zero()) break;
    }
    return g;
}

inline FpPoly prem(const FpPoly& a, const FpPoly& b, int v) {
    const int db = b.degree_in(v);
    auto bs = b.split(v);
    const FpPoly lcb = bs.at(db);
    FpPoly r(a);
    while (!r.is_zero() && r.degree_in(v) >= db) {
        const int dr = r.degree_in(v);
        FpPoly lcr = r.split(v).at(dr);
        Mono shift(a.nvars(), 0);
        shift[v] = dr - db;
        r = lcb * r - (lcr * b).mul_term(shift, Fp(a.ctx(), 1));
    }
    return r;
}

inline FpPoly gcd(const FpPoly& a, const FpPoly& b) {
    if (a.is_zero()) return monic(b);
    if (b.is_zero()) return monic(a);
    const int va = main_var(a), vb = main_var(b);
    const int v = std::max(va, vb);
    if (v < 0) return FpPoly::from_int(1, a.ctx(), a.nvars());
    if (va < v) return gcd(a, content(b, v));
    if (vb < v) return gcd(content(a, v), b);
    FpPoly ca = content(a, v), cb = content(b, v);
    FpPoly g = gcd(ca, cb);
    FpPoly pa = exact_div(a, ca), pb = exact_div(b, cb);
    if (pa.degree_in(v) < pb.degree_in(v)) std::swap(pa, pb);
    while (true) {
        FpPoly r = prem(pa, pb, v);
        if (r.is_zero()) break;
        if (r.degree_in(v) <= 0) {
            pb = FpPoly::from_int(1, a.ctx(), a.nvars());
            break;
        }
        pa = pb;
        pb = exact_div(r, content(r, v));
    }
    if (pb.degree_in(v) > 0) pb = exact_div(pb, content(pb, v));
    return monic(g * pb);
}

}  // namespace detail

// kappa = F_p(b_1..b_m)
struct KappaCtx {
    int p = 2;
    int m = 0;
    std::vector<std::string> names;

    KappaCtx() = default;
    KappaCtx(int p_, int m_) : p(p_), m(m_) {
        for (int j = 1; j <= m_; ++j) names.push_back("b" + std::to_string(j));
    }
    KappaCtx(int p_, std::vector<std::string> n) : p(p_), m(static_cast<int>(n.size())), names(std::move(n)) {}
    bool operator==(const KappaCtx& o) const { return p == o.p && m == o.m; }
};

class ResidueElem {
public:
    using context = KappaCtx;

    ResidueElem() = default;
    explicit ResidueElem(const KappaCtx& k) : k_(k), num_(k.p, k.m), den_(FpPoly::from_int(1, k.p, k.m)) {}
    ResidueElem(const KappaCtx& k, FpPoly num, FpPoly den) : k_(k), num_(std::move(num)), den_(std::move(den)) {
        canonicalize();
    }
    ResidueElem(const KappaCtx& k, FpPoly num) : ResidueElem(k, std::move(num), FpPoly::from_int(1, k.p, k.m)) {}

    static ResidueElem from_int(std::int64_t n, const KappaCtx& k) {
        return ResidueElem(k, FpPoly::from_int(n, k.p, k.m));
    }
    static ResidueElem var(int j, const KappaCtx& k) { return ResidueElem(k, FpPoly::variable(j, k.p, k.m)); }

    const KappaCtx& ctx() const { return k_; }
    const FpPoly& num() const { return num_; }
    const FpPoly& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_ == den_; }
    bool is_polynomial() const { return den_.is_constant(); }

    ResidueElem operator+(const ResidueElem& o) const {
        check(o);
        if (den_ == o.den_) return ResidueElem(k_, num_ + o.num_, den_);
        return ResidueElem(k_, num_ * o.den_ + o.num_ * den_, den_ * o.den_);
    }
    ResidueElem operator-(const ResidueElem& o) const {
        check(o);
        if (den_ == o.den_) return ResidueElem(k_, num_ - o.num_, den_);
        return ResidueElem(k_, num_ * o.den_ - o.num_ * den_, den_ * o.den_);
    }
    ResidueElem operator-() const {
        ResidueElem r(*this);
        r.num_ = -num_;
        return r;
    }
    ResidueElem operator*(const ResidueElem& o) const {
        check(o);
        if (den_.is_constant() && o.den_.is_constant()) {
            ResidueElem r(k_);
            r.num_ = num_ * o.num_;
            return r;
        }
        return ResidueElem(k_, num_ * o.num_, den_ * o.den_);
    }
    ResidueElem inv() const {
        if (is_zero()) throw error(errc::division_by_zero, "inverse of 0 in the residue field");
        return ResidueElem(k_, den_, num_);
    }
    ResidueElem operator/(const ResidueElem& o) const { return *this * o.inv(); }
    ResidueElem pow(int e) const {
        if (e < 0) return inv().pow(-e);
        ResidueElem r = from_int(1, k_), b = *this;
        for (; e > 0; e >>= 1) {
            if (e & 1) r = r * b;
            if (e > 1) b = b * b;
        }
        return r;
    }

    bool operator==(const ResidueElem& o) const { return num_ == o.num_ && den_ == o.den_; }

    ResidueElem derivative(int j) const {
        FpPoly n = num_.derivative(j) * den_ - num_ * den_.derivative(j);
        return ResidueElem(k_, n, den_ * den_);
    }

    // membership in kappa^p: all partials vanish (restricted to `mask` when given)
    bool is_pth_power(const std::vector<bool>& mask = {}) const {
        for (int j = 0; j < k_.m; ++j) {
            if (!mask.empty() && !mask[j]) continue;
            if (!(num_.derivative(j) * den_ == num_ * den_.derivative(j))) return false;
        }
        return true;
    }

    ResidueElem pth_root() const {
        if (!is_pth_power()) throw error(errc::not_reduced, "element is not a p-th power");
        // num * den^{p-1} is a polynomial in b^p
        FpPoly q = num_ * den_.pow(k_.p - 1);
        FpPoly r(k_.p, k_.m);
        for (const auto& [m, c] : q.terms()) {
            Mono mm(m);
            for (int& e : mm) e /= k_.p;
            r.add_term(mm, c);
        }
        return ResidueElem(k_, r, den_);
    }

    // appends new transcendental variables
    ResidueElem extend(const KappaCtx& bigger) const {
        const int extra = bigger.m - k_.m;
        ResidueElem r(bigger);
        r.num_ = num_.extend(extra);
        r.den_ = den_.extend(extra);
        return r;
    }

    std::string str() const {
        if (den_.is_constant()) return num_.str(k_.names);
        auto wrap = [&](const FpPoly& x) {
            std::string t = x.str(k_.names);
            return x.size() > 1 || t.find('*') != std::string::npos ? "(" + t + ")" : t;
        };
        return wrap(num_) + "/" + wrap(den_);
    }

private:
    void check(const ResidueElem& o) const {
        if (!(k_ == o.k_)) throw error(errc::context_mismatch, "residue fields differ");
    }

    void canonicalize() {
        if (den_.is_zero()) throw error(errc::division_by_zero, "zero denominator");
        if (num_.is_zero()) {
            den_ = FpPoly::from_int(1, k_.p, k_.m);
            return;
        }
        if (!den_.is_constant()) {
            FpPoly g = detail::gcd(num_, den_);
            if (!g.is_constant()) {
                num_ = detail::exact_div(num_, g);
                den_ = detail::exact_div(den_, g);
            }
        }
        Fp lc = den_.lead_coeff().inv();
        if (!lc.is_one()) {
            num_ = num_.scale(lc);
            den_ = den_.scale(lc);
        }
    }

    KappaCtx k_;
    FpPoly num_;
    FpPoly den_;
};

}  // namespace diffcond
