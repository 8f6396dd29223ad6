#pragma once

#include <algorithm>
#include <functional>
#include <type_traits>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"

namespace diffcond {

using Mono = std::vector<int>;

inline Mono mono_add(const Mono& a, const Mono& b) {
    Mono r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

inline bool mono_divides(const Mono& a, const Mono& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

inline Mono mono_sub(const Mono& a, const Mono& b) {
    Mono r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

inline int mono_degree(const Mono& a) {
    int d = 0;
    for (int e : a) d += e;
    return d;
}

// Sparse multivariate polynomial; monomials ordered lexicographically, leading term = largest.
// C must provide: context type, ctx(), from_int(n, ctx), is_zero(), +, -, *, unary -, ==.
template <class C>
class Poly {
public:
    using coeff_type = C;
    using ctx_type = typename C::context;
    using map_type = std::map<Mono, C>;

    Poly() = default;
    Poly(const ctx_type& c, int nvars) : ctx_(c), nvars_(nvars) {}

    static Poly constant(const C& a, int nvars) {
        Poly r(a.ctx(), nvars);
        r.add_term(Mono(nvars, 0), a);
        return r;
    }
    static Poly from_int(std::int64_t n, const ctx_type& c, int nvars) {
        return constant(C::from_int(n, c), nvars);
    }
    static Poly variable(int i, const ctx_type& c, int nvars) {
        Poly r(c, nvars);
        Mono m(nvars, 0);
        m[i] = 1;
        r.add_term(m, C::from_int(1, c));
        return r;
    }

    const ctx_type& ctx() const { return ctx_; }
    int nvars() const { return nvars_; }
    const map_type& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && mono_degree(terms_.begin()->first) == 0 &&
                                  std::all_of(terms_.begin()->first.begin(), terms_.begin()->first.end(),
                                              [](int e) { return e == 0; }));
    }
    C constant_coeff() const {
        auto it = terms_.find(Mono(nvars_, 0));
        return it == terms_.end() ? C::from_int(0, ctx_) : it->second;
    }
    C coeff(const Mono& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? C::from_int(0, ctx_) : it->second;
    }

    void add_term(const Mono& m, const C& a) {
        if (a.is_zero()) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, a);
        } else {
            it->second = it->second + a;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    const Mono& lead_mono() const {
        if (terms_.empty()) throw error(errc::zero_element, "lead of zero polynomial");
        return terms_.rbegin()->first;
    }
    const C& lead_coeff() const {
        if (terms_.empty()) throw error(errc::zero_element, "lead of zero polynomial");
        return terms_.rbegin()->second;
    }

    int degree_in(int var) const {
        int d = -1;
        for (const auto& [m, a] : terms_) d = std::max(d, m[var]);
        return d;
    }
    int total_degree() const {
        int d = -1;
        for (const auto& [m, a] : terms_) d = std::max(d, mono_degree(m));
        return d;
    }

    Poly operator+(const Poly& o) const {
        Poly r(*this);
        for (const auto& [m, a] : o.terms_) r.add_term(m, a);
        return r;
    }
    Poly operator-(const Poly& o) const {
        Poly r(*this);
        for (const auto& [m, a] : o.terms_) r.add_term(m, -a);
        return r;
    }
    Poly operator-() const {
        Poly r(ctx_, nvars_);
        for (const auto& [m, a] : terms_) r.terms_.emplace(m, -a);
        return r;
    }
    Poly operator*(const Poly& o) const {
        Poly r(ctx_, nvars_);
        for (const auto& [m1, a1] : terms_)
            for (const auto& [m2, a2] : o.terms_) r.add_term(mono_add(m1, m2), a1 * a2);
        return r;
    }
    Poly scale(const C& a) const {
        Poly r(ctx_, nvars_);
        if (a.is_zero()) return r;
        for (const auto& [m, b] : terms_) r.add_term(m, b * a);
        return r;
    }
    Poly mul_term(const Mono& mm, const C& a) const {
        Poly r(ctx_, nvars_);
        for (const auto& [m, b] : terms_) r.add_term(mono_add(m, mm), b * a);
        return r;
    }
    Poly pow(int e) const {
        Poly r = from_int(1, ctx_, nvars_), b = *this;
        for (; e > 0; e >>= 1) {
            if (e & 1) r = r * b;
            if (e > 1) b = b * b;
        }
        return r;
    }

    bool operator==(const Poly& o) const {
        if (terms_.size() != o.terms_.size()) return false;
        auto it = o.terms_.begin();
        for (const auto& [m, a] : terms_) {
            if (m != it->first || !(a == it->second)) return false;
            ++it;
        }
        return true;
    }

    Poly derivative(int var) const {
        Poly r(ctx_, nvars_);
        for (const auto& [m, a] : terms_) {
            if (m[var] == 0) continue;
            Mono mm(m);
            mm[var] -= 1;
            r.add_term(mm, a * C::from_int(m[var], ctx_));
        }
        return r;
    }

    // coefficient map with variable var factored out: degree -> polynomial
    std::map<int, Poly> split(int var) const {
        std::map<int, Poly> out;
        for (const auto& [m, a] : terms_) {
            Mono mm(m);
            int e = mm[var];
            mm[var] = 0;
            auto it = out.try_emplace(e, Poly(ctx_, nvars_)).first;
            it->second.add_term(mm, a);
        }
        return out;
    }

    template <class F>
    auto map_coeffs(F f, const typename std::invoke_result_t<F, const C&>::context& c2) const {
        using C2 = std::invoke_result_t<F, const C&>;
        Poly<C2> r(c2, nvars_);
        for (const auto& [m, a] : terms_) r.add_term(m, f(a));
        return r;
    }

    // appends `extra` new variables (exponent 0)
    Poly extend(int extra) const {
        Poly r(ctx_, nvars_ + extra);
        for (const auto& [m, a] : terms_) {
            Mono mm(m);
            mm.resize(nvars_ + extra, 0);
            r.terms_.emplace(mm, a);
        }
        return r;
    }

    std::string str(const std::vector<std::string>& names) const {
        if (terms_.empty()) return "0";
        std::string s;
        bool first = true;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            std::string cs = it->second.str();
            bool neg = !cs.empty() && cs[0] == '-' && cs.find('+') == std::string::npos;
            std::string mon;
            for (int i = 0; i < nvars_; ++i) {
                if (it->first[i] == 0) continue;
                if (!mon.empty()) mon += "*";
                mon += names[i];
                if (it->first[i] != 1) mon += "^" + std::to_string(it->first[i]);
            }
            std::string body;
            std::string mag = neg ? cs.substr(1) : cs;
            bool composite = mag.find('+') != std::string::npos || mag.find('-') != std::string::npos;
            if (mon.empty()) body = composite ? "(" + mag + ")" : mag;
            else if (mag == "1") body = mon;
            else body = (composite ? "(" + mag + ")" : mag) + "*" + mon;
            if (first) s += neg ? "-" + body : body;
            else s += neg ? " - " + body : " + " + body;
            first = false;
        }
        return s;
    }

private:
    ctx_type ctx_{};
    int nvars_ = 0;
    map_type terms_;
};

}  // namespace diffcond
