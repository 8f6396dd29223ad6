#pragma once

#include <map>
#include <string>
#include <vector>

#include "error.hpp"
#include "modular.hpp"
#include "residue.hpp"

namespace diffcond {

// Artin-Schreier datum f = sum a_e s^e over kappa, polar part plus constant.
// `basis[j]` marks b_j as a tracked p-basis element; untracked ones count as p-th powers.
struct ASWData {
    KappaCtx k;
    std::map<int, ResidueElem> terms;
    std::vector<bool> basis;

    ASWData() = default;
    explicit ASWData(const KappaCtx& kc) : k(kc), basis(kc.m, true) {}

    void add(int e, const ResidueElem& a) {
        if (a.is_zero()) return;
        auto it = terms.find(e);
        if (it == terms.end()) {
            terms.emplace(e, a);
        } else {
            it->second = it->second + a;
            if (it->second.is_zero()) terms.erase(it);
        }
    }

    ResidueElem coeff(int e) const {
        auto it = terms.find(e);
        return it == terms.end() ? ResidueElem(k) : it->second;
    }

    bool is_zero() const { return terms.empty(); }
    bool has_positive() const { return !terms.empty() && terms.rbegin()->first > 0; }

    // largest i > 0 with a nonzero coefficient at s^{-i}; 0 if none
    int top() const {
        if (terms.empty() || terms.begin()->first >= 0) return 0;
        return -terms.begin()->first;
    }

    bool term_reduced(int i) const {
        if (i <= 0) return true;
        const ResidueElem a = coeff(-i);
        if (a.is_zero()) return true;
        return i % k.p != 0 || !a.is_pth_power(basis);
    }

    bool top_reduced() const { return term_reduced(top()); }

    bool is_reduced() const {
        if (has_positive()) return false;
        for (const auto& [e, a] : terms)
            if (!term_reduced(-e)) return false;
        return true;
    }

    bool is_perfect_residue() const { return k.m == 0; }

    ASWData operator+(const ASWData& o) const {
        if (!(k == o.k)) throw error(errc::context_mismatch, "Artin-Schreier data over different fields");
        ASWData r(*this);
        for (const auto& [e, a] : o.terms) r.add(e, a);
        for (std::size_t j = 0; j < r.basis.size(); ++j) r.basis[j] = basis[j] && o.basis[j];
        return r;
    }
    ASWData operator-() const {
        ASWData r(*this);
        for (auto& [e, a] : r.terms) a = -a;
        return r;
    }
    ASWData operator-(const ASWData& o) const { return *this + (-o); }
    bool operator==(const ASWData& o) const {
        if (terms.size() != o.terms.size()) return false;
        auto it = o.terms.begin();
        for (const auto& [e, a] : terms) {
            if (e != it->first || !(a == it->second)) return false;
            ++it;
        }
        return true;
    }

    std::string str() const {
        if (terms.empty()) return "0";
        std::string s;
        bool first = true;
        for (const auto& [e, a] : terms) {
            std::string c = a.str();
            bool composite = c.find_first_of("+-/", c[0] == '-' ? 1 : 0) != std::string::npos;
            std::string body;
            if (e == 0) body = composite ? "(" + c + ")" : c;
            else {
                std::string mon = "s" + (e == 1 ? std::string() : "^" + std::to_string(e));
                if (c == "1") body = mon;
                else if (c == "-1") body = "-" + mon;
                else body = (composite ? "(" + c + ")" : c) + "*" + mon;
            }
            if (first) s = body;
            else if (body[0] == '-') s += " - " + body.substr(1);
            else s += " + " + body;
            first = false;
        }
        return s;
    }
};

namespace detail {

// a(b_j + t s) as a power series in s, coefficients through s^order
inline std::vector<ResidueElem> expand_shift(const FpPoly& a, int j, const ResidueElem& t, int order,
                                             const KappaCtx& k) {
    std::vector<ResidueElem> out(order + 1, ResidueElem(k));
    const int extra = k.m - a.nvars();
    for (const auto& [m, c] : a.terms()) {
        Mono rest(m);
        rest.resize(k.m, 0);
        const int e = rest[j];
        rest[j] = 0;
        FpPoly base(k.p, k.m);
        base.add_term(rest, c);
        ResidueElem bj = ResidueElem::var(j, k), tk = ResidueElem::from_int(1, k);
        for (int i = 0; i <= std::min(e, order); ++i) {
            // binomial(e, i) mod p
            std::int64_t bin = 1;
            for (int r = 0; r < i; ++r) bin = bin * (e - r) / (r + 1);
            if (bin % k.p != 0)
                out[i] = out[i] + ResidueElem(k, base) * bj.pow(e - i) * tk * ResidueElem::from_int(bin % k.p, k);
            tk = tk * t;
        }
    }
    (void)extra;
    return out;
}

}  // namespace detail

// b_j -> b_j + t*s (t in the possibly larger field `k2`); terms of positive s-degree are dropped
inline ASWData substitute_shift(const ASWData& f, int j, const ResidueElem& t, const KappaCtx& k2) {
    ASWData r(k2);
    r.basis = f.basis;
    r.basis.resize(k2.m, true);
    for (const auto& [e, a] : f.terms) {
        if (e > 0) continue;
        const int order = -e;
        auto num = detail::expand_shift(a.num(), j, t, order, k2);
        auto den = detail::expand_shift(a.den(), j, t, order, k2);
        // inverse of den as a power series
        std::vector<ResidueElem> inv(order + 1, ResidueElem(k2));
        const ResidueElem d0 = den[0].inv();
        inv[0] = d0;
        for (int i = 1; i <= order; ++i) {
            ResidueElem acc(k2);
            for (int l = 1; l <= i; ++l) acc = acc + den[l] * inv[i - l];
            inv[i] = -(acc * d0);
        }
        for (int i = 0; i <= order; ++i) {
            ResidueElem ci(k2);
            for (int l = 0; l <= i; ++l) ci = ci + num[l] * inv[i - l];
            r.add(e + i, ci);
        }
    }
    return r;
}

}  // namespace diffcond
