#pragma once

#include <cctype>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "modular.hpp"
#include "poly.hpp"
#include "residue.hpp"

namespace diffcond {

using PiPoly = Poly<PiInt>;

// Truncated Cohen ring of kappa: Z/p^N[pi][B_1..B_m] localized at polynomials that are units mod p.
struct CohenCtx {
    PiCtx pi;
    KappaCtx kappa;

    CohenCtx() = default;
    CohenCtx(int p, int N, int m) : pi(p, N), kappa(p, m) {}
    CohenCtx(int p, int N, const KappaCtx& k) : pi(p, N), kappa(k) {}

    int p() const { return pi.p; }
    int N() const { return pi.N; }
    int m() const { return kappa.m; }
    bool operator==(const CohenCtx& o) const { return pi == o.pi && kappa == o.kappa; }

    std::vector<std::string> upper_names() const {
        std::vector<std::string> r;
        for (const auto& n : kappa.names) {
            std::string u = n;
            if (!u.empty()) u[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(u[0])));
            r.push_back(u);
        }
        return r;
    }
    CohenCtx with_precision(int n) const { return CohenCtx(p(), n, kappa); }
};

class CohenElem {
public:
    using context = CohenCtx;

    CohenElem() = default;
    explicit CohenElem(const CohenCtx& c) : c_(c), num_(c.pi, c.m()), den_(PiPoly::from_int(1, c.pi, c.m())) {}
    CohenElem(const CohenCtx& c, PiPoly num) : c_(c), num_(std::move(num)), den_(PiPoly::from_int(1, c.pi, c.m())) {}
    CohenElem(const CohenCtx& c, PiPoly num, PiPoly den) : c_(c), num_(std::move(num)), den_(std::move(den)) {
        normalize();
    }

    static CohenElem from_int(std::int64_t n, const CohenCtx& c) {
        return CohenElem(c, PiPoly::from_int(n, c.pi, c.m()));
    }
    static CohenElem var(int j, const CohenCtx& c) { return CohenElem(c, PiPoly::variable(j, c.pi, c.m())); }
    static CohenElem pi_power(int k, const CohenCtx& c) {
        return CohenElem(c, PiPoly::constant(PiInt::pi_power(k, c.pi), c.m()));
    }
    static CohenElem pi(const CohenCtx& c) { return pi_power(1, c); }

    // canonical lift: coefficients in [0, p)
    static CohenElem lift(const ResidueElem& a, const CohenCtx& c) {
        if (!(a.ctx() == c.kappa)) throw error(errc::context_mismatch, "lift: residue field mismatch");
        auto up = [&](const FpPoly& f) {
            PiPoly r(c.pi, c.m());
            for (const auto& [m, x] : f.terms()) r.add_term(m, PiInt(c.pi, x.v));
            return r;
        };
        return CohenElem(c, up(a.num()), up(a.den()));
    }

    const CohenCtx& ctx() const { return c_; }
    const PiPoly& num() const { return num_; }
    const PiPoly& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_ == den_; }
    bool den_is_one() const { return den_.is_constant() && den_.constant_coeff().is_one(); }
    bool pi_free() const {
        for (const auto& [m, a] : num_.terms())
            if (!a.pi_free()) return false;
        for (const auto& [m, a] : den_.terms())
            if (!a.pi_free()) return false;
        return true;
    }

    CohenElem operator+(const CohenElem& o) const {
        check(o);
        if (o.is_zero()) return *this;
        if (is_zero()) return o;
        if (den_ == o.den_) return CohenElem(c_, num_ + o.num_, den_);
        return CohenElem(c_, num_ * o.den_ + o.num_ * den_, den_ * o.den_);
    }
    CohenElem operator-(const CohenElem& o) const { return *this + (-o); }
    CohenElem operator-() const {
        CohenElem r(*this);
        r.num_ = -num_;
        return r;
    }
    CohenElem operator*(const CohenElem& o) const {
        check(o);
        if (is_zero() || o.is_zero()) return CohenElem(c_);
        if (den_is_one() && o.den_is_one()) return CohenElem(c_, num_ * o.num_);
        return CohenElem(c_, num_ * o.num_, den_ * o.den_);
    }
    CohenElem scale_int(std::int64_t n) const { return *this * from_int(n, c_); }

    bool operator==(const CohenElem& o) const {
        if (den_ == o.den_) return num_ == o.num_;
        return num_ * o.den_ == o.num_ * den_;
    }

    Val valuation() const {
        Val v = Val::infinity();
        for (const auto& [m, a] : num_.terms()) v = min(v, a.valuation());
        return v;
    }

    bool is_unit() const {
        for (const auto& [m, a] : num_.terms())
            if (a.is_unit()) return true;
        return false;
    }

    CohenElem inv() const {
        if (!is_unit()) throw error(errc::division_by_zero, "inverse of a non-unit Cohen element");
        return CohenElem(c_, den_, num_);
    }
    CohenElem operator/(const CohenElem& o) const { return *this * o.inv(); }

    CohenElem pow(int e) const {
        if (e < 0) return inv().pow(-e);
        CohenElem r = from_int(1, c_), b = *this;
        for (; e > 0; e >>= 1) {
            if (e & 1) r = r * b;
            if (e > 1) b = b * b;
        }
        return r;
    }

    ResidueElem reduce_mod_p() const { return residue_after_shift(0); }

    // residue of this / p^l; requires valuation >= l
    ResidueElem residue_after_shift(int l) const {
        FpPoly n(c_.p(), c_.m()), d(c_.p(), c_.m());
        for (const auto& [m, a] : num_.terms()) n.add_term(m, Fp(c_.p(), a.residue_after_shift(l)));
        for (const auto& [m, a] : den_.terms()) d.add_term(m, Fp(c_.p(), a.residue()));
        return ResidueElem(c_.kappa, n, d);
    }

    CohenElem derivative(int j) const {
        if (den_is_one()) return CohenElem(c_, num_.derivative(j));
        return CohenElem(c_, num_.derivative(j) * den_ - num_ * den_.derivative(j), den_ * den_);
    }

    CohenElem extend(const CohenCtx& bigger) const {
        const int extra = bigger.m() - c_.m();
        CohenElem r(bigger);
        r.num_ = num_.extend(extra);
        r.den_ = den_.extend(extra);
        return r;
    }

    std::string str() const {
        auto names = c_.upper_names();
        if (den_is_one()) return num_.str(names);
        return "(" + num_.str(names) + ")/(" + den_.str(names) + ")";
    }

private:
    void check(const CohenElem& o) const {
        if (!(c_ == o.c_)) throw error(errc::context_mismatch, "Cohen contexts differ");
    }

    void normalize() {
        bool unit = false;
        for (const auto& [m, a] : den_.terms())
            if (a.is_unit()) unit = true;
        if (!unit) throw error(errc::non_unit_denominator, "denominator is not a unit mod p");
        if (num_.is_zero()) {
            den_ = PiPoly::from_int(1, c_.pi, c_.m());
            return;
        }
        // cancel a common monomial factor
        Mono lo;
        bool first = true;
        for (const auto* poly : {&num_, &den_})
            for (const auto& [m, a] : poly->terms()) {
                if (first) {
                    lo = m;
                    first = false;
                } else {
                    for (std::size_t i = 0; i < lo.size(); ++i) lo[i] = std::min(lo[i], m[i]);
                }
            }
        if (mono_degree(lo) > 0) {
            auto shift = [&](const PiPoly& f) {
                PiPoly r(c_.pi, c_.m());
                for (const auto& [m, a] : f.terms()) r.add_term(mono_sub(m, lo), a);
                return r;
            };
            num_ = shift(num_);
            den_ = shift(den_);
        }
        // the largest monomial of the denominator with a unit coefficient gets coefficient 1
        for (auto it = den_.terms().rbegin(); it != den_.terms().rend(); ++it) {
            if (!it->second.is_unit()) continue;
            if (!it->second.is_one()) {
                PiInt s = it->second.inv();
                num_ = num_.scale(s);
                den_ = den_.scale(s);
            }
            break;
        }
    }

    CohenCtx c_;
    PiPoly num_;
    PiPoly den_;
};

using DeltaPoly = Poly<CohenElem>;

inline DeltaPoly truncate_degree(const DeltaPoly& f, int D) {
    DeltaPoly r(f.ctx(), f.nvars());
    for (const auto& [m, a] : f.terms())
        if (mono_degree(m) <= D) r.add_term(m, a);
    return r;
}

inline DeltaPoly mul_trunc(const DeltaPoly& f, const DeltaPoly& g, int D) {
    DeltaPoly r(f.ctx(), f.nvars());
    for (const auto& [m1, a1] : f.terms()) {
        const int d1 = mono_degree(m1);
        if (d1 > D) continue;
        for (const auto& [m2, a2] : g.terms())
            if (d1 + mono_degree(m2) <= D) r.add_term(mono_add(m1, m2), a1 * a2);
    }
    return r;
}

namespace detail {

inline std::int64_t binom_mod(int n, int k, std::int64_t mod) {
    // exact binomial for small non-negative n
    __int128 r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return mod_norm(r, mod);
}

// substitutes B_j -> B_j + delta_j in a polynomial; delta variables indexed by `slots`
inline DeltaPoly deform_poly(const PiPoly& f, const CohenCtx& c, const std::vector<int>& slots, int nd, int D) {
    DeltaPoly r(c, nd);
    for (const auto& [m, a] : f.terms()) {
        // expand prod_j (B_j + delta_j)^{e_j}
        std::vector<std::pair<Mono, std::pair<Mono, std::int64_t>>> parts{{Mono(c.m(), 0), {Mono(nd, 0), 1}}};
        for (int j = 0; j < c.m(); ++j) {
            const int e = m[j];
            std::vector<std::pair<Mono, std::pair<Mono, std::int64_t>>> next;
            for (const auto& [bm, dm] : parts) {
                const int used = mono_degree(dm.first);
                for (int i = 0; i <= e; ++i) {
                    if (i > 0 && (slots[j] < 0 || used + i > D)) break;
                    Mono b2(bm), d2(dm.first);
                    b2[j] += e - i;
                    if (i > 0) d2[slots[j]] += i;
                    std::int64_t coef = static_cast<std::int64_t>(
                        mod_norm(static_cast<__int128>(dm.second) * binom_mod(e, i, c.pi.mod), c.pi.mod));
                    next.push_back({b2, {d2, coef}});
                }
            }
            parts.swap(next);
        }
        for (const auto& [bm, dm] : parts) {
            PiPoly mono(c.pi, c.m());
            mono.add_term(bm, a * PiInt(c.pi, dm.second));
            r.add_term(dm.first, CohenElem(c, mono));
        }
    }
    return r;
}

}  // namespace detail

// psi: B_j -> B_j + delta_j, truncated past total delta-degree D.
// slots[j] = index of the delta variable attached to B_j (or -1 to keep B_j fixed).
inline DeltaPoly cohen_deform(const CohenElem& g, int D, const std::vector<int>& slots, int nd) {
    if (D < 0) throw error(errc::parse_error, "deformation degree must be >= 0");
    const CohenCtx& c = g.ctx();
    DeltaPoly num = detail::deform_poly(g.num(), c, slots, nd, D);
    if (g.den_is_one()) return num;
    DeltaPoly den = detail::deform_poly(g.den(), c, slots, nd, D);
    // 1/den(B+delta) = (1/d0) * sum_k (-E)^k,  E = (den(B+delta) - d0)/d0
    CohenElem d0 = den.constant_coeff();
    if (!d0.is_unit()) throw error(errc::non_unit_denominator, "deformed denominator is not a unit");
    CohenElem d0inv = d0.inv();
    DeltaPoly e(c, nd);
    for (const auto& [m, a] : den.terms())
        if (mono_degree(m) > 0) e.add_term(m, -(a * d0inv));
    DeltaPoly inv = DeltaPoly::constant(CohenElem::from_int(1, c), nd);
    DeltaPoly power = inv;
    for (int k = 1; k <= D; ++k) {
        power = mul_trunc(power, e, D);
        if (power.is_zero()) break;
        inv = inv + power;
    }
    return mul_trunc(num, inv.scale(d0inv), D);
}

inline DeltaPoly cohen_deform(const CohenElem& g, int D) {
    std::vector<int> slots(g.ctx().m());
    for (int j = 0; j < g.ctx().m(); ++j) slots[j] = j;
    return cohen_deform(g, D, slots, g.ctx().m());
}

// Taylor coefficients of a(B_j + t) in t, up to degree D
inline std::vector<CohenElem> taylor_in(const CohenElem& g, int j, int D) {
    std::vector<int> slots(g.ctx().m(), -1);
    slots[j] = 0;
    DeltaPoly d = cohen_deform(g, D, slots, 1);
    std::vector<CohenElem> out(D + 1, CohenElem(g.ctx()));
    for (const auto& [m, a] : d.terms()) out[m[0]] = a;
    return out;
}

}  // namespace diffcond
