#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cohen.hpp"
#include "error.hpp"
#include "rational.hpp"
#include "residue.hpp"
#include "series.hpp"

namespace diffcond {

// Term key (-j, i_1..i_n) for u^i S^j; the term order is lexicographic on keys.
using TKey = std::vector<int>;

inline TKey make_key(const Mono& u, int j) {
    TKey k;
    k.reserve(u.size() + 1);
    k.push_back(-j);
    k.insert(k.end(), u.begin(), u.end());
    return k;
}
inline int key_s(const TKey& k) { return -k[0]; }
inline Mono key_u(const TKey& k) { return Mono(k.begin() + 1, k.end()); }

inline Val coeff_valuation(const ResidueElem& a) { return a.is_zero() ? Val::infinity() : Val(0); }
inline Val coeff_valuation(const CohenElem& a) { return a.valuation(); }

// Truncated element of kappa((S))<u> or O_K<u>((S)); terms with S-exponent >= prec are unknown.
template <class C>
class TateSeries {
public:
    using map_type = std::map<TKey, C, std::greater<TKey>>;
    using ctx_type = typename C::context;

    TateSeries() = default;
    TateSeries(const ctx_type& c, int n, int prec) : c_(c), n_(n), prec_(prec) {}

    static TateSeries constant(const C& a, int n, int prec) {
        TateSeries r(a.ctx(), n, prec);
        r.add(Mono(n, 0), 0, a);
        return r;
    }
    static TateSeries term(const C& a, const Mono& u, int j, int prec) {
        TateSeries r(a.ctx(), static_cast<int>(u.size()), prec);
        r.add(u, j, a);
        return r;
    }

    const ctx_type& ctx() const { return c_; }
    int n() const { return n_; }
    int prec() const { return prec_; }
    void set_prec(int m) {
        prec_ = m;
        truncate();
    }
    const map_type& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int min_s() const { return terms_.empty() ? prec_ : key_s(terms_.begin()->first); }

    void add(const Mono& u, int j, const C& a) { add_key(make_key(u, j), a); }
    void add_key(const TKey& k, const C& a) {
        if (a.is_zero() || key_s(k) >= prec_) return;
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(k, a);
        } else {
            it->second = it->second + a;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }
    void erase(const TKey& k) { terms_.erase(k); }

    // this -= a * u * S^j * g, in place
    void sub_mul_term(const TateSeries& g, const Mono& u, int j, const C& a) {
        const int np = std::min(prec_, g.prec_ + j);
        if (np < prec_) set_prec(np);
        for (const auto& [k, b] : g.terms_) {
            TKey kk(k);
            kk[0] -= j;
            for (int i = 0; i < n_; ++i) kk[i + 1] += u[i];
            add_key(kk, -(b * a));
        }
    }

    C coeff(const Mono& u, int j) const {
        auto it = terms_.find(make_key(u, j));
        return it == terms_.end() ? C::from_int(0, c_) : it->second;
    }

    const std::pair<const TKey, C>& lead() const {
        if (terms_.empty()) throw error(errc::zero_element, "leading term of zero");
        return *terms_.begin();
    }

    TateSeries operator+(const TateSeries& o) const {
        TateSeries r(c_, n_, std::min(prec_, o.prec_));
        for (const auto& [k, a] : terms_) r.add_key(k, a);
        for (const auto& [k, a] : o.terms_) r.add_key(k, a);
        return r;
    }
    TateSeries operator-() const {
        TateSeries r(c_, n_, prec_);
        for (const auto& [k, a] : terms_) r.terms_.emplace(k, -a);
        return r;
    }
    TateSeries operator-(const TateSeries& o) const { return *this + (-o); }
    TateSeries operator*(const TateSeries& o) const {
        TateSeries r(c_, n_, std::min(prec_ + o.min_s(), o.prec_ + min_s()));
        for (const auto& [k1, a1] : terms_)
            for (const auto& [k2, a2] : o.terms_) {
                TKey k(k1);
                for (std::size_t i = 0; i < k.size(); ++i) k[i] += k2[i];
                r.add_key(k, a1 * a2);
            }
        return r;
    }
    TateSeries mul_term(const Mono& u, int j, const C& a) const {
        TateSeries r(c_, n_, prec_ + j);
        for (const auto& [k, b] : terms_) {
            TKey kk(k);
            kk[0] -= j;
            for (int i = 0; i < n_; ++i) kk[i + 1] += u[i];
            r.add_key(kk, b * a);
        }
        return r;
    }
    TateSeries scale(const C& a) const { return mul_term(Mono(n_, 0), 0, a); }
    TateSeries shift_s(int j) const { return mul_term(Mono(n_, 0), j, C::from_int(1, c_)); }

    // equality of the parts both sides certify
    bool equals_at_precision(const TateSeries& o) const {
        TateSeries d = *this - o;
        return d.is_zero();
    }

    TateSeries truncated(int m) const {
        TateSeries r(*this);
        r.set_prec(std::min(m, prec_));
        return r;
    }

    // valuation form of the eta-Gauss norm at eta = p^{-c}; u has norm 1
    GaussVal gauss_valuation(const Rational& c, int N) const {
        Val v = Val::infinity();
        for (const auto& [k, a] : terms_) v = min(v, coeff_valuation(a) + Val(Rational(key_s(k)) * c));
        Rational bound = Rational(prec_) * c;
        bound = std::min(bound, Rational(N) + Rational(min_s()) * c);
        if (v.is_inf()) return {Val(bound), false};
        return {v, v.value() <= bound};
    }

    // |.|_1: min coefficient valuation
    Val sup_valuation() const {
        Val v = Val::infinity();
        for (const auto& [k, a] : terms_) v = min(v, coeff_valuation(a));
        return v;
    }

    template <class F>
    auto map_coeffs(F f, const typename std::invoke_result_t<F, const C&>::context& c2) const {
        using C2 = std::invoke_result_t<F, const C&>;
        TateSeries<C2> r(c2, n_, prec_);
        for (const auto& [k, a] : terms_) r.add_key(k, f(a));
        return r;
    }

    std::string str(const std::vector<std::string>& unames) const {
        if (terms_.empty()) return "0";
        std::string s;
        bool first = true;
        for (const auto& [k, a] : terms_) {
            std::string cs = a.str();
            std::string mon;
            for (int i = 0; i < n_; ++i) {
                if (k[i + 1] == 0) continue;
                if (!mon.empty()) mon += "*";
                mon += unames[i];
                if (k[i + 1] != 1) mon += "^" + std::to_string(k[i + 1]);
            }
            int j = key_s(k);
            if (j != 0) {
                if (!mon.empty()) mon += "*";
                mon += "S";
                if (j != 1) mon += "^" + std::to_string(j);
            }
            bool composite = cs.find_first_of("+-/ ", cs[0] == '-' ? 1 : 0) != std::string::npos;
            std::string body;
            if (mon.empty()) body = composite ? "(" + cs + ")" : cs;
            else if (cs == "1") body = mon;
            else if (cs == "-1") body = "-" + mon;
            else body = (composite ? "(" + cs + ")" : cs) + "*" + mon;
            if (!first) {
                if (body[0] == '-') s += " - " + body.substr(1);
                else s += " + " + body;
            } else {
                s += body;
            }
            first = false;
        }
        return s;
    }

private:
    void truncate() {
        for (auto it = terms_.begin(); it != terms_.end();)
            it = key_s(it->first) >= prec_ ? terms_.erase(it) : std::next(it);
    }

    ctx_type c_{};
    int n_ = 0;
    int prec_ = 16;
    map_type terms_;
};

using KappaSeries = TateSeries<ResidueElem>;
using LiftSeries = TateSeries<CohenElem>;

inline std::vector<std::string> u_names(int n) {
    if (n == 1) return {"u"};
    std::vector<std::string> r;
    for (int i = 1; i <= n; ++i) r.push_back("u" + std::to_string(i));
    return r;
}

// ---------------------------------------------------------------- leading terms

struct Term {
    Mono u;
    int j = 0;
};

template <class C>
Term leading_term(const TateSeries<C>& f) {
    const auto& [k, a] = f.lead();
    return Term{key_u(k), key_s(k)};
}

// 1-leading term: order-largest among the terms of minimal coefficient valuation
inline std::pair<Term, CohenElem> lead1(const LiftSeries& f) {
    if (f.is_zero()) throw error(errc::zero_element, "Lead of zero");
    Val best = f.sup_valuation();
    for (const auto& [k, a] : f.terms())
        if (a.valuation() == best) return {Term{key_u(k), key_s(k)}, a};
    throw error(errc::uncertified_value, "no term attains the minimal valuation");
}

// ---------------------------------------------------------------- Groebner bases over kappa

struct GroebnerBasis {
    std::vector<KappaSeries> gens;
    std::vector<Mono> leads;
    int j_I = 0;
    int n = 0;

    int prec() const {
        int m = 1 << 28;
        for (const auto& g : gens) m = std::min(m, g.prec());
        return m;
    }
};

template <class C>
struct DivResult {
    std::vector<TateSeries<C>> quotients;
    TateSeries<C> remainder;
    std::vector<TateSeries<C>> levels;  // divide_lift: f_l before each level, then the final remainder
};

// first basis element (stored order) whose lead divides u; -1 if none
inline int find_divisor(const std::vector<Mono>& leads, const Mono& u, bool reverse = false) {
    const int n = static_cast<int>(leads.size());
    for (int t = 0; t < n; ++t) {
        const int h = reverse ? n - 1 - t : t;
        if (mono_divides(leads[h], u)) return h;
    }
    return -1;
}

inline DivResult<ResidueElem> divide_kappa(const KappaSeries& f, const GroebnerBasis& basis) {
    DivResult<ResidueElem> out;
    for (std::size_t h = 0; h < basis.gens.size(); ++h) out.quotients.emplace_back(f.ctx(), f.n(), f.prec());
    KappaSeries p = f;
    KappaSeries rem(f.ctx(), f.n(), f.prec());
    while (!p.is_zero()) {
        const auto [key, a] = *p.terms().begin();
        const Mono u = key_u(key);
        const int j = key_s(key);
        const int h = find_divisor(basis.leads, u);
        if (h < 0) {
            rem.add_key(key, a);
            p.erase(key);
            continue;
        }
        const KappaSeries& g = basis.gens[h];
        ResidueElem ratio = a / g.lead().second;
        Mono t = mono_sub(u, basis.leads[h]);
        out.quotients[h].add(t, j, ratio);
        p.sub_mul_term(g, t, j, ratio);
    }
    rem.set_prec(std::min(rem.prec(), p.prec()));
    for (auto& q : out.quotients) q.set_prec(rem.prec());
    out.remainder = rem;
    return out;
}

namespace detail {

// S^{-jmin} * f / lc(f): S-free, monic lead
inline KappaSeries normalize_lead(const KappaSeries& f) {
    const int j = f.min_s();
    KappaSeries g = f.shift_s(-j);
    return g.scale(g.lead().second.inv());
}

inline Mono mono_lcm(const Mono& a, const Mono& b) {
    Mono r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::max(a[i], b[i]);
    return r;
}

}  // namespace detail

inline GroebnerBasis groebner(const std::vector<KappaSeries>& gens, int max_size = 64) {
    GroebnerBasis B;
    if (gens.empty()) throw error(errc::zero_element, "groebner: no generators");
    B.n = gens.front().n();
    auto push = [&](const KappaSeries& g) {
        if (g.min_s() >= g.prec() - 0 && g.is_zero()) return;
        KappaSeries h = detail::normalize_lead(g);
        if (h.prec() <= 0)
            throw error(errc::lead_not_s_free, "no S-free lead certified within the S-precision");
        B.gens.push_back(h);
        B.leads.push_back(key_u(h.lead().first));
    };
    for (const auto& g : gens)
        if (!g.is_zero()) push(g);
    if (B.gens.empty()) throw error(errc::zero_element, "groebner: all generators vanish");

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < B.gens.size(); ++i)
        for (std::size_t k = i + 1; k < B.gens.size(); ++k) pairs.emplace_back(i, k);
    while (!pairs.empty()) {
        auto [i, k] = pairs.front();
        pairs.erase(pairs.begin());
        Mono l = detail::mono_lcm(B.leads[i], B.leads[k]);
        KappaSeries sp = B.gens[i].mul_term(mono_sub(l, B.leads[i]), 0, B.gens[i].lead().second.inv()) -
                         B.gens[k].mul_term(mono_sub(l, B.leads[k]), 0, B.gens[k].lead().second.inv());
        KappaSeries r = divide_kappa(sp, B).remainder;
        if (r.is_zero()) continue;
        if (static_cast<int>(B.gens.size()) >= max_size)
            throw error(errc::lead_not_s_free, "Buchberger closure exceeded the size cap");
        push(r);
        for (std::size_t t = 0; t + 1 < B.gens.size(); ++t) pairs.emplace_back(t, B.gens.size() - 1);
    }
    // drop elements whose lead is divisible by another lead
    std::vector<KappaSeries> g2;
    std::vector<Mono> l2;
    for (std::size_t i = 0; i < B.gens.size(); ++i) {
        bool redundant = false;
        for (std::size_t k = 0; k < B.gens.size(); ++k) {
            if (k == i || !mono_divides(B.leads[k], B.leads[i])) continue;
            if (B.leads[k] != B.leads[i] || k < i) redundant = true;
        }
        if (!redundant) {
            g2.push_back(B.gens[i]);
            l2.push_back(B.leads[i]);
        }
    }
    B.gens = g2;
    B.leads = l2;
    if (B.gens.size() == 1 && mono_degree(B.leads[0]) == 0) {
        // unit ideal
        const KappaSeries& g = B.gens[0];
        B.gens[0] = KappaSeries::constant(ResidueElem::from_int(1, g.ctx()), B.n, g.prec());
    }
    B.j_I = 0;
    for (const auto& g : B.gens) B.j_I = std::min(B.j_I, g.min_s());
    return B;
}

// ---------------------------------------------------------------- lifted ideals

struct LiftedIdeal {
    std::vector<LiftSeries> gens;
    GroebnerBasis basis;
    int N = 8;
    int j_I = 0;
};

inline KappaSeries reduce_mod_p(const LiftSeries& f) {
    return f.map_coeffs([](const CohenElem& a) { return a.reduce_mod_p(); }, f.ctx().kappa);
}

inline LiftSeries lift_series(const KappaSeries& f, const CohenCtx& c) {
    return f.map_coeffs([&](const ResidueElem& a) { return CohenElem::lift(a, c); }, c);
}

// checks that the reductions form a Groebner basis with S-free leads
inline LiftedIdeal make_lifted_ideal(const std::vector<LiftSeries>& gens) {
    if (gens.empty()) throw error(errc::zero_element, "lifted ideal needs generators");
    LiftedIdeal I;
    I.gens = gens;
    I.N = gens.front().ctx().N();
    I.basis.n = gens.front().n();
    for (const auto& g : gens) {
        KappaSeries r = reduce_mod_p(g);
        if (r.is_zero()) throw error(errc::zero_element, "lifted generator vanishes mod p");
        if (r.min_s() != 0) throw error(errc::lead_not_s_free, "reduction of a lifted generator has an S-power lead");
        I.basis.gens.push_back(r);
        I.basis.leads.push_back(key_u(r.lead().first));
        I.j_I = std::min(I.j_I, g.min_s());
    }
    for (std::size_t i = 0; i < I.basis.gens.size(); ++i)
        for (std::size_t k = i + 1; k < I.basis.gens.size(); ++k) {
            const auto& a = I.basis.gens[i];
            const auto& b = I.basis.gens[k];
            Mono l = detail::mono_lcm(I.basis.leads[i], I.basis.leads[k]);
            KappaSeries sp = a.mul_term(mono_sub(l, I.basis.leads[i]), 0, a.lead().second.inv()) -
                             b.mul_term(mono_sub(l, I.basis.leads[k]), 0, b.lead().second.inv());
            if (!divide_kappa(sp, I.basis).remainder.is_zero())
                throw error(errc::lead_not_s_free, "reductions of the lifted generators are not a Groebner basis");
        }
    I.basis.j_I = 0;
    return I;
}

inline int integral_valuation(const CohenElem& a) {
    Val v = a.valuation();
    if (v.is_inf()) return a.ctx().N();
    if (v.value().denominator() != 1)
        throw error(errc::uncertified_value, "lifted division needs pi-free coefficients");
    return static_cast<int>(v.value().numerator());
}

inline DivResult<CohenElem> divide_lift(const LiftSeries& f, const LiftedIdeal& I) {
    const CohenCtx& c = f.ctx();
    const int N = c.N();
    DivResult<CohenElem> out;
    for (std::size_t h = 0; h < I.gens.size(); ++h) out.quotients.emplace_back(c, f.n(), f.prec());
    LiftSeries cur = f;
    int l0 = N;
    for (const auto& [k, a] : f.terms()) l0 = std::min(l0, integral_valuation(a));
    for (int l = l0; l < N; ++l) {
        out.levels.push_back(cur);
        KappaSeries level(c.kappa, f.n(), cur.prec());
        for (const auto& [k, a] : cur.terms())
            if (integral_valuation(a) == l) level.add_key(k, a.residue_after_shift(l));
        if (level.is_zero()) continue;
        auto d = divide_kappa(level, I.basis);
        const CohenElem pl = CohenElem::from_int(ipow(c.p(), l), c);
        LiftSeries sub(c, f.n(), cur.prec());
        bool any = false;
        for (std::size_t h = 0; h < I.gens.size(); ++h) {
            if (d.quotients[h].is_zero()) continue;
            LiftSeries g = lift_series(d.quotients[h], c).scale(pl);
            out.quotients[h] = out.quotients[h] + g;
            sub = sub + g * I.gens[h];
            any = true;
        }
        if (any) cur = cur - sub;
        cur.set_prec(std::min(cur.prec(), d.remainder.prec()));
    }
    out.levels.push_back(cur);
    if (!f.is_zero() && (cur.prec() <= 0 || cur.prec() <= f.min_s()))
        throw error(errc::precision_exhausted, "division consumed the whole S-precision");
    for (auto& q : out.quotients) q.set_prec(cur.prec());
    out.remainder = cur;
    return out;
}

inline GaussVal quotient_valuation(const LiftSeries& f, const LiftedIdeal& I, const Rational& c) {
    if (c <= 0) throw error(errc::radius_out_of_range, "quotient valuation needs c > 0");
    if (I.j_I < 0 && c >= Rational(1, -I.j_I))
        throw error(errc::radius_out_of_range, "c must be below 1/(-j_I) = " + to_string(Rational(1, -I.j_I)));
    return divide_lift(f, I).remainder.gauss_valuation(c, f.ctx().N());
}

// ---------------------------------------------------------------- idempotents

struct IdempotentLift {
    LiftSeries e;
    std::vector<Val> trace;  // sup-valuation of h_alpha per step
};

inline IdempotentLift lift_idempotent(const KappaSeries& e_bar, const LiftedIdeal& I, const CohenCtx& c) {
    KappaSeries nf = divide_kappa(e_bar, I.basis).remainder;
    KappaSeries chk = divide_kappa(nf * nf - nf, I.basis).remainder;
    if (!chk.is_zero()) throw error(errc::no_convergence, "input is not idempotent modulo the ideal");
    IdempotentLift out;
    LiftSeries f = lift_series(nf, c);
    const LiftSeries two = LiftSeries::constant(CohenElem::from_int(2, c), f.n(), f.prec());
    for (int step = 0; step < 64; ++step) {
        LiftSeries h = divide_lift(f * f - f, I).remainder;
        Val v = h.sup_valuation();
        out.trace.push_back(v);
        if (h.is_zero()) {
            out.e = f;
            return out;
        }
        if (out.trace.size() >= 2 && !(out.trace[out.trace.size() - 2] < v))
            throw error(errc::no_convergence, "idempotent iteration stalled");
        f = divide_lift(f + h - two * h * f, I).remainder;
    }
    throw error(errc::no_convergence, "idempotent iteration did not reach the precision");
}

namespace detail {

inline std::optional<Fp> eval_at(const KappaSeries& g, const std::vector<int>& pt, int p) {
    Fp acc(p, 0);
    for (const auto& [k, a] : g.terms()) {
        if (key_s(k) != 0 || !a.num().is_constant() || !a.den().is_constant()) return std::nullopt;
        Fp t = a.num().constant_coeff() * a.den().constant_coeff().inv();
        for (std::size_t i = 1; i < k.size(); ++i)
            for (int e = 0; e < k[i]; ++e) t = t * Fp(p, pt[i - 1]);
        acc = acc + t;
    }
    return acc;
}

}  // namespace detail

struct SplitAlgebra {
    std::vector<std::vector<int>> points;
    std::vector<KappaSeries> fundamental;  // normal forms, one per point
};

// kappa((S))<u>/I split into F_p-rational points: enumerates points and interpolates idempotents
inline SplitAlgebra split_components(const GroebnerBasis& B) {
    const int n = B.n;
    const KappaCtx& k = B.gens.front().ctx();
    const int p = k.p;
    // the quotient must be finite dimensional: some lead is a pure power of each variable
    long dim = 1;
    std::vector<int> bound(n, -1);
    for (const auto& l : B.leads) {
        int nz = 0, idx = -1;
        for (int i = 0; i < n; ++i)
            if (l[i] > 0) {
                ++nz;
                idx = i;
            }
        if (nz == 0) return {};  // unit ideal
        if (nz == 1 && (bound[idx] < 0 || l[idx] < bound[idx])) bound[idx] = l[idx];
    }
    for (int i = 0; i < n; ++i)
        if (bound[i] < 0) throw error(errc::unsupported_template, "quotient algebra is not finite over kappa((S))");
    // count standard monomials
    dim = 0;
    std::vector<int> e(n, 0);
    while (true) {
        if (find_divisor(B.leads, e) < 0) ++dim;
        int i = 0;
        while (i < n && ++e[i] >= bound[i]) e[i++] = 0;
        if (i == n) break;
    }
    SplitAlgebra out;
    std::vector<int> pt(n, 0);
    while (true) {
        bool zero = true;
        for (const auto& g : B.gens) {
            auto v = detail::eval_at(g, pt, p);
            if (!v) throw error(errc::unsupported_template, "relations must have constant F_p coefficients mod p");
            if (!v->is_zero()) zero = false;
        }
        if (zero) out.points.push_back(pt);
        int i = 0;
        while (i < n && ++pt[i] >= p) pt[i++] = 0;
        if (i == n) break;
    }
    if (static_cast<long>(out.points.size()) != dim)
        throw error(errc::unsupported_template, "algebra is not split into F_p-rational points");
    const int prec = B.prec();
    for (const auto& P : out.points) {
        KappaSeries e_p = KappaSeries::constant(ResidueElem::from_int(1, k), n, prec);
        for (int i = 0; i < n; ++i)
            for (int cval = 0; cval < p; ++cval) {
                if (cval == P[i]) continue;
                Mono ui(n, 0);
                ui[i] = 1;
                KappaSeries lin = KappaSeries::term(ResidueElem::from_int(1, k), ui, 0, prec);
                lin.add(Mono(n, 0), 0, ResidueElem::from_int(-cval, k));
                e_p = divide_kappa(e_p * lin.scale(ResidueElem::from_int(P[i] - cval, k).inv()), B).remainder;
            }
        out.fundamental.push_back(e_p);
    }
    return out;
}

}  // namespace diffcond
