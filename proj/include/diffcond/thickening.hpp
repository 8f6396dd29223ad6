#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cohen.hpp"
#include "diffmod.hpp"
#include "error.hpp"
#include "extensions.hpp"
#include "rational.hpp"
#include "series.hpp"

namespace diffcond {

// Polynomial in delta_0..delta_m over series, truncated past total degree D.
// Degrees <= known() are exact; higher ones may miss contributions.
class ThickElem {
public:
    ThickElem() = default;
    ThickElem(const CohenCtx& c, int D, Rational a, bool log, Window w = {})
        : c_(c), D_(D), known_(D), a_(a), log_(log), w_(w) {}

    const CohenCtx& ctx() const { return c_; }
    int nd() const { return c_.m() + 1; }
    int D() const { return D_; }
    int known() const { return known_; }
    const Rational& level() const { return a_; }
    bool log() const { return log_; }
    const std::map<Mono, RobbaElem>& terms() const { return terms_; }

    void add(const Mono& m, const RobbaElem& x) {
        if (mono_degree(m) > D_ || x.is_exact_zero()) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) terms_.emplace(m, x);
        else it->second = it->second + x;
    }

    ThickElem operator+(const ThickElem& o) const {
        ThickElem r(*this);
        r.known_ = std::min(known_, o.known_);
        for (const auto& [m, x] : o.terms_) r.add(m, x);
        return r;
    }
    ThickElem operator-() const {
        ThickElem r(*this);
        for (auto& [m, x] : r.terms_) x = -x;
        return r;
    }
    ThickElem operator-(const ThickElem& o) const { return *this + (-o); }
    ThickElem operator*(const ThickElem& o) const {
        ThickElem r(c_, D_, a_, log_, w_);
        r.known_ = std::min(known_, o.known_);
        for (const auto& [m1, x1] : terms_)
            for (const auto& [m2, x2] : o.terms_)
                if (mono_degree(m1) + mono_degree(m2) <= D_) r.add(mono_add(m1, m2), x1 * x2);
        return r;
    }

    ThickElem derive_delta(int j) const {
        ThickElem r(c_, D_, a_, log_, w_);
        r.known_ = known_ - 1;
        for (const auto& [m, x] : terms_) {
            if (m[j] == 0) continue;
            Mono m2(m);
            m2[j] -= 1;
            r.add(m2, x.scale(CohenElem::from_int(m[j], c_)));
        }
        return r;
    }

    // Delta^*: delta = 0
    RobbaElem at_zero() const {
        auto it = terms_.find(Mono(nd(), 0));
        return it == terms_.end() ? RobbaElem(c_, w_) : it->second;
    }

    Rational weight(const Mono& m, const Rational& c) const {
        Rational w(0);
        for (int j = 0; j < nd(); ++j) w += Rational(m[j]) * (a_ + (log_ && j == 0 ? Rational(1) : Rational(0))) * c;
        return w;
    }

    // Gauss valuation over the exactly known degrees
    GaussVal gauss_valuation(const Rational& c) const {
        GaussVal g{Val::infinity(), true};
        for (const auto& [m, x] : terms_) {
            if (mono_degree(m) > known_) continue;
            GaussVal v = x.gauss_valuation(c);
            g.value = min(g.value, v.value + Val(weight(m, c)));
            g.certified = g.certified && v.certified;
        }
        return g;
    }

private:
    CohenCtx c_;
    int D_ = 1;
    int known_ = 1;
    Rational a_{1};
    bool log_ = false;
    Window w_;
    std::map<Mono, RobbaElem> terms_;
};

namespace detail {

// generalized binomial coefficient C(k, i) for any integer k
inline std::int64_t gbinom(int k, int i) {
    __int128 r = 1;
    for (int t = 0; t < i; ++t) r = r * (k - t) / (t + 1);
    return static_cast<std::int64_t>(r);
}

}  // namespace detail

// S -> S + delta_0, B_j -> B_j + delta_j
inline ThickElem tilde_pi_star(const RobbaElem& g, const Rational& a, int D, bool log) {
    if (D < 1) throw error(errc::parse_error, "delta degree must be >= 1");
    const CohenCtx& c = g.ctx();
    const int nd = c.m() + 1;
    ThickElem r(c, D, a, log, g.window());
    std::vector<int> slots(c.m());
    for (int j = 0; j < c.m(); ++j) slots[j] = j + 1;
    for (const auto& [k, coef] : g.terms()) {
        DeltaPoly dp = cohen_deform(coef, D, slots, nd);
        for (const auto& [m, b] : dp.terms()) {
            for (int i = 0; i + mono_degree(m) <= D; ++i) {
                const std::int64_t bin = detail::gbinom(k, i);
                if (bin == 0) continue;
                Mono m2(m);
                m2[0] += i;
                r.add(m2, RobbaElem::monomial(b.scale_int(bin), k - i, g.window()));
            }
        }
    }
    RobbaElem tail(c, g.window());
    for (const auto& l : g.tail()) tail.add_tail(l);
    if (!g.tail().empty()) r.add(Mono(nd, 0), tail);
    return r;
}

// valuation form of max(|d_j|_sp, p^{-1/(p-1)} eta^{-a}) (a+1 for j = 0 in the log case)
inline Rational thick_threshold(int p, int j, const Rational& a, const Rational& c, bool log) {
    return base_intercept(p) - (a + (log && j == 0 ? Rational(1) : Rational(0))) * c;
}

inline Rational thick_spectral_valuation(const DiffModule& M, const Rational& a, const Rational& c, int j, bool log,
                                         int n_max = 12) {
    return std::min(spectral_valuation(M, j, c, n_max).value, thick_threshold(M.p(), j, a, c, log));
}

// min(threshold, min_n v(D_n)/n) for d/d delta_j on pi~^* of a rank-one module
inline Rational thick_dn_estimate(const DiffModule& M, const Rational& a, const Rational& c, int j, bool log,
                                  int n_max, int D) {
    if (M.rank != 1) throw error(errc::unknown_decomposition, "thickened recursion is implemented for rank one");
    if (D < n_max) throw error(errc::precision_exhausted, "delta degree must cover n_max derivatives");
    const ThickElem Nj = tilde_pi_star(M.N[j].at(0, 0), a, D, log);
    Rational best = thick_threshold(M.p(), j, a, c, log);
    ThickElem Dn = Nj;
    for (int n = 1; n <= n_max; ++n) {
        GaussVal g = Dn.gauss_valuation(c);
        if (!g.certified) throw error(errc::precision_exhausted, "thickened iterate left the S-window; lower n_max or widen s_window");
        if (!g.value.is_inf()) best = std::min(best, g.value.value() / n);
        if (n < n_max) Dn = Dn.derive_delta(j) + Dn * Nj;
    }
    return best;
}

// radius where the break slope is certified for M
inline Rational certified_radius(const DiffModule& M, bool log) { return break_data(M, log).c_cert; }

inline bool dwork_trivial(const DiffModule& M, const Rational& a, const Rational& c, bool log, int n_max = 12) {
    for (std::size_t j = 0; j < M.N.size(); ++j) {
        if (!M.tracked[j]) continue;
        const int jj = static_cast<int>(j);
        if (spectral_valuation(M, jj, c, n_max).value < thick_threshold(M.p(), jj, a, c, log)) return false;
    }
    return true;
}

inline bool dwork_trivial(const DiffModule& M, const Rational& a, bool log) {
    return dwork_trivial(M, a, certified_radius(M, log), log);
}

struct HarnessRow {
    Rational a;
    bool trivial = false;
    bool expected = false;
};

struct HarnessReport {
    Rational candidate;
    Rational c;
    bool log = false;
    std::vector<HarnessRow> rows;
    bool pass = true;
};

inline std::vector<Rational> default_levels(const Rational& b) {
    std::vector<Rational> out;
    for (const Rational& d : {Rational(-1), Rational(-1, 2), Rational(-1, 3), Rational(1, 3), Rational(1, 2), Rational(1)})
        if (b + d > 0) out.push_back(b + d);
    return out;
}

// PASS iff dwork_trivial(a) == (a > b_candidate) at every sampled level
inline HarnessReport break_triviality_harness(const DiffModule& M, const Rational& b_candidate, bool log,
                                              std::vector<Rational> levels = {}) {
    if (levels.empty()) levels = default_levels(b_candidate);
    HarnessReport rep;
    rep.candidate = b_candidate;
    rep.log = log;
    rep.c = certified_radius(M, log);
    for (const auto& a : levels) {
        HarnessRow row{a, dwork_trivial(M, a, rep.c, log), a > b_candidate};
        rep.pass = rep.pass && row.trivial == row.expected;
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------- TS = AS check

// Polynomials over Z/p^N in [S, B, U_0, U_1, W_0, W_1]; W is delta on the thickening side, V on the AS side.
using ZPoly = Poly<PiInt>;

struct ASTSReport {
    std::string presentation;
    Rational a;
    bool log = false;
    int N = 3, s_window = 20, D = 2;
    std::string A_residue;        // A mod (p, S, U_0)
    bool A_invertible_residue = false;
    bool A_invertible_full = false;
    std::vector<std::string> chi1_norm;    // valuation germs of chi_1(V_j)
    std::vector<bool> chi1_norm_ok;
    std::vector<std::string> chi2_norm;
    std::vector<bool> chi2_norm_ok;
    int iterations = 0;
    std::vector<Rational> update_valuations;
    bool contraction = false;
    bool chi2_kills_relations = false;
    std::vector<bool> roundtrip_delta;     // chi_1(chi_2(delta_j)) = delta_j
    std::vector<bool> roundtrip_v;         // chi_2(chi_1(V_j)) = V_j
    bool pass = false;
};

namespace ts {

constexpr int kS = 0, kB = 1, kU0 = 2, kU1 = 3, kW0 = 4, kW1 = 5, kVars = 6;

struct Ring {
    PiCtx pc;
    int s_window = 20;
    int D = 2;

    ZPoly zero() const { return ZPoly(pc, kVars); }
    ZPoly constant(std::int64_t n) const { return ZPoly::from_int(n, pc, kVars); }
    ZPoly var(int i) const { return ZPoly::variable(i, pc, kVars); }

    ZPoly trunc(const ZPoly& f) const {
        ZPoly r(pc, kVars);
        for (const auto& [m, a] : f.terms())
            if (m[kS] < s_window && m[kW0] + m[kW1] <= D) r.add_term(m, a);
        return r;
    }
    ZPoly mul(const ZPoly& f, const ZPoly& g) const {
        ZPoly r(pc, kVars);
        for (const auto& [m1, a1] : f.terms())
            for (const auto& [m2, a2] : g.terms()) {
                Mono m = mono_add(m1, m2);
                if (m[kS] < s_window && m[kW0] + m[kW1] <= D) r.add_term(m, a1 * a2);
            }
        return r;
    }
    ZPoly pow(const ZPoly& f, int e) const {
        ZPoly r = constant(1);
        for (int i = 0; i < e; ++i) r = mul(r, f);
        return r;
    }
    // substitutes images[i] for variable i
    ZPoly compose(const ZPoly& f, const std::vector<ZPoly>& images) const {
        ZPoly r = zero();
        std::map<std::pair<int, int>, ZPoly> cache;
        auto pw = [&](int i, int e) -> const ZPoly& {
            auto key = std::make_pair(i, e);
            auto it = cache.find(key);
            if (it != cache.end()) return it->second;
            return cache.emplace(key, pow(images[i], e)).first->second;
        };
        for (const auto& [m, a] : f.terms()) {
            ZPoly t = ZPoly::constant(a, kVars);
            for (int i = 0; i < kVars && !t.is_zero(); ++i)
                if (m[i] > 0) t = mul(t, pw(i, m[i]));
            r = r + t;
        }
        return r;
    }
};

// U_h^{e_h} -> replacement
struct Rule {
    int var;
    int e;
    ZPoly repl;
};

inline ZPoly normal_form(const Ring& R, ZPoly f, const std::vector<Rule>& rules) {
    for (int guard = 0; guard < 10000; ++guard) {
        bool changed = false;
        ZPoly out = R.zero();
        for (const auto& [m, a] : f.terms()) {
            const Rule* hit = nullptr;
            for (const auto& rule : rules)
                if (m[rule.var] >= rule.e) {
                    hit = &rule;
                    break;
                }
            if (!hit) {
                out.add_term(m, a);
                continue;
            }
            Mono rest(m);
            rest[hit->var] -= hit->e;
            ZPoly t = R.zero();
            t.add_term(rest, a);
            out = out + R.mul(t, hit->repl);
            changed = true;
        }
        f = out;
        if (!changed) return f;
    }
    throw error(errc::no_contraction, "relation rewriting did not terminate");
}

// rewriting rule from P = U^e + rest (coefficient of U^e must be 1)
inline Rule rule_from(const Ring& R, const ZPoly& P, int var, int e) {
    Mono lead(kVars, 0);
    lead[var] = e;
    ZPoly rest = P;
    rest.add_term(lead, -P.coeff(lead));
    if (!P.coeff(lead).is_one()) throw error(errc::unsupported_template, "relation is not monic in its generator");
    return Rule{var, e, R.trunc(-rest)};
}

// weighted valuation at c: S -> c, U_0 -> c/e, W_j -> a c (a+1 for j = 0 log), p -> 1
inline Rational weighted_valuation(const ZPoly& f, const Rational& c, const Rational& a, bool log, int e,
                                   bool& is_zero) {
    is_zero = f.is_zero();
    std::optional<Rational> best;
    for (const auto& [m, x] : f.terms()) {
        Val v = x.valuation();
        if (v.is_inf()) continue;
        Rational w = v.value() + Rational(m[kS]) * c + Rational(m[kU0]) * c / e +
                     Rational(m[kW0]) * (a + (log ? Rational(1) : Rational(0))) * c + Rational(m[kW1]) * a * c;
        best = best ? std::min(*best, w) : w;
    }
    return best ? *best : Rational(1 << 20);
}

}  // namespace ts

inline ASTSReport as_ts_isomorphism_check(const Presentation& pr, const Rational& a, bool log, int N = 3,
                                          int s_window = 20, int D = 2) {
    if ((!log && a <= 1) || (log && a <= 0))
        throw error(errc::no_contraction, "level a = " + to_string(a) + " is outside the valid range");
    using namespace ts;
    ASTSReport rep;
    rep.presentation = template_name(pr.kind);
    rep.a = a;
    rep.log = log;
    rep.N = N;
    rep.s_window = s_window;
    rep.D = D;
    Ring R{PiCtx(pr.p, N), s_window, D};

    // lift the relations to the 6-variable ring
    std::vector<ZPoly> P;
    for (const auto& h : pr.P) {
        ZPoly z = R.zero();
        for (const auto& [m, x] : h.terms()) {
            Mono mm(kVars, 0);
            for (int i = 0; i < 4; ++i) mm[i] = m[i];
            z.add_term(mm, PiInt(R.pc, x.a[0]));
        }
        P.push_back(z);
    }
    const int e0 = pr.e;
    const int e1 = static_cast<int>(ipow(pr.p, pr.r[0]));
    const int lead_e0 = P[0].degree_in(kU0);
    const int lead_e1 = P[1].degree_in(kU1);

    // pi~^*: S -> S + W_0, B -> B + W_1
    std::vector<ZPoly> shift_img{R.var(kS) + R.var(kW0), R.var(kB) + R.var(kW1), R.var(kU0), R.var(kU1), R.var(kW0),
                                 R.var(kW1)};
    std::vector<ZPoly> tP;
    for (const auto& h : P) tP.push_back(R.compose(h, shift_img));

    // R1: pi~^* P_h = 0 ; R2: P_h = V_h
    const std::vector<Rule> rules1{rule_from(R, tP[0], kU0, lead_e0), rule_from(R, tP[1], kU1, lead_e1)};
    const std::vector<Rule> rules2{rule_from(R, P[0] - R.var(kW0), kU0, lead_e0),
                                   rule_from(R, P[1] - R.var(kW1), kU1, lead_e1)};
    auto nf1 = [&](const ZPoly& f) { return normal_form(R, R.trunc(f), rules1); };
    auto nf2 = [&](const ZPoly& f) { return normal_form(R, R.trunc(f), rules2); };

    // A_{hj} = d(pi~^*P_h - P_h)/d delta_j at delta = 0
    ZPoly A[2][2];
    for (int h = 0; h < 2; ++h) {
        A[h][0] = nf2(P[h].derivative(kS));
        A[h][1] = nf2(P[h].derivative(kB));
    }
    auto residue = [&](const ZPoly& f) {
        std::int64_t r = 0;
        for (const auto& [m, x] : f.terms())
            if (m[kS] == 0 && m[kU0] == 0 && m[kW0] == 0 && m[kW1] == 0) {
                if (m[kB] != 0 || m[kU1] != 0) return std::optional<std::int64_t>();
                r += x.residue();
            }
        return std::optional<std::int64_t>(mod_norm(r, pr.p));
    };
    ZPoly det = nf2(R.mul(A[0][0], A[1][1]) - R.mul(A[0][1], A[1][0]));
    {
        std::string s = "[";
        for (int h = 0; h < 2; ++h)
            for (int j = 0; j < 2; ++j) {
                auto r = residue(A[h][j]);
                s += (r ? std::to_string(*r > pr.p / 2 ? *r - pr.p : *r) : std::string("?")) + (h == 1 && j == 1 ? "]" : ", ");
            }
        rep.A_residue = s;
    }
    auto dres = residue(det);
    rep.A_invertible_residue = dres && *dres != 0;
    if (!rep.A_invertible_residue) throw error(errc::singular_a, "A is not invertible modulo (p, S, U_0)");

    // det^{-1} = d0^{-1} sum (-(det - d0) d0^{-1})^k
    PiInt d0lift(R.pc, *dres);
    PiInt d0i = d0lift.inv();
    ZPoly E = det;
    E.add_term(Mono(kVars, 0), -d0lift);
    E = nf2(E.scale(-d0i));
    ZPoly inv = R.constant(1), term = R.constant(1);
    int guard = 0;
    while (true) {
        term = nf2(R.mul(term, E));
        if (term.is_zero()) break;
        inv = inv + term;
        if (++guard > 400) throw error(errc::singular_a, "determinant inverse series does not terminate");
    }
    inv = nf2(inv.scale(d0i));
    ZPoly Ai[2][2] = {{nf2(R.mul(A[1][1], inv)), nf2(R.mul(-A[0][1], inv))},
                      {nf2(R.mul(-A[1][0], inv)), nf2(R.mul(A[0][0], inv))}};
    bool full = true;
    for (int h = 0; h < 2; ++h)
        for (int j = 0; j < 2; ++j) {
            ZPoly s = nf2(R.mul(Ai[h][0], A[0][j]) + R.mul(Ai[h][1], A[1][j]));
            if (!(s == (h == j ? R.constant(1) : R.zero()))) full = false;
        }
    rep.A_invertible_full = full;

    // chi_2 iteration in R2: delta <- delta - A^{-1}(Q(delta) + V)
    const Rational c_s(1, 64);
    std::vector<ZPoly> delta{R.zero(), R.zero()};
    auto Q = [&](const std::vector<ZPoly>& d) {
        std::vector<ZPoly> img{R.var(kS) + d[0], R.var(kB) + d[1], R.var(kU0), R.var(kU1), R.var(kW0), R.var(kW1)};
        std::vector<ZPoly> out;
        for (int h = 0; h < 2; ++h) out.push_back(nf2(R.compose(P[h], img) - P[h]));
        return out;
    };
    bool converged = false;
    std::optional<Rational> last;
    bool strict = true;
    for (int it = 0; it < 64; ++it) {
        auto q = Q(delta);
        ZPoly r0 = q[0] + R.var(kW0), r1 = q[1] + R.var(kW1);
        ZPoly up0 = nf2(R.mul(Ai[0][0], r0) + R.mul(Ai[0][1], r1));
        ZPoly up1 = nf2(R.mul(Ai[1][0], r0) + R.mul(Ai[1][1], r1));
        rep.iterations = it + 1;
        if (up0.is_zero() && up1.is_zero()) {
            converged = true;
            break;
        }
        bool z0, z1;
        Rational v = std::min(weighted_valuation(up0, c_s, a, log, e0, z0), weighted_valuation(up1, c_s, a, log, e0, z1));
        if (last && !(v > *last)) strict = false;
        last = v;
        rep.update_valuations.push_back(v);
        delta[0] = delta[0] - up0;
        delta[1] = delta[1] - up1;
    }
    if (!converged) throw error(errc::no_contraction, "chi_2 iteration did not reach a fixed point");
    rep.contraction = strict;

    // chi_2(pi~^* P_h) = 0
    {
        std::vector<ZPoly> img{R.var(kS), R.var(kB), R.var(kU0), R.var(kU1), delta[0], delta[1]};
        rep.chi2_kills_relations = true;
        for (int h = 0; h < 2; ++h)
            if (!nf2(R.compose(tP[h], img)).is_zero()) rep.chi2_kills_relations = false;
    }

    // norm certificates; V_0 and delta_0 carry a+1 in the log case
    auto germ_ok = [&](const ZPoly& f, int j, std::string& txt) {
        bool z;
        const Rational need = (a + (log && j == 0 ? Rational(1) : Rational(0))) * c_s;
        Rational v = weighted_valuation(f, c_s, a, log, e0, z);
        txt = z ? std::string("inf") : to_string(v);
        return z || v >= need;
    };
    std::vector<ZPoly> chi1V;
    for (int j = 0; j < 2; ++j) {
        chi1V.push_back(nf1(P[j]));
        std::string t;
        rep.chi1_norm_ok.push_back(germ_ok(chi1V[j], j, t));
        rep.chi1_norm.push_back(t);
        std::string t2;
        rep.chi2_norm_ok.push_back(germ_ok(delta[j], j, t2));
        rep.chi2_norm.push_back(t2);
    }

    // chi_1(chi_2(delta_j)) = delta_j in R1
    {
        std::vector<ZPoly> img{R.var(kS), R.var(kB), R.var(kU0), R.var(kU1), chi1V[0], chi1V[1]};
        for (int j = 0; j < 2; ++j) rep.roundtrip_delta.push_back(nf1(R.compose(delta[j], img)) == R.var(kW0 + j));
    }
    // chi_2(chi_1(V_j)) = V_j in R2
    {
        std::vector<ZPoly> img{R.var(kS), R.var(kB), R.var(kU0), R.var(kU1), delta[0], delta[1]};
        for (int j = 0; j < 2; ++j) rep.roundtrip_v.push_back(nf2(R.compose(chi1V[j], img)) == R.var(kW0 + j));
    }
    (void)e1;
    rep.pass = rep.A_invertible_residue && rep.A_invertible_full && rep.contraction && rep.chi2_kills_relations;
    for (bool b : rep.chi1_norm_ok) rep.pass = rep.pass && b;
    for (bool b : rep.chi2_norm_ok) rep.pass = rep.pass && b;
    for (bool b : rep.roundtrip_delta) rep.pass = rep.pass && b;
    for (bool b : rep.roundtrip_v) rep.pass = rep.pass && b;
    return rep;
}

}  // namespace diffcond
