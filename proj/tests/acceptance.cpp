// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <diffcond/diffmod.hpp>
#include <diffcond/extensions.hpp>
#include <diffcond/parse.hpp>
#include <diffcond/random.hpp>
#include <diffcond/suite.hpp>
#include <diffcond/tate.hpp>
#include <diffcond/thickening.hpp>

#include "oracles.hpp"

using namespace diffcond;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

KappaCtx kb(int p) { return KappaCtx(p, std::vector<std::string>{"b"}); }

struct Outcome {
    bool pass = true;
    std::string detail;
};

void fail(Outcome& o, const std::string& why) {
    if (o.pass) o.detail = why;
    o.pass = false;
}

DiffModule module_of(const std::string& f, int p, int N = 8, Window w = {}) {
    KappaCtx k = kb(p);
    return as_module(as_reduce(parse_datum(f, k)).reduced, CohenCtx(p, N, k), w);
}

// ---------------------------------------------------------------- 1
Outcome rank_one_table() {
    Outcome o;
    int cases = 0;
    double worst = 0;
    for (int p : {2, 3, 5})
        for (int d = 1; d <= 9; ++d) {
            if (d % p == 0) continue;
            const std::string f = "b*s^-" + std::to_string(d);
            const auto t0 = Clock::now();
            Conductors cd = conductors(module_of(f, p));
            const double dt = seconds_since(t0);
            worst = std::max(worst, dt);
            auto want = oracle::kato(parse_datum(f, kb(p)));
            ++cases;
            if (want.swan != d || want.artin != d + 1) fail(o, "oracle disagrees on " + f);
            if (cd.swan != Rational(d) || cd.artin != Rational(d + 1))
                fail(o, f + " p=" + std::to_string(p) + " gave " + to_string(cd.swan) + "/" + to_string(cd.artin));
            if (dt >= 1.0) fail(o, f + " took " + std::to_string(dt) + " s");
        }
    if (o.pass) o.detail = std::to_string(cases) + " cases, slowest " + std::to_string(worst) + " s";
    return o;
}

// ---------------------------------------------------------------- 2
Outcome fierce_case() {
    Outcome o;
    for (int p : {2, 3, 5}) {
        const std::string f = "b*s^-" + std::to_string(p);
        DiffModule M = module_of(f, p);
        Conductors cd = conductors(M);
        if (cd.swan != Rational(p) || cd.artin != Rational(p)) fail(o, f + " conductors " + to_string(cd.swan) + "/" + to_string(cd.artin));
        if (dominant_ops(M, false) != std::set<int>{1}) fail(o, f + " dominance set is not {1}");
        auto want = oracle::kato(parse_datum(f, kb(p)));
        if (want.swan != p || want.artin != p) fail(o, "oracle disagrees on " + f);
    }
    if (o.pass) o.detail = "swan = artin = p, dominant operator d/dB";
    return o;
}

// ---------------------------------------------------------------- 3
Outcome hasse_arf() {
    Outcome o;
    const auto t0 = Clock::now();
    DataGen g(0);
    for (int i = 0; i < 200; ++i) {
        const int p = g.prime();
        const int m = 1 + g.below(2);
        ASWData f = g.datum(p, m);
        Conductors cd = conductors(as_module(as_reduce(f).reduced, CohenCtx(p, 8, m)));
        const bool integral = cd.swan.denominator() == 1 && cd.artin.denominator() == 1;
        if (!integral || cd.swan < Rational(0) || cd.artin < Rational(0)) fail(o, "non-integral or negative for " + f.str());
        if (cd.artin < cd.swan || cd.artin > cd.swan + 1) fail(o, "swan <= artin <= swan + 1 violated for " + f.str());
        auto want = oracle::kato(f);
        if (cd.swan != Rational(want.swan) || cd.artin != Rational(want.artin)) fail(o, "oracle disagrees on " + f.str());
    }
    const double dt = seconds_since(t0);
    if (dt >= 30.0) fail(o, "took " + std::to_string(dt) + " s");
    if (o.pass) o.detail = "200 data in " + std::to_string(dt) + " s";
    return o;
}

// ---------------------------------------------------------------- 4
Outcome perfect_residue() {
    Outcome o;
    DataGen g(1);
    for (int i = 0; i < 50; ++i) {
        const int p = g.prime();
        ASWData f = g.perfect_datum(p);
        ASWData r = as_reduce(f).reduced;
        Conductors cd = conductors(as_module(r, CohenCtx(p, 8, 0)));
        if (cd.swan != Rational(classical_swan_perfect(r))) fail(o, f.str() + " p=" + std::to_string(p));
        if (cd.swan != Rational(oracle::kato(f).swan)) fail(o, "oracle disagrees on " + f.str());
    }
    if (o.pass) o.detail = "50 data over F_p";
    return o;
}

// ---------------------------------------------------------------- 5, 9
const SuiteReport& suite() {
    static const SuiteReport rep = run_suite(0, 200);
    return rep;
}

Outcome invariance() {
    Outcome o;
    for (const auto& grp : suite().groups)
        if ((grp.name == "rotation-invariance" || grp.name == "generic-variable-invariance") && !grp.pass())
            fail(o, grp.name + ": " + grp.failures.front());
    // log break under a generic variable, checked against root expansion; equality with the original where it holds
    DataGen g(0);
    int checked = 0, kept = 0, dropped = 0;
    for (int i = 0; i < 200; ++i) {
        const int p = g.prime();
        const int m = 1 + g.below(2);
        ASWData f = as_reduce(g.datum(p, m)).reduced;
        DiffModule M = as_module(f, CohenCtx(p, 8, m));
        const Rational bl = diff_break(M, true);
        for (int j = 1; j <= m; ++j) {
            const Rational want(oracle::generic_log_break(f, j - 1));
            const Rational got = diff_break(add_generic_variable(M, j), true);
            ++checked;
            if (got != want) fail(o, "generic log break of " + f.str() + " j=" + std::to_string(j));
            if (want == bl) ++kept;
            else ++dropped;
        }
    }
    if (o.pass) {
        std::ostringstream os;
        os << "rotation (log, nonlog) and generic variable (nonlog) exact on 200 data; generic log break matches root "
              "expansion in "
           << checked << " cases (" << kept << " unchanged, " << dropped << " lowered)";
        o.detail = os.str();
    }
    return o;
}

Outcome harness() {
    Outcome o;
    int rows = 0;
    for (const auto& grp : suite().groups)
        if (grp.name == "break-triviality") {
            rows = grp.checked;
            if (!grp.pass()) fail(o, grp.failures.front());
        }
    if (rows != 400) fail(o, "expected 400 harness runs, got " + std::to_string(rows));
    if (o.pass) o.detail = "200 modules, log and nonlog";
    return o;
}

// ---------------------------------------------------------------- 6
constexpr int kCosetPrec = 24;

Outcome groebner_suite() {
    Outcome o;
    std::mt19937_64 g(6);
    int instances = 0, reps = 0;
    const Rational cq(1, 2);
    while (instances < 200) {
        const int p = 2 + static_cast<int>(g() % 2);
        const int n = 1 + static_cast<int>(g() % 2);
        KappaCtx k = kb(p);
        std::vector<KappaSeries> gens;
        if (n == 1) gens.push_back(oracle::random_generator(g, k, 1, Mono{2 + static_cast<int>(g() % 2)}, 10));
        else {
            gens.push_back(oracle::random_generator(g, k, 2, Mono{2, 0}, 10));
            gens.push_back(oracle::random_generator(g, k, 2, Mono{0, 2}, 10));
        }
        GroebnerBasis B;
        try {
            B = groebner(gens);
        } catch (const error& e) {
            if (e.code() != errc::lead_not_s_free) fail(o, std::string("groebner: ") + e.what());
            continue;
        }
        if (B.gens.size() == 1 && mono_degree(B.leads[0]) == 0) continue;
        ++instances;
        KappaSeries f = oracle::random_series(g, k, n, 10);
        auto d = divide_kappa(f, B);
        KappaSeries back = d.remainder;
        for (std::size_t i = 0; i < B.gens.size(); ++i) back = back + d.quotients[i] * B.gens[i];
        if (!back.equals_at_precision(f)) fail(o, "division identity");
        for (const auto& [key, a] : d.remainder.terms())
            if (find_divisor(B.leads, key_u(key)) >= 0) fail(o, "reducible remainder term");
        if (!oracle::naive_reduce(f, B.gens, g).equals_at_precision(d.remainder)) fail(o, "remainder differs from random-order reduction");
        for (Rational c : {Rational(1, 3), Rational(1)}) {
            GaussVal vf = f.gauss_valuation(c, 1000), vr = d.remainder.gauss_valuation(c, 1000);
            if (vf.certified && vr.certified && vr.value < vf.value) fail(o, "remainder norm grew");
            for (std::size_t i = 0; i < B.gens.size(); ++i) {
                GaussVal vq = (d.quotients[i] * B.gens[i]).gauss_valuation(c, 1000);
                if (vf.certified && vq.certified && vq.value < vf.value) fail(o, "quotient term norm grew");
            }
        }

        // coset norms: the truncated basis, read as exact generators, lifted and perturbed by p S^{-1}
        CohenCtx cc(p, 8, k);
        std::vector<LiftSeries> lifted;
        for (const auto& b : B.gens) {
            LiftSeries L = lift_series(b, cc);
            L.set_prec(kCosetPrec);
            L.add(Mono(n, 0), -1, CohenElem::from_int(p, cc));
            lifted.push_back(L);
        }
        LiftedIdeal I;
        try {
            I = make_lifted_ideal(lifted);
        } catch (const error&) {
            I = make_lifted_ideal({lifted.front()});
        }
        LiftSeries F = lift_series(oracle::random_series(g, k, n, kCosetPrec), cc);
        F.add(Mono(n, 0), -1, CohenElem::from_int(p * p, cc));
        const GaussVal q = quotient_valuation(F, I, cq);
        for (int t = 0; t < 20; ++t) {
            LiftSeries rep = F;
            for (std::size_t h = 0; h < I.gens.size(); ++h) {
                LiftSeries mult(cc, n, kCosetPrec);
                for (int s = 0; s < 2; ++s) {
                    Mono u(n, 0);
                    for (int v = 0; v < n; ++v) u[v] = static_cast<int>(g() % 3);
                    mult.add(u, static_cast<int>(g() % 4), CohenElem::from_int(static_cast<int>(g() % 9) - 4, cc));
                }
                rep = rep + mult * I.gens[h];
            }
            ++reps;
            if (q.value < rep.gauss_valuation(cq, cc.N()).value) fail(o, "coset representative beats quotient valuation");
        }
    }
    if (o.pass) o.detail = std::to_string(instances) + " instances, " + std::to_string(reps) + " coset representatives";
    return o;
}

// ---------------------------------------------------------------- 7
// the degree-3 relation at p = 5 drains about 54 S-levels over the p-adic digits
constexpr int kIdemPrec = 128;

Outcome idempotents() {
    Outcome o;
    struct Case {
        int p, n, k;
        std::vector<std::string> rels;
    };
    const std::vector<Case> cases{
        {2, 1, 2, {"u^2 - u + p*S^-1"}},
        {3, 1, 2, {"u^2 - u + p*S^-1 + p^2*u*S^-1"}},
        {3, 1, 3, {"u^3 - u + p*S^-1"}},
        {5, 1, 3, {"u^3 - 3*u^2 + 2*u + p*u*S^-1"}},
        // u1^2 - u1, u2^2 - u2, u1*u2 after u1 -> u1 + p S^{-1} u2
        {2, 2, 3, {"u1^2 + 2*p*S^-1*u1*u2 + p^2*S^-2*u2^2 - u1 - p*S^-1*u2", "u2^2 - u2", "u1*u2 + p*S^-1*u2^2"}},
        {3, 2, 3, {"u1^2 + 2*p*S^-1*u1*u2 + p^2*S^-2*u2^2 - u1 - p*S^-1*u2", "u2^2 - u2", "u1*u2 + p*S^-1*u2^2"}},
    };
    for (const auto& cs : cases) {
        const std::string tag = cs.rels.front() + " p=" + std::to_string(cs.p);
        CohenCtx c(cs.p, 8, kb(cs.p));
        std::vector<LiftSeries> rels;
        for (const auto& r : cs.rels) rels.push_back(parse_lift_series(r, c, cs.n, kIdemPrec));
        LiftedIdeal I = make_lifted_ideal(rels);
        SplitAlgebra A = split_components(I.basis);
        if (static_cast<int>(A.fundamental.size()) != cs.k) {
            fail(o, tag + ": " + std::to_string(A.fundamental.size()) + " components");
            continue;
        }
        std::vector<LiftSeries> es;
        for (const auto& eb : A.fundamental) {
            IdempotentLift L = lift_idempotent(eb, I, c);
            for (std::size_t s = 1; s + 1 < L.trace.size(); ++s)
                if (L.trace[s] < Val(L.trace[s - 1].value() * 2)) fail(o, tag + ": Hensel step did not double");
            if (!divide_lift(L.e * L.e - L.e, I).remainder.is_zero()) fail(o, tag + ": lift is not idempotent");
            es.push_back(L.e);
        }
        for (int i = 0; i < cs.k; ++i)
            for (int j = i + 1; j < cs.k; ++j)
                if (!divide_lift(es[i] * es[j], I).remainder.is_zero()) fail(o, tag + ": not orthogonal");
        LiftSeries sum(c, cs.n, kIdemPrec);
        for (const auto& e : es) sum = sum + e;
        if (!divide_lift(sum - LiftSeries::constant(CohenElem::from_int(1, c), cs.n, kIdemPrec), I).remainder.is_zero())
            fail(o, tag + ": idempotents do not sum to 1 mod p^8");
    }
    if (o.pass) o.detail = std::to_string(cases.size()) + " algebras with 2 or 3 components";
    return o;
}

// ---------------------------------------------------------------- 8
Outcome thickening_formula() {
    Outcome o;
    const std::vector<std::pair<std::string, int>> data{{"b*s^-2", 3}, {"b^2*s^-4 + s^-1", 3}, {"b*s^-3", 2},
                                                        {"b*s^-5", 2},  {"b*s^-3", 5},          {"b*s^-7 + b^2*s^-2", 5}};
    int modules = 0;
    for (const auto& [fs, p] : data) {
        KappaCtx k = kb(p);
        ASWData f = as_reduce(parse_datum(fs, k)).reduced;
        DiffModule M = as_module(f, CohenCtx(p, p == 2 ? 20 : 8, k), Window{-128, 128});
        const int d = f.top();
        int points = 0;
        for (Rational a : {Rational(1), Rational(3, 2), Rational(2)})
            for (int kk : {2, 3}) {
                const Rational c(kk, d * (p - 1));
                for (int j : {0, 1}) {
                    ++points;
                    const Rational want = oracle::thick_formula(f, j, a, c);
                    const Rational lib = thick_spectral_valuation(M, a, c, j, false, 6);
                    const Rational rec = thick_dn_estimate(M, a, c, j, false, 6, 6);
                    if (lib != want || rec != want) {
                        std::ostringstream os;
                        os << fs << " p=" << p << " a=" << a << " c=" << c << " j=" << j << ": formula " << want
                           << ", library " << lib << ", recursion " << rec;
                        fail(o, os.str());
                    }
                }
            }
        if (points != 12) fail(o, "grid size");
        ++modules;
    }
    if (o.pass) o.detail = std::to_string(modules) + " modules x 12 grid points";
    return o;
}

// ---------------------------------------------------------------- 10
Outcome as_ts() {
    Outcome o;
    double worst = 0;
    for (int p : {2, 3})
        for (auto t : {PresentationTemplate::eisenstein, PresentationTemplate::fierce, PresentationTemplate::product}) {
            const auto t0 = Clock::now();
            Presentation pr = standard_presentation(t, p);
            auto check = [&](const Rational& a, bool log) {
                ASTSReport r = as_ts_isomorphism_check(pr, a, log, 3, 20, 2);
                if (!r.pass || !r.A_invertible_residue || !r.A_invertible_full)
                    fail(o, template_name(t) + " p=" + std::to_string(p) + " a=" + to_string(a) + (log ? " log" : ""));
            };
            for (Rational a : {Rational(2), Rational(5, 2), Rational(3)}) check(a, false);
            for (Rational a : {Rational(1), Rational(3, 2)}) check(a, true);
            const double dt = seconds_since(t0);
            worst = std::max(worst, dt);
            if (dt >= 10.0) fail(o, template_name(t) + " took " + std::to_string(dt) + " s");
        }
    if (o.pass) o.detail = "3 templates at p = 2, 3; slowest " + std::to_string(worst) + " s";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"rank-one conductor table", rank_one_table},
        {"fierce case", fierce_case},
        {"Hasse-Arf integrality", hasse_arf},
        {"perfect residue field", perfect_residue},
        {"invariance suite", invariance},
        {"Groebner and division suite", groebner_suite},
        {"idempotent correspondence", idempotents},
        {"thickening norm formula", thickening_formula},
        {"break and triviality harness", harness},
        {"TS and AS isomorphism", as_ts},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << i + 1 << ": " << criteria[i].first << " (" << o.detail << ")"
                  << std::endl;
    }
    return all ? 0 : 1;
}
