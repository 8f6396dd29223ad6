#include <gtest/gtest.h>

#include <diffcond/parse.hpp>
#include <diffcond/tate.hpp>

#include "oracles.hpp"

using namespace diffcond;

namespace {

constexpr int kPrec = 10;

KappaCtx kb(int p) { return KappaCtx(p, std::vector<std::string>{"b"}); }

std::vector<KappaSeries> random_gens(std::mt19937_64& g, const KappaCtx& k, int n) {
    std::vector<KappaSeries> gens;
    if (n == 1) {
        gens.push_back(oracle::random_generator(g, k, 1, Mono{2 + static_cast<int>(g() % 2)}, kPrec));
    } else {
        gens.push_back(oracle::random_generator(g, k, 2, Mono{2, 0}, kPrec));
        gens.push_back(oracle::random_generator(g, k, 2, Mono{0, 2}, kPrec));
    }
    return gens;
}

}  // namespace

TEST(Groebner, UnitIdealCollapses) {
    KappaCtx k = kb(3);
    std::vector<KappaSeries> gens = {parse_kappa_series("u^2 - S", k, 1, 16), parse_kappa_series("u^3", k, 1, 16)};
    GroebnerBasis B = groebner(gens);
    ASSERT_EQ(B.gens.size(), 1u);
    EXPECT_EQ(B.gens[0].str({"u"}), "1");
}

TEST(Groebner, BuchbergerCriterionHolds) {
    std::mt19937_64 g(17);
    int checked = 0;
    for (int t = 0; t < 40; ++t) {
        const int p = t % 2 ? 3 : 2;
        KappaCtx k = kb(p);
        auto gens = random_gens(g, k, 2);
        GroebnerBasis B;
        try {
            B = groebner(gens);
        } catch (const error& e) {
            ASSERT_EQ(e.code(), errc::lead_not_s_free);
            continue;
        }
        ++checked;
        // every generator lies in the ideal of the basis, and every S-pair reduces to zero
        for (const auto& f : gens) {
            KappaSeries r = oracle::naive_reduce(f, B.gens, g);
            EXPECT_TRUE(r.is_zero()) << r.str(u_names(2));
        }
        for (std::size_t i = 0; i < B.gens.size(); ++i)
            for (std::size_t j = i + 1; j < B.gens.size(); ++j) {
                const auto& a = B.gens[i];
                const auto& b = B.gens[j];
                Mono l(2);
                for (int v = 0; v < 2; ++v) l[v] = std::max(B.leads[i][v], B.leads[j][v]);
                KappaSeries sp = a.mul_term(mono_sub(l, B.leads[i]), 0, a.lead().second.inv()) -
                                 b.mul_term(mono_sub(l, B.leads[j]), 0, b.lead().second.inv());
                EXPECT_TRUE(oracle::naive_reduce(sp, B.gens, g).is_zero());
            }
    }
    EXPECT_GT(checked, 20);
}

TEST(Division, IdentityIrreducibleUniqueMonotone) {
    std::mt19937_64 g(23);
    for (int t = 0; t < 60; ++t) {
        const int p = 2 + static_cast<int>(g() % 2);
        const int n = 1 + static_cast<int>(g() % 2);
        KappaCtx k = kb(p);
        GroebnerBasis B;
        try {
            B = groebner(random_gens(g, k, n));
        } catch (const error&) {
            continue;
        }
        KappaSeries f = oracle::random_series(g, k, n, kPrec);
        auto d = divide_kappa(f, B);
        KappaSeries back = d.remainder;
        for (std::size_t i = 0; i < B.gens.size(); ++i) back = back + d.quotients[i] * B.gens[i];
        EXPECT_TRUE(back.equals_at_precision(f));
        for (const auto& [key, a] : d.remainder.terms()) EXPECT_LT(find_divisor(B.leads, key_u(key)), 0);
        KappaSeries other = oracle::naive_reduce(f, B.gens, g);
        EXPECT_TRUE(other.equals_at_precision(d.remainder));
        for (Rational c : {Rational(1, 3), Rational(1)}) {
            GaussVal vf = f.gauss_valuation(c, 1000), vr = d.remainder.gauss_valuation(c, 1000);
            if (vf.certified && vr.certified) EXPECT_GE(vr.value, vf.value);
            for (std::size_t i = 0; i < B.gens.size(); ++i) {
                GaussVal vq = (d.quotients[i] * B.gens[i]).gauss_valuation(c, 1000);
                if (vf.certified && vq.certified) EXPECT_GE(vq.value, vf.value);
            }
        }
    }
}

TEST(Division, NonSFreeLeadRejected) {
    KappaCtx k = kb(2);
    LiftSeries bad = parse_lift_series("S*u + p", CohenCtx(2, 8, k), 1, 16);
    EXPECT_THROW(make_lifted_ideal({bad}), error);
}

TEST(LiftedIdeal, QuotientValuationDominatesRepresentatives) {
    CohenCtx c(2, 8, kb(2));
    LiftedIdeal I = make_lifted_ideal({parse_lift_series("u^2 - u + p*S^-1", c, 1, 64)});
    EXPECT_EQ(I.j_I, -1);
    LiftSeries f = parse_lift_series("u^3 + S^-1*u + p^2*S^-2 + 1", c, 1, 64);
    const Rational cc(1, 2);
    GaussVal q = quotient_valuation(f, I, cc);
    std::mt19937_64 g(4);
    for (int t = 0; t < 20; ++t) {
        LiftSeries h(c, 1, 64);
        for (int s = 0; s < 3; ++s)
            h.add(Mono{static_cast<int>(g() % 3)}, static_cast<int>(g() % 4),
                  CohenElem::from_int(static_cast<int>(g() % 7) - 3, c));
        GaussVal v = (f + h * I.gens[0]).gauss_valuation(cc, c.N());
        EXPECT_GE(q.value, v.value);
    }
    try {
        quotient_valuation(f, I, Rational(1));
        FAIL() << "radius beyond 1/(-j_I) accepted";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::radius_out_of_range);
    }
}

TEST(Idempotents, SplitAlgebraPoints) {
    KappaCtx k = kb(2);
    GroebnerBasis B = groebner({parse_kappa_series("u^2 + u", k, 1, 16)});
    SplitAlgebra A = split_components(B);
    ASSERT_EQ(A.points.size(), 2u);
    std::set<std::string> es;
    for (const auto& e : A.fundamental) es.insert(e.str({"u"}));
    EXPECT_EQ(es, (std::set<std::string>{"u", "u + 1"}));
}

TEST(Idempotents, HenselLiftDoubles) {
    CohenCtx c(2, 8, kb(2));
    LiftedIdeal I = make_lifted_ideal({parse_lift_series("u^2 - u + p*S^-1", c, 1, 64)});
    SplitAlgebra A = split_components(I.basis);
    ASSERT_EQ(A.fundamental.size(), 2u);
    std::vector<LiftSeries> es;
    for (const auto& eb : A.fundamental) {
        IdempotentLift L = lift_idempotent(eb, I, c);
        for (std::size_t s = 1; s + 1 < L.trace.size(); ++s)
            EXPECT_GE(L.trace[s], Val(L.trace[s - 1].value() * 2));
        EXPECT_TRUE(divide_lift(L.e * L.e - L.e, I).remainder.is_zero());
        EXPECT_EQ(reduce_mod_p(L.e).str({"u"}), divide_kappa(eb, I.basis).remainder.str({"u"}));
        es.push_back(L.e);
    }
    EXPECT_TRUE(divide_lift(es[0] * es[1], I).remainder.is_zero());
    LiftSeries one = LiftSeries::constant(CohenElem::from_int(1, c), 1, 64);
    EXPECT_TRUE(divide_lift(es[0] + es[1] - one, I).remainder.is_zero());
}

TEST(Idempotents, NonIdempotentRejected) {
    CohenCtx c(3, 6, kb(3));
    LiftedIdeal I = make_lifted_ideal({parse_lift_series("u^2 - u", c, 1, 32)});
    EXPECT_THROW(lift_idempotent(parse_kappa_series("u + 1", c.kappa, 1, 32), I, c), error);
}
