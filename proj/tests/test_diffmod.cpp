#include <gtest/gtest.h>

#include <diffcond/diffmod.hpp>
#include <diffcond/extensions.hpp>
#include <diffcond/parse.hpp>
#include <diffcond/random.hpp>

#include "oracles.hpp"

using namespace diffcond;

namespace {

KappaCtx kb(int p) { return KappaCtx(p, std::vector<std::string>{"b"}); }

DiffModule module_of(const std::string& f, int p, int N = 8) {
    KappaCtx k = kb(p);
    return as_module(as_reduce(parse_datum(f, k)).reduced, CohenCtx(p, N, k));
}

}  // namespace

TEST(RankOne, ConductorTableMatchesReduction) {
    for (int p : {2, 3, 5})
        for (int d = 1; d <= 9; ++d) {
            const std::string f = "b*s^-" + std::to_string(d);
            auto want = oracle::kato(parse_datum(f, kb(p)));
            Conductors cd = conductors(module_of(f, p));
            EXPECT_EQ(cd.swan, Rational(want.swan)) << f << " p=" << p;
            EXPECT_EQ(cd.artin, Rational(want.artin)) << f << " p=" << p;
        }
}

TEST(RankOne, FierceDominance) {
    for (int p : {2, 3, 5}) {
        DiffModule M = module_of("b*s^-" + std::to_string(p), p);
        Conductors cd = conductors(M);
        EXPECT_EQ(cd.swan, Rational(p));
        EXPECT_EQ(cd.artin, Rational(p));
        EXPECT_EQ(dominant_ops(M, false), (std::set<int>{1}));
    }
}

TEST(RankOne, TameDominance) {
    DiffModule M = module_of("b*s^-2", 3);
    EXPECT_EQ(dominant_ops(M, false), (std::set<int>{0}));
    EXPECT_EQ(diff_break(M, false), Rational(3));
    EXPECT_EQ(diff_break(M, true), Rational(2));
}

TEST(RankOne, UnramifiedIsZero) {
    Conductors cd = conductors(module_of("0", 3));
    EXPECT_EQ(cd.swan, Rational(0));
    EXPECT_EQ(cd.artin, Rational(0));
    Conductors cc = conductors(module_of("b + s^2", 2));
    EXPECT_EQ(cc.artin, Rational(0));
}

TEST(RankOne, RandomDataAgreeWithReductionOracle) {
    DataGen g(42);
    for (int i = 0; i < 60; ++i) {
        const int p = g.prime();
        const int m = 1 + g.below(2);
        ASWData f = g.datum(p, m);
        auto want = oracle::kato(f);
        ASWData r = as_reduce(f).reduced;
        Conductors cd = conductors(as_module(r, CohenCtx(p, 8, m)));
        EXPECT_EQ(cd.swan, Rational(want.swan)) << f.str() << " p=" << p;
        EXPECT_EQ(cd.artin, Rational(want.artin)) << f.str() << " p=" << p;
    }
}

TEST(Integrability, AsModulesAreFlat) {
    DataGen g(3);
    for (int i = 0; i < 20; ++i) {
        const int p = g.prime();
        ASWData f = as_reduce(g.datum(p, 2)).reduced;
        EXPECT_TRUE(check_integrability(as_module(f, CohenCtx(p, 8, 2))));
    }
}

TEST(Integrability, BrokenConnectionDetected) {
    DiffModule M = module_of("b*s^-2", 3);
    M.N[1] = M.N[1] + Matrix::scalar(RobbaElem::S(M.ctx, -1));
    EXPECT_FALSE(check_integrability(M));
}

TEST(Invariance, RotationKeepsBreaks) {
    DataGen g(5);
    for (int i = 0; i < 30; ++i) {
        const int p = g.prime();
        ASWData f = as_reduce(g.datum(p, 1)).reduced;
        DiffModule M = as_module(f, CohenCtx(p, 8, 1));
        DiffModule R = rotate(M, 1);
        EXPECT_TRUE(check_integrability(R));
        EXPECT_EQ(diff_break(R, false), diff_break(M, false)) << f.str();
        EXPECT_EQ(diff_break(R, true), diff_break(M, true)) << f.str();
    }
}

TEST(Invariance, SignMutationBreaksFlatness) {
    // with d_B N_1 = 0 the flipped sign is invisible to flatness, so take b^2
    DiffModule M = module_of("b^2*s^-4", 3);
    EXPECT_TRUE(check_integrability(rotate(M, 1, false)));
    EXPECT_FALSE(check_integrability(rotate(M, 1, true)));
}

TEST(Invariance, GenericVariableAgainstRootOracle) {
    DataGen g(6);
    for (int i = 0; i < 40; ++i) {
        const int p = g.prime();
        const int m = 1 + g.below(2);
        ASWData f = as_reduce(g.datum(p, m)).reduced;
        if (f.top() == 0) continue;
        DiffModule M = as_module(f, CohenCtx(p, 8, m));
        for (int j = 1; j <= m; ++j) {
            DiffModule G = add_generic_variable(M, j);
            EXPECT_EQ(diff_break(G, false), diff_break(M, false)) << f.str();
            EXPECT_EQ(diff_break(G, true), Rational(oracle::generic_log_break(f, j - 1))) << f.str() << " j=" << j;
        }
    }
}

TEST(Invariance, GenericVariableCanLowerLogBreak) {
    DiffModule M = module_of("b*s^-3", 3);
    DiffModule G = add_generic_variable(M, 1);
    EXPECT_EQ(diff_break(G, false), Rational(3));
    EXPECT_EQ(diff_break(G, true), Rational(2));
    EXPECT_FALSE(G.pieces[0].certified);
    EXPECT_THROW(conductors(G), error);
}

TEST(Combine, DirectSumAddsConductors) {
    DiffModule A = module_of("b*s^-2", 3), B = module_of("b*s^-3", 3);
    Conductors cd = conductors(combine(A, B, CombineKind::direct_sum));
    EXPECT_EQ(cd.swan, Rational(2 + 3));
    EXPECT_EQ(cd.artin, Rational(3 + 3));
}

TEST(Combine, TensorIsSumOfData) {
    KappaCtx k = kb(3);
    for (auto [f, h] : std::vector<std::pair<std::string, std::string>>{
             {"b*s^-2", "b^2*s^-4"}, {"s^-5", "b*s^-3"}, {"b*s^-4", "2*b*s^-4 + s^-1"}}) {
        DiffModule A = module_of(f, 3), B = module_of(h, 3);
        auto want = oracle::kato(parse_datum(f, k) + parse_datum(h, k));
        Conductors cd = conductors(combine(A, B, CombineKind::tensor));
        EXPECT_EQ(cd.swan, Rational(want.swan)) << f << " x " << h;
        EXPECT_EQ(cd.artin, Rational(want.artin)) << f << " x " << h;
    }
}

TEST(Combine, UncertifiedPieceRefused) {
    // both factors are reduced, their sum b^3 s^-3 is not
    DiffModule A = module_of("b*s^-3", 3), B = module_of("b^3*s^-3 - b*s^-3", 3);
    DiffModule T = combine(A, B, CombineKind::tensor);
    try {
        conductors(T);
        FAIL() << "uncertified decomposition accepted";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::unknown_decomposition);
    }
}

TEST(Spectral, RankOneClampAndRadiusGuard) {
    DiffModule M = module_of("b*s^-4", 3);
    const Rational c(1, 2);
    // v(N_0) = 1/2 - 5c, v(N_1) = 1/2 - 4c
    EXPECT_EQ(spectral_valuation(M, 0, c).value, Rational(1, 2) - 5 * c);
    EXPECT_EQ(spectral_valuation(M, 1, c).value, Rational(1, 2) - 4 * c);
    EXPECT_THROW(spectral_valuation(M, 0, Rational(0)), error);
    DiffModule T = trivial_module(M.ctx);
    EXPECT_EQ(spectral_valuation(T, 0, c).value, base_val(3, 0, c));
    EXPECT_EQ(spectral_valuation(T, 1, c).value, base_val(3, 1, c));
}
