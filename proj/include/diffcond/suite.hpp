#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffmod.hpp"
#include "extensions.hpp"
#include "random.hpp"
#include "thickening.hpp"

namespace diffcond {

struct SuiteCase {
    int id = 0;
    int p = 2;
    int m = 0;
    std::string f;
    std::string reduced;
    Rational swan, artin;
    int oracle_swan = 0;
    int oracle_artin = 0;
    bool pass = false;
    std::string note;
};

struct SuiteGroup {
    std::string name;
    int checked = 0;
    std::vector<std::string> failures;
    bool pass() const { return failures.empty(); }
};

struct SuiteReport {
    std::uint64_t seed = 0;
    int size = 0;
    bool mutate_rotate = false;
    std::vector<SuiteCase> cases;
    std::vector<SuiteGroup> groups;
    bool pass() const {
        for (const auto& g : groups)
            if (!g.pass()) return false;
        return true;
    }
};

namespace detail {

inline void check(SuiteGroup& g, bool ok, const std::string& what) {
    ++g.checked;
    if (!ok) g.failures.push_back(what);
}

inline bool is_integer(const Rational& r) { return r.denominator() == 1; }

}  // namespace detail

inline SuiteReport run_suite(std::uint64_t seed, int size, bool mutate_rotate = false, int N = 8) {
    if (size < 1) throw error(errc::parse_error, "suite size must be at least 1");
    SuiteReport rep;
    rep.seed = seed;
    rep.size = size;
    rep.mutate_rotate = mutate_rotate;
    SuiteGroup hasse{"hasse-arf", 0, {}},
        oracle{"oracle-agreement", 0, {}},
        reduce{"as-reduce", 0, {}},
        perfect{"perfect-residue", 0, {}},
        integ{"integrability", 0, {}},
        rot{"rotation-invariance", 0, {}},
        gen{"generic-variable-invariance", 0, {}},
        harness{"break-triviality", 0, {}};
    DataGen gen_data(seed);
    for (int i = 0; i < size; ++i) {
        SuiteCase sc;
        sc.id = i;
        sc.p = gen_data.prime();
        sc.m = 1 + gen_data.below(2);
        const ASWData f = gen_data.datum(sc.p, sc.m);
        sc.f = f.str();
        const std::string tag = "#" + std::to_string(i) + " p=" + std::to_string(sc.p) + " f=" + sc.f;
        try {
            const ASReduction red = as_reduce(f);
            sc.reduced = red.reduced.str();
            detail::check(reduce, verify_witness(f, red) && red.reduced.is_reduced() &&
                                      as_reduce(red.reduced).reduced == red.reduced,
                          tag);
            const CohenCtx c(sc.p, N, sc.m);
            const DiffModule M = as_module(red.reduced, c);
            detail::check(integ, check_integrability(M), tag);
            const Conductors cd = conductors(M);
            sc.swan = cd.swan;
            sc.artin = cd.artin;
            sc.oracle_swan = kato_swan(red.reduced);
            sc.oracle_artin = kato_artin(red.reduced);
            const bool ha = detail::is_integer(cd.swan) && detail::is_integer(cd.artin) && cd.swan >= 0 &&
                            cd.swan <= cd.artin && cd.artin <= cd.swan + 1;
            detail::check(hasse, ha, tag);
            const bool agree = cd.swan == Rational(sc.oracle_swan) && cd.artin == Rational(sc.oracle_artin);
            detail::check(oracle, agree, tag);
            sc.pass = ha && agree;

            const Rational bn = diff_break(M, false), bl = diff_break(M, true);
            for (int j = 1; j <= sc.m; ++j) {
                const DiffModule R = rotate(M, j, mutate_rotate);
                bool ok = check_integrability(R);
                try {
                    ok = ok && diff_break(R, false) == bn && diff_break(R, true) == bl;
                } catch (const error&) {
                    ok = false;
                }
                detail::check(rot, ok, tag + " j=" + std::to_string(j));
                const DiffModule G = add_generic_variable(M, j);
                detail::check(gen, diff_break(G, false) == bn, tag + " j=" + std::to_string(j));
            }
            detail::check(harness, break_triviality_harness(M, bn, false).pass, tag + " nonlog");
            detail::check(harness, break_triviality_harness(M, bl, true).pass, tag + " log");
        } catch (const error& e) {
            sc.note = e.what();
            detail::check(oracle, false, tag + ": " + e.what());
        }
        rep.cases.push_back(sc);
    }
    const int nperfect = std::max(1, size / 4);
    for (int i = 0; i < nperfect; ++i) {
        const int p = gen_data.prime();
        const ASWData f = gen_data.perfect_datum(p);
        const std::string tag = "perfect #" + std::to_string(i) + " p=" + std::to_string(p) + " f=" + f.str();
        try {
            const ASWData r = as_reduce(f).reduced;
            const Conductors cd = conductors(as_module(r, CohenCtx(p, N, 0)));
            detail::check(perfect, cd.swan == Rational(classical_swan_perfect(r)), tag);
        } catch (const error& e) {
            detail::check(perfect, false, tag + ": " + e.what());
        }
    }
    rep.groups = {hasse, oracle, reduce, perfect, integ, rot, gen, harness};
    return rep;
}

}  // namespace diffcond
