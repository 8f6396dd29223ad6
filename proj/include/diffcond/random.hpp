#pragma once

#include <cstdint>
#include <random>

#include "aswdata.hpp"

namespace diffcond {

// Seeded generator of Artin-Schreier data; draws use plain modulo so streams are portable.
class DataGen {
public:
    explicit DataGen(std::uint64_t seed) : rng_(seed) {}

    int below(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }

    int prime() {
        static constexpr int ps[] = {2, 3, 5};
        return ps[below(3)];
    }

    // pole orders <= 12; coefficients from {b_j, b_j + 1, b_j^2, 1}
    ASWData datum(int p, int m) { return datum(KappaCtx(p, m)); }

    ASWData datum(const KappaCtx& k) {
        ASWData f(k);
        const int nterms = 1 + below(3);
        for (int t = 0; t < nterms; ++t) {
            int e = -(1 + below(12));
            if (below(8) == 0) e = below(4);
            f.add(e, coefficient(k));
        }
        if (f.is_zero()) f.add(-1, ResidueElem::from_int(1, k));
        return f;
    }

    ASWData perfect_datum(int p) {
        KappaCtx k(p, 0);
        ASWData f(k);
        const int nterms = 1 + below(3);
        for (int t = 0; t < nterms; ++t) f.add(-(1 + below(12)), ResidueElem::from_int(1 + below(p - 1), k));
        if (f.is_zero()) f.add(-1, ResidueElem::from_int(1, k));
        return f;
    }

private:
    ResidueElem coefficient(const KappaCtx& k) {
        if (k.m == 0) return ResidueElem::from_int(1, k);
        const ResidueElem b = ResidueElem::var(below(k.m), k);
        switch (below(4)) {
            case 0: return b;
            case 1: return b + ResidueElem::from_int(1, k);
            case 2: return b * b;
            default: return ResidueElem::from_int(1, k);
        }
    }

    std::mt19937_64 rng_;
};

}  // namespace diffcond
