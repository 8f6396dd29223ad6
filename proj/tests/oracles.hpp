// Test-side reference implementations. Nothing here calls the code paths it checks.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include <diffcond/aswdata.hpp>
#include <diffcond/tate.hpp>

namespace oracle {

using namespace diffcond;

inline int vp(std::int64_t x, int p) {
    if (x == 0) return 1 << 20;
    int v = 0;
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

// ---------------------------------------------------------------- Artin-Schreier reduction

// datum as pole order -> coefficient over F_p[b_1..b_m] (polynomial coefficients only)
using Polar = std::map<int, FpPoly>;

inline bool all_partials_vanish(const FpPoly& a, const std::vector<bool>& tracked) {
    for (int j = 0; j < a.nvars(); ++j)
        if (tracked[j] && !a.derivative(j).is_zero()) return false;
    return true;
}

// p-th root of a polynomial whose exponents are all divisible by p (untracked variables included)
inline std::optional<FpPoly> poly_root(const FpPoly& a, int p) {
    FpPoly r(a.ctx(), a.nvars());
    for (const auto& [m, c] : a.terms()) {
        Mono mm(m);
        for (int& e : mm) {
            if (e % p != 0) return std::nullopt;
            e /= p;
        }
        r.add_term(mm, c);
    }
    return r;
}

// Kato top pole after killing p-th power leading terms; coefficients must stay polynomial
inline int swan_by_reduction(Polar f, int p, const std::vector<bool>& tracked) {
    while (!f.empty()) {
        auto it = std::prev(f.end());
        const int i = it->first;
        if (i <= 0) return 0;
        const FpPoly a = it->second;
        if (a.is_zero()) {
            f.erase(it);
            continue;
        }
        if (i % p != 0 || !all_partials_vanish(a, tracked)) return i;
        auto r = poly_root(a, p);
        if (!r) return i;  // p-th power only through untracked variables we cannot express
        f.erase(it);
        auto& slot = f.try_emplace(i / p, FpPoly(a.ctx(), a.nvars())).first->second;
        slot = slot + *r;
    }
    return 0;
}

inline int artin_from_swan(int swan, bool fierce) {
    if (swan == 0) return 0;
    return fierce ? swan : swan + 1;
}

inline Polar to_polar(const ASWData& f) {
    Polar out;
    for (const auto& [e, a] : f.terms) {
        if (e >= 0) continue;
        if (!a.is_polynomial()) throw error(errc::unsupported_template, "oracle needs polynomial coefficients");
        FpPoly n = a.num().scale(a.den().constant_coeff().inv());
        out[-e] = n;
    }
    return out;
}

struct KatoPair {
    int swan = 0;
    int artin = 0;
};

// Swan and Artin of AS(f) for a datum with polynomial coefficients over F_p[b]
inline KatoPair kato(const ASWData& f) {
    const int p = f.k.p;
    std::vector<bool> tracked(f.k.m, true);
    Polar pf = to_polar(f);
    const int sw = swan_by_reduction(pf, p, tracked);
    // the reduced top coefficient is a p-th power iff the pole order is divisible by p and it survived
    return {sw, artin_from_swan(sw, sw % p == 0)};
}

// ---------------------------------------------------------------- generic variable

inline std::int64_t binom(int n, int k) {
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// log break of f after b_j -> b_j + x s, with b_j treated as beta^{p^K}: the new residue field is
// F_p(b_others, beta, x) where beta sits in place of b_j; x is appended as the last variable.
inline int generic_log_break(const ASWData& f, int j, int K = 3) {
    const int p = f.k.p;
    const int m = f.k.m;
    std::int64_t q = 1;
    for (int i = 0; i < K; ++i) q *= p;
    Polar pf = to_polar(f);
    Polar out;
    for (const auto& [i, a] : pf) {
        for (const auto& [mono, c] : a.terms()) {
            // (beta^q + x s)^e * rest = sum_t C(e,t) beta^{q(e-t)} x^t s^t
            const int e = mono[j];
            for (int t = 0; t <= e; ++t) {
                const int pole = i - t;
                if (pole <= 0) continue;
                const std::int64_t bc = binom(e, t) % p;
                if (bc == 0) continue;
                Mono nm(m + 1, 0);
                for (int v = 0; v < m; ++v) nm[v] = mono[v];
                nm[j] = static_cast<int>(q * (e - t));
                nm[m] = t;
                FpPoly term(p, m + 1);
                term.add_term(nm, c * Fp(p, bc));
                auto& slot = out.try_emplace(pole, FpPoly(p, m + 1)).first->second;
                slot = slot + term;
            }
        }
    }
    std::vector<bool> tracked(m + 1, true);
    return swan_by_reduction(out, p, tracked);
}

// ---------------------------------------------------------------- Tate division

// Reduces f to a normal form choosing reducible terms and divisors at random.
inline KappaSeries naive_reduce(KappaSeries f, const std::vector<KappaSeries>& gens, std::mt19937_64& rng,
                                int max_steps = 200000) {
    std::vector<Mono> leads;
    std::vector<ResidueElem> lcs;
    for (const auto& g : gens) {
        // order-largest term with minimal S exponent
        const auto& [k, a] = *g.terms().begin();
        leads.push_back(key_u(k));
        lcs.push_back(a);
        if (key_s(k) != 0) throw error(errc::lead_not_s_free, "oracle expects S-free leads");
    }
    for (int step = 0; step < max_steps; ++step) {
        std::vector<std::pair<TKey, std::vector<int>>> cands;
        for (const auto& [k, a] : f.terms()) {
            std::vector<int> ds;
            for (std::size_t i = 0; i < leads.size(); ++i)
                if (mono_divides(leads[i], key_u(k))) ds.push_back(static_cast<int>(i));
            if (!ds.empty()) cands.emplace_back(k, ds);
        }
        if (cands.empty()) return f;
        const auto& [k, ds] = cands[rng() % cands.size()];
        const int i = ds[rng() % ds.size()];
        const ResidueElem a = f.terms().at(k);
        f = f - gens[i].mul_term(mono_sub(key_u(k), leads[i]), key_s(k), a / lcs[i]);
    }
    throw error(errc::no_convergence, "naive reduction did not terminate");
}

inline ResidueElem random_coeff(std::mt19937_64& g, const KappaCtx& k) {
    ResidueElem r = ResidueElem::from_int(static_cast<int>(g() % k.p), k);
    if (k.m > 0 && g() % 3 == 0) r = r + ResidueElem::var(0, k) * ResidueElem::from_int(1 + static_cast<int>(g() % (k.p - 1)), k);
    return r;
}

// a generator with S-free lead u^lead (monic) plus lower terms
inline KappaSeries random_generator(std::mt19937_64& g, const KappaCtx& k, int n, const Mono& lead, int prec) {
    KappaSeries f(k, n, prec);
    f.add(lead, 0, ResidueElem::from_int(1, k));
    const int extra = 1 + static_cast<int>(g() % 3);
    for (int t = 0; t < extra; ++t) {
        Mono u(n, 0);
        for (int i = 0; i < n; ++i) u[i] = static_cast<int>(g() % 3);
        int j = 1 + static_cast<int>(g() % 3);
        if (u < lead) j = static_cast<int>(g() % 2);  // same S level allowed only below the lead
        if (u == lead) j = std::max(j, 1);
        f.add(u, j, random_coeff(g, k));
    }
    return f;
}

inline KappaSeries random_series(std::mt19937_64& g, const KappaCtx& k, int n, int prec, int terms = 5) {
    KappaSeries f(k, n, prec);
    for (int t = 0; t < terms; ++t) {
        Mono u(n, 0);
        for (int i = 0; i < n; ++i) u[i] = static_cast<int>(g() % 4);
        f.add(u, static_cast<int>(g() % 5) - 1, random_coeff(g, k));
    }
    return f;
}

// ---------------------------------------------------------------- thickened spectral norm

// v(N_j) at radius c for a rank-one AS module whose coefficients are monomials in b
inline Rational rank_one_vn(const ASWData& f, int j, const Rational& c) {
    const int p = f.k.p;
    std::optional<Rational> best;
    auto take = [&](Rational v) {
        if (!best || v < *best) best = v;
    };
    for (const auto& [e, a] : f.terms) {
        if (e >= 0) continue;
        const int i = -e;
        if (j == 0) {
            take(Rational(vp(i, p)) - Rational(i + 1) * c);
            continue;
        }
        for (const auto& [m, x] : a.num().terms())
            if (m[j - 1] != 0) take(Rational(vp(m[j - 1], p)) - Rational(i) * c);
    }
    const Rational b(1, p - 1);
    return best ? b + *best : Rational(1 << 20);
}

// min(intrinsic bound, v(N_j), level threshold) on the nonlog thickening of level a
inline Rational thick_formula(const ASWData& f, int j, const Rational& a, const Rational& c) {
    const Rational b(1, f.k.p - 1);
    return std::min({j == 0 ? b - c : b, rank_one_vn(f, j, c), b - a * c});
}

}  // namespace oracle
