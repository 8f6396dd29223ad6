#pragma once

#include <string>
#include <vector>

#include "aswdata.hpp"
#include "cohen.hpp"
#include "diffmod.hpp"
#include "error.hpp"
#include "series.hpp"

namespace diffcond {

struct ASReduction {
    ASWData reduced;
    ASWData witness;  // g with g^p - g = input - reduced (mod s^trunc)
    int trunc = 64;
};

// g^p - g, dropping exponents >= trunc
inline ASWData wp(const ASWData& g, int trunc) {
    ASWData r(g.k);
    for (const auto& [e, a] : g.terms) {
        if (static_cast<long>(e) * g.k.p < trunc) r.add(e * g.k.p, a.pow(g.k.p));
        if (e < trunc) r.add(e, -a);
    }
    return r;
}

inline ASReduction as_reduce(const ASWData& f, int trunc = 64) {
    ASReduction out{f, ASWData(f.k), trunc};
    ASWData& r = out.reduced;
    const int p = f.k.p;
    for (int i = r.top(); i >= 1; --i) {
        if (i % p != 0) continue;
        const ResidueElem a = r.coeff(-i);
        if (a.is_zero() || !a.is_pth_power()) continue;
        const ResidueElem root = a.pth_root();
        r.add(-i, -a);
        r.add(-i / p, root);
        out.witness.add(-i / p, root);
    }
    std::vector<std::pair<int, ResidueElem>> pos;
    for (const auto& [e, a] : r.terms)
        if (e > 0) pos.emplace_back(e, a);
    for (const auto& [e, a] : pos) {
        r.add(e, -a);
        long ex = e;
        ResidueElem ap = a;
        while (ex < trunc) {
            out.witness.add(static_cast<int>(ex), -ap);
            ex *= p;
            ap = ap.pow(p);
        }
    }
    return out;
}

inline bool verify_witness(const ASWData& input, const ASReduction& red) {
    ASWData lhs = wp(red.witness, red.trunc);
    ASWData rhs = input - red.reduced;
    ASWData d = lhs - rhs;
    for (const auto& [e, a] : d.terms)
        if (e < red.trunc) return false;
    return true;
}

inline RobbaElem lift_datum(const ASWData& f, const CohenCtx& c, Window w = {}) {
    RobbaElem F(c, w);
    for (const auto& [e, a] : f.terms) F = F + RobbaElem::monomial(CohenElem::lift(a, c), e, w);
    return F;
}

// N_j = pi * d_j(F) for the Teichmuller-free lift F of f
inline DiffModule as_module(const ASWData& f, const CohenCtx& c, Window w = {}) {
    if (!(f.k == c.kappa)) throw error(errc::context_mismatch, "datum and coefficient field differ");
    const RobbaElem F = lift_datum(f, c, w);
    const CohenElem pi = CohenElem::pi(c);
    std::vector<RobbaElem> entries;
    for (int j = 0; j <= c.m(); ++j) entries.push_back(F.derive(j).scale(pi));
    return rank_one_module(entries, f, "AS(" + f.str() + ")");
}

// Kato: Swan conductor of a reduced p-cyclic character is its top pole order
inline int kato_swan(const ASWData& f) {
    if (!f.is_reduced()) throw error(errc::not_reduced, "kato_swan needs a reduced datum");
    int top = 0;
    for (const auto& [e, a] : f.terms)
        if (e < 0 && !a.is_zero()) top = std::max(top, -e);
    return top;
}

inline int kato_artin(const ASWData& f) {
    const int sw = kato_swan(f);
    if (sw == 0) return 0;
    return sw % f.k.p == 0 ? sw : sw + 1;
}

// perfect residue field F_p: reduced means no pole order divisible by p
inline int classical_swan_perfect(const ASWData& f) {
    if (f.k.m != 0) throw error(errc::context_mismatch, "classical formula needs a perfect residue field");
    int top = 0;
    for (const auto& [e, a] : f.terms) {
        if (e > 0) throw error(errc::not_reduced, "positive powers are not reduced");
        if (e < 0 && (-e) % f.k.p == 0) throw error(errc::not_reduced, "pole order divisible by p");
        if (e < 0) top = std::max(top, -e);
    }
    return top;
}

// ---------------------------------------------------------------- presentations

enum class PresentationTemplate { eisenstein, fierce, product };

inline std::string template_name(PresentationTemplate t) {
    switch (t) {
        case PresentationTemplate::eisenstein: return "eisenstein";
        case PresentationTemplate::fierce: return "fierce";
        case PresentationTemplate::product: return "product";
    }
    return "?";
}

inline PresentationTemplate parse_template(const std::string& s) {
    if (s == "eisenstein" || s == "i") return PresentationTemplate::eisenstein;
    if (s == "fierce" || s == "ii") return PresentationTemplate::fierce;
    if (s == "product" || s == "iii") return PresentationTemplate::product;
    throw error(errc::unsupported_template, "unknown presentation template '" + s + "'");
}

// Relations in variables [S, B, U_0, U_1] (m = 1), integer coefficients mod p^N.
struct Presentation {
    PresentationTemplate kind = PresentationTemplate::eisenstein;
    int p = 3;
    int N = 3;
    int e = 1;
    std::vector<int> r;          // inseparability exponents r_1..r_m
    std::vector<Poly<PiInt>> P;  // lifted relations P_0..P_m
    std::vector<FpPoly> rel;     // relations mod p

    static constexpr int nvars = 4;
    static constexpr int vS = 0, vB = 1, vU0 = 2, vU1 = 3;

    std::string str(int h) const { return rel[h].str({"s", "b", "u0", "u1"}); }
};

namespace detail {

inline Poly<PiInt> zterm(std::int64_t c, std::vector<int> e, const PiCtx& pc) {
    Poly<PiInt> r(pc, Presentation::nvars);
    r.add_term(e, PiInt(pc, c));
    return r;
}

inline FpPoly reduce_zpoly(const Poly<PiInt>& f, int p) {
    FpPoly r(p, f.nvars());
    for (const auto& [m, c] : f.terms()) r.add_term(m, Fp(p, c.residue()));
    return r;
}

}  // namespace detail

inline Presentation standard_presentation(PresentationTemplate t, int p, int N = 3) {
    if (!is_prime(p)) throw error(errc::parse_error, "p must be prime");
    Presentation pr;
    pr.kind = t;
    pr.p = p;
    pr.N = N;
    const PiCtx pc(p, N);
    using detail::zterm;
    const bool eis = t != PresentationTemplate::fierce;
    const bool fierce = t != PresentationTemplate::eisenstein;
    Poly<PiInt> P0 = eis ? zterm(1, {0, 0, p, 0}, pc) + zterm(-1, {p - 1, 0, 1, 0}, pc) + zterm(-1, {1, 0, 0, 0}, pc)
                         : zterm(1, {0, 0, 1, 0}, pc) + zterm(-1, {1, 0, 0, 0}, pc);
    Poly<PiInt> P1 = fierce ? zterm(1, {0, 0, 0, p}, pc) + zterm(-1, {0, 1, 0, 0}, pc)
                            : zterm(1, {0, 0, 0, 1}, pc) + zterm(-1, {0, 1, 0, 0}, pc);
    pr.e = eis ? p : 1;
    pr.r = {fierce ? 1 : 0};
    pr.P = {P0, P1};
    for (const auto& P : pr.P) pr.rel.push_back(detail::reduce_zpoly(P, p));
    return pr;
}

// p_0 in u_0^e - d s + (u_0 s, s^2) with d a unit; p_j in u_j^{p^r} - b_j + (u_0, s); P_h = p_h mod p
inline bool check_presentation(const Presentation& pr) {
    const int p = pr.p;
    const FpPoly& p0 = pr.rel[0];
    bool has_lead = false, has_s = false;
    for (const auto& [m, c] : p0.terms()) {
        const int eS = m[0], eB = m[1], eU0 = m[2], eU1 = m[3];
        if (eB == 0 && eU1 == 0 && eS == 0 && eU0 == pr.e) {
            has_lead = c.is_one();
            continue;
        }
        if (eS == 1 && eU0 == 0 && eB == 0 && eU1 == 0) {
            has_s = !c.is_zero();
            continue;
        }
        if ((eS >= 1 && eU0 >= 1) || eS >= 2) continue;
        return false;
    }
    if (!has_lead || !has_s) return false;
    for (std::size_t j = 1; j < pr.rel.size(); ++j) {
        const int q = static_cast<int>(ipow(p, pr.r[j - 1]));
        bool lead = false, b = false;
        for (const auto& [m, c] : pr.rel[j].terms()) {
            if (m[0] == 0 && m[1] == 0 && m[2] == 0 && m[3] == q) {
                lead = c.is_one();
                continue;
            }
            if (m[0] == 0 && m[1] == 1 && m[2] == 0 && m[3] == 0) {
                b = Fp(p, -1) == c;
                continue;
            }
            if (m[0] >= 1 || m[2] >= 1) continue;
            return false;
        }
        if (!lead || !b) return false;
    }
    for (std::size_t h = 0; h < pr.P.size(); ++h)
        if (!(detail::reduce_zpoly(pr.P[h], p) == pr.rel[h])) return false;
    return true;
}

}  // namespace diffcond
