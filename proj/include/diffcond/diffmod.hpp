#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aswdata.hpp"
#include "error.hpp"
#include "rational.hpp"
#include "series.hpp"

namespace diffcond {

// r x r matrix of series, row-major
class Matrix {
public:
    Matrix() = default;
    Matrix(const CohenCtx& c, int r, Window w = {}) : r_(r), e_(static_cast<std::size_t>(r * r), RobbaElem(c, w)) {}

    static Matrix scalar(const RobbaElem& a) {
        Matrix m(a.ctx(), 1, a.window());
        m.at(0, 0) = a;
        return m;
    }

    int rank() const { return r_; }
    RobbaElem& at(int i, int k) { return e_[static_cast<std::size_t>(i * r_ + k)]; }
    const RobbaElem& at(int i, int k) const { return e_[static_cast<std::size_t>(i * r_ + k)]; }

    Matrix operator+(const Matrix& o) const {
        Matrix m(*this);
        for (std::size_t i = 0; i < e_.size(); ++i) m.e_[i] = e_[i] + o.e_[i];
        return m;
    }
    Matrix operator-(const Matrix& o) const {
        Matrix m(*this);
        for (std::size_t i = 0; i < e_.size(); ++i) m.e_[i] = e_[i] - o.e_[i];
        return m;
    }
    Matrix operator*(const Matrix& o) const {
        Matrix m(*this);
        for (int i = 0; i < r_; ++i)
            for (int k = 0; k < r_; ++k) {
                RobbaElem acc(at(0, 0).ctx(), at(0, 0).window());
                for (int l = 0; l < r_; ++l)
                    if (!at(i, l).is_exact_zero() && !o.at(l, k).is_exact_zero()) acc = acc + at(i, l) * o.at(l, k);
                m.at(i, k) = acc;
            }
        return m;
    }
    template <class F>
    Matrix map(F f) const {
        Matrix m(*this);
        for (auto& x : m.e_) x = f(x);
        return m;
    }
    Matrix derive(int j) const {
        return map([j](const RobbaElem& x) { return x.derive(j); });
    }
    bool is_zero() const {
        return std::all_of(e_.begin(), e_.end(), [](const RobbaElem& x) { return x.is_zero(); });
    }
    GaussVal gauss_valuation(const Rational& c) const {
        GaussVal g{Val::infinity(), true};
        for (const auto& x : e_) {
            if (x.is_exact_zero()) continue;
            GaussVal v = x.gauss_valuation(c);
            g.value = min(g.value, v.value);
            g.certified = g.certified && v.certified;
        }
        return g;
    }
    Matrix sub(const std::vector<int>& idx) const {
        Matrix m(at(0, 0).ctx(), static_cast<int>(idx.size()), at(0, 0).window());
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t k = 0; k < idx.size(); ++k) m.at(static_cast<int>(i), static_cast<int>(k)) = at(idx[i], idx[k]);
        return m;
    }

private:
    int r_ = 0;
    std::vector<RobbaElem> e_;
};

// A summand with known provenance; conductors are read off piece by piece.
struct Piece {
    std::vector<int> idx;
    bool unramified = false;
    bool certified = false;
    std::optional<ASWData> datum;
    std::string tag;
};

struct DiffModule {
    CohenCtx ctx;
    int rank = 1;
    std::vector<Matrix> N;         // N[0] for d/dS, N[j] for d/dB_j
    std::vector<bool> tracked;     // operators counted in the generic radius
    std::vector<Piece> pieces;
    std::string tag;

    int m() const { return ctx.m(); }
    int p() const { return ctx.p(); }
};

inline Rational base_intercept(int p) { return Rational(1, p - 1); }

// valuation form of the base operator norm of d_j at radius c
inline Rational base_val(int p, int j, const Rational& c) { return j == 0 ? base_intercept(p) - c : base_intercept(p); }

inline DiffModule trivial_module(const CohenCtx& c, int rank = 1, Window w = {}) {
    DiffModule M;
    M.ctx = c;
    M.rank = rank;
    M.N.assign(static_cast<std::size_t>(c.m() + 1), Matrix(c, rank, w));
    M.tracked.assign(static_cast<std::size_t>(c.m() + 1), true);
    for (int i = 0; i < rank; ++i) {
        Piece pc;
        pc.idx = {i};
        pc.unramified = true;
        pc.certified = true;
        pc.tag = "trivial";
        M.pieces.push_back(pc);
    }
    M.tag = "trivial";
    return M;
}

// rank one from explicit entries; `datum` is the Artin-Schreier class they come from
inline DiffModule rank_one_module(const std::vector<RobbaElem>& entries, const std::optional<ASWData>& datum,
                                  const std::string& tag) {
    if (entries.empty()) throw error(errc::context_mismatch, "rank one module needs operator entries");
    DiffModule M;
    M.ctx = entries.front().ctx();
    M.rank = 1;
    for (const auto& e : entries) M.N.push_back(Matrix::scalar(e));
    M.tracked.assign(entries.size(), true);
    Piece pc;
    pc.idx = {0};
    pc.datum = datum;
    if (datum) {
        pc.unramified = datum->top() == 0;
        pc.certified = datum->top_reduced();
    }
    pc.tag = tag;
    M.pieces.push_back(pc);
    M.tag = tag;
    return M;
}

inline bool check_integrability(const DiffModule& M) {
    const int n = static_cast<int>(M.N.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Matrix defect = M.N[j].derive(i) - M.N[i].derive(j) + M.N[i] * M.N[j] - M.N[j] * M.N[i];
            if (!defect.is_zero()) return false;
        }
    return true;
}

// ---------------------------------------------------------------- spectral data

struct SpectralVal {
    Rational value;
    bool exact = false;  // false: upper estimate at n_max
};

// min over n <= n_max of v(D_n, c)/n, D_1 = N_j, D_{n+1} = d_j(D_n) + D_n N_j
inline Val dn_estimate(const Matrix& Nj, int j, const Rational& c, int n_max) {
    Val best = Val::infinity();
    Matrix D = Nj;
    for (int n = 1; n <= n_max; ++n) {
        GaussVal g = D.gauss_valuation(c);
        if (!g.certified) throw error(errc::precision_exhausted, "iterated derivative left the S-window");
        if (!g.value.is_inf()) best = min(best, Val(g.value.value() / n));
        if (n < n_max) D = D.derive(j) + D * Nj;
    }
    return best;
}

inline SpectralVal spectral_valuation(const DiffModule& M, int j, const Rational& c, int n_max = 12) {
    if (c <= 0) throw error(errc::radius_out_of_range, "spectral valuation needs c > 0");
    const Rational base = base_val(M.p(), j, c);
    const bool split = std::all_of(M.pieces.begin(), M.pieces.end(), [](const Piece& pc) { return pc.idx.size() == 1; });
    if (M.rank == 1 || (split && !M.pieces.empty())) {
        Rational v = base;
        for (int i = 0; i < M.rank; ++i) {
            const RobbaElem& e = M.N[j].at(i, i);
            if (e.is_exact_zero()) continue;
            GaussVal g = e.gauss_valuation(c);
            // an uncertified value is still a lower bound; harmless once it clears the base value
            if (!g.certified && g.value.value() < base)
                throw error(errc::precision_exhausted, "connection entry not certified at this radius");
            if (g.certified && !g.value.is_inf()) v = std::min(v, g.value.value());
        }
        return {v, true};
    }
    Val v = dn_estimate(M.N[j], j, c, n_max);
    if (v.is_inf()) return {base, false};
    return {std::min(base, v.value()), false};
}

// v(T) or v(T_log) at c from per-operator spectral valuations
inline Rational radius_from_spectral(const DiffModule& M, const std::vector<SpectralVal>& sp, const Rational& c,
                                     bool log) {
    std::optional<Rational> best;
    for (std::size_t j = 0; j < sp.size(); ++j) {
        if (!M.tracked[j]) continue;
        Rational t = base_intercept(M.p()) - sp[j].value;
        if (log && j == 0) t -= c;
        best = best ? std::max(*best, t) : t;
    }
    return *best;
}

inline Rational generic_radius(const DiffModule& M, const Rational& c, bool log, int n_max = 12) {
    std::vector<SpectralVal> sp;
    for (std::size_t j = 0; j < M.N.size(); ++j) sp.push_back(spectral_valuation(M, static_cast<int>(j), c, n_max));
    return radius_from_spectral(M, sp, c, log);
}

namespace detail {

// a germ line A + B c of v(T_j) near c = 0 with a validity bound
struct Germ {
    Rational A, B;
    std::optional<Rational> c_max;
};

inline bool germ_greater(const Germ& x, const Germ& y) { return x.A > y.A || (x.A == y.A && x.B > y.B); }
inline bool germ_equal(const Germ& x, const Germ& y) { return x.A == y.A && x.B == y.B; }

// germ of v(T_j) for one rank-one piece
inline Germ rank_one_germ(const DiffModule& M, const Matrix& Nj, int j, bool log) {
    const Rational bA = base_intercept(M.p());
    const Rational bB = j == 0 ? Rational(-1) : Rational(0);
    Rational A = bA, B = bB;
    std::optional<Rational> cmax;
    const RobbaElem& e = Nj.at(0, 0);
    if (e.is_zero()) {
        for (const auto& t : e.tail()) cmax = opt_min(cmax, crossing(bA, bB, t.A, t.B));
    } else {
        AffineVal ev = e.eventual_valuation();
        if (ev.A < bA || (ev.A == bA && ev.B < bB)) {
            A = ev.A;
            B = ev.B;
            cmax = opt_min(ev.c_max, crossing(ev.A, ev.B, bA, bB));
        } else {
            cmax = opt_min(crossing(bA, bB, ev.A, ev.B), ev.c_max);
        }
    }
    Germ g{bA - A, -B, cmax};
    if (log && j == 0) g.B -= 1;
    return g;
}

inline std::optional<Rational> germ_crossing(const Germ& top, const Germ& other) {
    // first c > 0 where `other` rises above `top`
    if (other.B <= top.B) return std::nullopt;
    Rational c = (top.A - other.A) / (other.B - top.B);
    if (c <= 0) return Rational(0);
    return c;
}

inline std::int64_t factorial(int r) {
    std::int64_t f = 1;
    for (int i = 2; i <= r; ++i) f *= i;
    return f;
}

}  // namespace detail

struct BreakData {
    Rational value;
    std::set<int> dominant;
    std::vector<Rational> per_piece;
    Rational c_cert;  // a radius where v(T) = value * c was verified
};

namespace detail {

inline DiffModule restrict_piece(const DiffModule& M, const Piece& pc) {
    DiffModule S;
    S.ctx = M.ctx;
    S.rank = static_cast<int>(pc.idx.size());
    for (const auto& n : M.N) S.N.push_back(n.sub(pc.idx));
    S.tracked = M.tracked;
    return S;
}

// numeric slope for pieces without a closed form: sample at c and c/2
inline std::vector<Germ> sampled_germs(const DiffModule& S, bool log, int n_max) {
    const Rational c1(1, 64), c2(1, 128);
    std::vector<Germ> out;
    for (std::size_t j = 0; j < S.N.size(); ++j) {
        Rational v1 = spectral_valuation(S, static_cast<int>(j), c1, n_max).value;
        Rational v2 = spectral_valuation(S, static_cast<int>(j), c2, n_max).value;
        Rational t1 = base_intercept(S.p()) - v1 - (log && j == 0 ? c1 : Rational(0));
        Rational t2 = base_intercept(S.p()) - v2 - (log && j == 0 ? c2 : Rational(0));
        Rational B = (t1 - t2) / (c1 - c2);
        out.push_back(Germ{t1 - B * c1, B, std::nullopt});
    }
    return out;
}

}  // namespace detail

// slope b of v(T) (or v(T_log)) = b c near c = 0, with the dominant operators
inline BreakData break_data(const DiffModule& M, bool log, int n_max = 12) {
    const std::size_t nops = M.N.size();
    std::vector<std::optional<detail::Germ>> best(nops);
    std::vector<std::vector<detail::Germ>> piece_germs;
    for (const auto& pc : M.pieces) {
        std::vector<detail::Germ> gs;
        if (pc.idx.size() == 1) {
            for (std::size_t j = 0; j < nops; ++j)
                gs.push_back(detail::rank_one_germ(M, M.N[j].sub(pc.idx), static_cast<int>(j), log));
        } else {
            gs = detail::sampled_germs(detail::restrict_piece(M, pc), log, n_max);
        }
        piece_germs.push_back(gs);
        for (std::size_t j = 0; j < nops; ++j)
            if (!best[j] || detail::germ_greater(gs[j], *best[j])) best[j] = gs[j];
    }
    BreakData out;
    std::optional<detail::Germ> top;
    for (std::size_t j = 0; j < nops; ++j)
        if (M.tracked[j] && (!top || detail::germ_greater(*best[j], *top))) top = best[j];
    if (top->A != Rational(0)) throw error(errc::not_eventually_linear, "generic radius has a nonzero constant term");
    for (std::size_t j = 0; j < nops; ++j)
        if (M.tracked[j] && detail::germ_equal(*best[j], *top)) out.dominant.insert(static_cast<int>(j));
    out.value = top->B;
    for (const auto& gs : piece_germs) {
        std::optional<detail::Germ> t;
        for (std::size_t j = 0; j < nops; ++j)
            if (M.tracked[j] && (!t || detail::germ_greater(gs[j], *t))) t = gs[j];
        if (t->A != Rational(0)) throw error(errc::not_eventually_linear, "piece radius has a nonzero constant term");
        out.per_piece.push_back(t->B);
    }

    // certified range: below every validity bound and every crossing with the top germ
    std::optional<Rational> c0;
    for (const auto& gs : piece_germs)
        for (std::size_t j = 0; j < nops; ++j) {
            if (!M.tracked[j]) continue;
            c0 = opt_min(c0, gs[j].c_max);
            if (!detail::germ_equal(gs[j], *top)) c0 = opt_min(c0, detail::germ_crossing(*top, gs[j]));
        }
    Rational c = c0 ? *c0 / 2 : Rational(1, 2);
    if (c <= 0) throw error(errc::not_eventually_linear, "no certified radius range");
    out.c_cert = c;
    if (std::all_of(M.pieces.begin(), M.pieces.end(), [](const Piece& pc) { return pc.idx.size() == 1; })) {
        for (const Rational& cs : {c, c / 2}) {
            Rational v = generic_radius(M, cs, log, n_max);
            if (v != out.value * cs)
                throw error(errc::not_eventually_linear,
                            "sampled radius " + to_string(v) + " disagrees with slope " + to_string(out.value));
        }
    }
    const std::int64_t rf = detail::factorial(std::min(M.rank, 20));
    if (rf % out.value.denominator() != 0)
        throw error(errc::not_eventually_linear, "break denominator does not divide rank!");
    return out;
}

inline Rational diff_break(const DiffModule& M, bool log, int n_max = 12) { return break_data(M, log, n_max).value; }

inline std::set<int> dominant_ops(const DiffModule& M, bool log, int n_max = 12) {
    return break_data(M, log, n_max).dominant;
}

// ---------------------------------------------------------------- constructions

inline DiffModule rotate(const DiffModule& M, int j, bool mutate_sign = false) {
    if (j < 1 || j > M.m()) throw error(errc::context_mismatch, "rotation index out of range");
    const CohenElem one = CohenElem::from_int(1, M.ctx);
    auto g = [&](const Matrix& x) { return x.map([&](const RobbaElem& e) { return e.substitute_shift(j - 1, one); }); };
    DiffModule R = M;
    for (std::size_t i = 0; i < M.N.size(); ++i) R.N[i] = g(M.N[i]);
    R.N[0] = mutate_sign ? R.N[0] - R.N[j] : R.N[0] + R.N[j];
    const ResidueElem t = ResidueElem::from_int(1, M.ctx.kappa);
    for (auto& pc : R.pieces)
        if (pc.datum) pc.datum = substitute_shift(*pc.datum, j - 1, t, M.ctx.kappa);
    R.tag = "rotate(" + M.tag + ", " + std::to_string(j) + ")";
    return R;
}

inline CohenCtx extended_ctx(const CohenCtx& c, const std::string& name) {
    std::vector<std::string> names = c.kappa.names;
    names.push_back(name);
    return CohenCtx(c.p(), c.N(), KappaCtx(c.p(), names));
}

// B_j -> B_j + X S with a fresh variable X; d/dB_j leaves the tracked set
inline DiffModule add_generic_variable(const DiffModule& M, int j) {
    if (j < 1 || j > M.m()) throw error(errc::context_mismatch, "generic variable index out of range");
    const CohenCtx c2 = extended_ctx(M.ctx, "x" + std::to_string(j));
    const int xi = c2.m() - 1;
    const CohenElem X = CohenElem::var(xi, c2);
    auto f = [&](const Matrix& x) {
        return x.map([&](const RobbaElem& e) {
            return e.map_coeffs(c2, [&](const CohenElem& a) { return a.extend(c2); }).substitute_shift(j - 1, X);
        });
    };
    DiffModule R;
    R.ctx = c2;
    R.rank = M.rank;
    for (const auto& n : M.N) R.N.push_back(f(n));
    const Matrix Nj = R.N[j];
    R.N[0] = R.N[0] + Nj.map([&](const RobbaElem& e) { return e.scale(X); });
    R.N.push_back(Nj.map([](const RobbaElem& e) { return e.shift(1); }));
    R.tracked = M.tracked;
    R.tracked.push_back(true);
    R.tracked[j] = false;
    R.pieces = M.pieces;
    const ResidueElem xr = ResidueElem::var(xi, c2.kappa);
    for (auto& pc : R.pieces)
        if (pc.datum) {
            ASWData d = substitute_shift(*pc.datum, j - 1, xr, c2.kappa);
            d.basis[j - 1] = false;
            pc.datum = d;
            pc.certified = pc.certified && d.top_reduced();
        }
    R.tag = "generic(" + M.tag + ", " + std::to_string(j) + ")";
    return R;
}

enum class CombineKind { direct_sum, tensor };

inline DiffModule combine(const DiffModule& A, const DiffModule& B, CombineKind kind) {
    if (!(A.ctx == B.ctx) || A.N.size() != B.N.size()) throw error(errc::context_mismatch, "modules over different fields");
    DiffModule R;
    R.ctx = A.ctx;
    R.tracked = A.tracked;
    for (std::size_t j = 0; j < R.tracked.size(); ++j) R.tracked[j] = A.tracked[j] && B.tracked[j];
    const Window w = A.N[0].at(0, 0).window();
    if (kind == CombineKind::direct_sum) {
        R.rank = A.rank + B.rank;
        for (std::size_t j = 0; j < A.N.size(); ++j) {
            Matrix m(A.ctx, R.rank, w);
            for (int i = 0; i < A.rank; ++i)
                for (int k = 0; k < A.rank; ++k) m.at(i, k) = A.N[j].at(i, k);
            for (int i = 0; i < B.rank; ++i)
                for (int k = 0; k < B.rank; ++k) m.at(A.rank + i, A.rank + k) = B.N[j].at(i, k);
            R.N.push_back(m);
        }
        R.pieces = A.pieces;
        for (auto pc : B.pieces) {
            for (int& i : pc.idx) i += A.rank;
            R.pieces.push_back(pc);
        }
        R.tag = "(" + A.tag + " + " + B.tag + ")";
        return R;
    }
    R.rank = A.rank * B.rank;
    for (std::size_t j = 0; j < A.N.size(); ++j) {
        Matrix m(A.ctx, R.rank, w);
        for (int i1 = 0; i1 < A.rank; ++i1)
            for (int i2 = 0; i2 < B.rank; ++i2)
                for (int k1 = 0; k1 < A.rank; ++k1)
                    for (int k2 = 0; k2 < B.rank; ++k2) {
                        RobbaElem e = m.at(i1 * B.rank + i2, k1 * B.rank + k2);
                        if (i2 == k2) e = e + A.N[j].at(i1, k1);
                        if (i1 == k1) e = e + B.N[j].at(i2, k2);
                        m.at(i1 * B.rank + i2, k1 * B.rank + k2) = e;
                    }
        R.N.push_back(m);
    }
    for (const auto& pa : A.pieces)
        for (const auto& pb : B.pieces) {
            Piece pc;
            for (int ia : pa.idx)
                for (int ib : pb.idx) pc.idx.push_back(ia * B.rank + ib);
            pc.tag = pa.tag + "*" + pb.tag;
            if (pa.unramified && pb.unramified) {
                pc.unramified = true;
                pc.certified = pa.certified && pb.certified;
                if (pa.datum && pb.datum) pc.datum = *pa.datum + *pb.datum;
            } else if (pa.unramified && !pa.datum && pa.idx.size() == 1) {
                pc = Piece{pc.idx, pb.unramified, pb.certified, pb.datum, pc.tag};
            } else if (pb.unramified && !pb.datum && pb.idx.size() == 1) {
                pc = Piece{pc.idx, pa.unramified, pa.certified, pa.datum, pc.tag};
            } else if (pa.datum && pb.datum && pa.idx.size() == 1 && pb.idx.size() == 1) {
                ASWData f = *pa.datum + *pb.datum;
                pc.datum = f;
                pc.unramified = f.top() == 0;
                pc.certified = pa.certified && pb.certified && f.top_reduced();
            }
            R.pieces.push_back(pc);
        }
    R.tag = "(" + A.tag + " x " + B.tag + ")";
    return R;
}

struct Conductors {
    Rational artin;
    Rational swan;
};

inline Conductors conductors(const DiffModule& M, int n_max = 12) {
    Conductors out{Rational(0), Rational(0)};
    for (const auto& pc : M.pieces)
        if (!pc.certified)
            throw error(errc::unknown_decomposition, "piece '" + pc.tag + "' is not a certified summand");
    const BreakData nl = break_data(M, false, n_max);
    const BreakData lg = break_data(M, true, n_max);
    for (std::size_t i = 0; i < M.pieces.size(); ++i) {
        const Piece& pc = M.pieces[i];
        if (pc.unramified) continue;
        const auto r = static_cast<std::int64_t>(pc.idx.size());
        out.artin += nl.per_piece[i] * r;
        out.swan += lg.per_piece[i] * r;
    }
    return out;
}

}  // namespace diffcond
