#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "error.hpp"
#include "rational.hpp"

namespace diffcond {

inline bool is_prime(int p) {
    if (p < 2) return false;
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

inline std::int64_t ipow(std::int64_t b, int e) {
    std::int64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

inline std::int64_t mod_norm(__int128 x, std::int64_t m) {
    x %= m;
    if (x < 0) x += m;
    return static_cast<std::int64_t>(x);
}

// Prime field element.
struct Fp {
    using context = int;

    int p = 2;
    int v = 0;

    Fp() = default;
    Fp(int p_, std::int64_t n) : p(p_), v(static_cast<int>(mod_norm(n, p_))) {}

    static Fp from_int(std::int64_t n, int p) { return Fp(p, n); }
    int ctx() const { return p; }
    bool is_zero() const { return v == 0; }
    bool is_one() const { return v == 1; }

    Fp operator+(const Fp& o) const { return Fp(p, v + o.v); }
    Fp operator-(const Fp& o) const { return Fp(p, v - o.v); }
    Fp operator*(const Fp& o) const { return Fp(p, static_cast<std::int64_t>(v) * o.v); }
    Fp operator-() const { return Fp(p, -v); }
    bool operator==(const Fp& o) const { return v == o.v; }

    Fp inv() const {
        if (v == 0) throw error(errc::division_by_zero, "inverse of 0 in F_p");
        Fp r(p, 1), b = *this;
        for (int e = p - 2; e > 0; e >>= 1) {
            if (e & 1) r = r * b;
            b = b * b;
        }
        return r;
    }

    std::string str() const { return std::to_string(v); }
};

constexpr int kMaxPiDegree = 10;  // supports p <= 11

struct PiCtx {
    int p = 2;
    int N = 8;
    std::int64_t mod = 256;

    PiCtx() = default;
    PiCtx(int p_, int N_) : p(p_), N(N_) {
        if (!is_prime(p_) || p_ > kMaxPiDegree + 1)
            throw error(errc::parse_error, "unsupported prime " + std::to_string(p_));
        if (N_ < 1) throw error(errc::parse_error, "p-adic precision must be >= 1");
        __int128 m = 1;
        for (int i = 0; i < N_; ++i) {
            m *= p_;
            if (m > (static_cast<__int128>(1) << 60))
                throw error(errc::parse_error, "p-adic precision too large: " + std::to_string(N_));
        }
        mod = static_cast<std::int64_t>(m);
    }
    int deg() const { return p - 1; }
    bool operator==(const PiCtx& o) const { return p == o.p && N == o.N; }
};

// Element of (Z/p^N)[pi]/(pi^{p-1} + p): coefficients a_0..a_{p-2} of powers of pi.
struct PiInt {
    using context = PiCtx;

    PiCtx c;
    std::array<std::int64_t, kMaxPiDegree> a{};

    PiInt() = default;
    explicit PiInt(const PiCtx& ctx) : c(ctx) {}
    PiInt(const PiCtx& ctx, std::int64_t n) : c(ctx) { a[0] = mod_norm(n, ctx.mod); }

    static PiInt from_int(std::int64_t n, const PiCtx& ctx) { return PiInt(ctx, n); }
    static PiInt pi_power(int k, const PiCtx& ctx) {
        PiInt r(ctx, 1);
        PiInt pi(ctx);
        if (ctx.deg() == 1) pi.a[0] = mod_norm(-ctx.p, ctx.mod);
        else pi.a[1] = 1;
        for (int i = 0; i < k; ++i) r = r * pi;
        return r;
    }

    const PiCtx& ctx() const { return c; }

    bool is_zero() const {
        for (int i = 0; i < c.deg(); ++i)
            if (a[i] != 0) return false;
        return true;
    }
    bool is_one() const {
        if (a[0] != 1) return false;
        for (int i = 1; i < c.deg(); ++i)
            if (a[i] != 0) return false;
        return true;
    }
    bool pi_free() const {
        for (int i = 1; i < c.deg(); ++i)
            if (a[i] != 0) return false;
        return true;
    }

    PiInt operator+(const PiInt& o) const {
        PiInt r(c);
        for (int i = 0; i < c.deg(); ++i) r.a[i] = mod_norm(static_cast<__int128>(a[i]) + o.a[i], c.mod);
        return r;
    }
    PiInt operator-(const PiInt& o) const {
        PiInt r(c);
        for (int i = 0; i < c.deg(); ++i) r.a[i] = mod_norm(static_cast<__int128>(a[i]) - o.a[i], c.mod);
        return r;
    }
    PiInt operator-() const {
        PiInt r(c);
        for (int i = 0; i < c.deg(); ++i) r.a[i] = mod_norm(-static_cast<__int128>(a[i]), c.mod);
        return r;
    }
    PiInt operator*(const PiInt& o) const {
        const int d = c.deg();
        std::array<__int128, 2 * kMaxPiDegree> acc{};
        for (int i = 0; i < d; ++i) {
            if (a[i] == 0) continue;
            for (int j = 0; j < d; ++j) acc[i + j] = (acc[i + j] + static_cast<__int128>(a[i]) * o.a[j]) % c.mod;
        }
        // pi^{p-1} = -p
        for (int k = 2 * d - 2; k >= d; --k) {
            acc[k - d] = (acc[k - d] - acc[k] % c.mod * c.p) % c.mod;
            acc[k] = 0;
        }
        PiInt r(c);
        for (int i = 0; i < d; ++i) r.a[i] = mod_norm(acc[i], c.mod);
        return r;
    }
    bool operator==(const PiInt& o) const {
        for (int i = 0; i < c.deg(); ++i)
            if (a[i] != o.a[i]) return false;
        return true;
    }

    static int vp(std::int64_t x, int p, int N) {
        if (x == 0) return N;
        int v = 0;
        while (x % p == 0) {
            x /= p;
            ++v;
        }
        return v;
    }

    // min_i v_p(a_i) + i/(p-1); +inf when zero at precision
    Val valuation() const {
        Val best = Val::infinity();
        for (int i = 0; i < c.deg(); ++i) {
            if (a[i] == 0) continue;
            best = min(best, Val(Rational(vp(a[i], c.p, c.N)) + Rational(i, c.deg())));
        }
        return best;
    }

    bool is_unit() const { return a[0] % c.p != 0; }

    PiInt inv() const {
        if (!is_unit()) throw error(errc::division_by_zero, "inverse of a non-unit in Z_p[pi]");
        PiInt x(c, Fp(c.p, a[0]).inv().v);
        PiInt two(c, 2);
        for (int k = 1; k < c.N * 2 + 2; k *= 2) x = x * (two - *this * x);
        x = x * (two - *this * x);
        return x;
    }

    int residue() const { return static_cast<int>(a[0] % c.p); }

    // residue of x / p^l, assuming valuation >= l
    int residue_after_shift(int l) const {
        std::int64_t x = a[0];
        for (int i = 0; i < l; ++i) {
            if (x % c.p != 0) throw error(errc::uncertified_value, "shift below valuation");
            x /= c.p;
        }
        return static_cast<int>(x % c.p);
    }

    std::string str() const {
        std::string s;
        bool any = false;
        for (int i = 0; i < c.deg(); ++i) {
            if (a[i] == 0) continue;
            if (any) s += "+";
            std::int64_t v = a[i];
            if (v > c.mod / 2) v -= c.mod;
            s += std::to_string(v);
            if (i > 0) s += "*pi" + (i > 1 ? "^" + std::to_string(i) : std::string());
            any = true;
        }
        return any ? s : "0";
    }
};

}  // namespace diffcond
