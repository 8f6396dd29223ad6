#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cohen.hpp"
#include "error.hpp"
#include "rational.hpp"

namespace diffcond {

// c -> A + B*c, valid on (0, c_max]; c_max empty means +inf
struct AffineVal {
    Rational A;
    Rational B;
    std::optional<Rational> c_max;

    Rational at(const Rational& c) const { return A + B * c; }
    bool valid_at(const Rational& c) const { return c > 0 && (!c_max || c <= *c_max); }

    // order of the germ at c -> 0+
    friend bool germ_less(const AffineVal& x, const AffineVal& y) {
        return x.A < y.A || (x.A == y.A && x.B < y.B);
    }
    bool same_germ(const AffineVal& o) const { return A == o.A && B == o.B; }

    std::string str() const {
        return "(" + to_string(A) + ", " + to_string(B) + ", " + (c_max ? to_string(*c_max) : std::string("inf")) + ")";
    }
};

inline std::optional<Rational> opt_min(const std::optional<Rational>& a, const std::optional<Rational>& b) {
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
}

// first c > 0 where line y drops below line x (x below y near 0)
inline std::optional<Rational> crossing(const Rational& xA, const Rational& xB, const Rational& yA, const Rational& yB) {
    if (yB >= xB) return std::nullopt;
    Rational c = (yA - xA) / (xB - yB);
    if (c <= 0) return Rational(0);
    return c;
}

// Lower bound A + B*c valid for every c > 0.
struct Line {
    Rational A;
    Rational B;
    Rational at(const Rational& c) const { return A + B * c; }
    bool operator==(const Line& o) const { return A == o.A && B == o.B; }
};

inline void prune_lines(std::vector<Line>& ls) {
    std::vector<Line> out;
    for (const auto& l : ls) {
        bool dominated = false;
        for (const auto& o : ls)
            if (!(o == l) && o.A <= l.A && o.B <= l.B) dominated = true;
        if (!dominated && std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
    }
    std::sort(out.begin(), out.end(), [](const Line& a, const Line& b) { return a.A < b.A || (a.A == b.A && a.B < b.B); });
    ls.swap(out);
}

struct GaussVal {
    Val value;
    bool certified = true;
};

struct Window {
    int lo = -64;
    int hi = 64;
    bool operator==(const Window& o) const { return lo == o.lo && hi == o.hi; }
};

// Laurent polynomial in S over the Cohen coefficients, with a tail bound for omitted terms.
class RobbaElem {
public:
    using context = CohenCtx;

    RobbaElem() = default;
    RobbaElem(const CohenCtx& c, Window w = {}) : c_(c), w_(w) {}

    static RobbaElem from_int(std::int64_t n, const CohenCtx& c) { return constant(CohenElem::from_int(n, c)); }
    static RobbaElem constant(const CohenElem& a, Window w = {}) { return monomial(a, 0, w); }
    static RobbaElem monomial(const CohenElem& a, int k, Window w = {}) {
        RobbaElem r(a.ctx(), w);
        r.set_support(k);
        r.add_raw(k, a);
        r.window_drop();
        return r;
    }
    static RobbaElem S(const CohenCtx& c, int k, Window w = {}) {
        return monomial(CohenElem::from_int(1, c), k, w);
    }

    const CohenCtx& ctx() const { return c_; }
    const Window& window() const { return w_; }
    const std::map<int, CohenElem>& terms() const { return terms_; }
    const std::vector<Line>& tail() const { return tail_; }
    bool is_exact_zero() const { return terms_.empty() && tail_.empty(); }
    bool is_zero() const { return terms_.empty(); }  // zero at precision
    int min_exp() const { return terms_.empty() ? 0 : terms_.begin()->first; }
    int max_exp() const { return terms_.empty() ? 0 : terms_.rbegin()->first; }

    CohenElem coeff(int k) const {
        auto it = terms_.find(k);
        return it == terms_.end() ? CohenElem(c_) : it->second;
    }

    RobbaElem operator+(const RobbaElem& o) const {
        check(o);
        RobbaElem r(*this);
        for (const auto& [k, a] : o.terms_) r.add_raw(k, a);
        r.tail_.insert(r.tail_.end(), o.tail_.begin(), o.tail_.end());
        prune_lines(r.tail_);
        return r;
    }
    RobbaElem operator-() const {
        RobbaElem r(*this);
        for (auto& [k, a] : r.terms_) a = -a;
        return r;
    }
    RobbaElem operator-(const RobbaElem& o) const { return *this + (-o); }

    RobbaElem operator*(const RobbaElem& o) const {
        check(o);
        RobbaElem r(c_, w_);
        for (const auto& [k1, a1] : terms_)
            for (const auto& [k2, a2] : o.terms_) r.add_raw(k1 + k2, a1 * a2);
        if (!terms_.empty() && !o.terms_.empty())
            r.tail_.push_back(Line{Rational(c_.N()), Rational(terms_.begin()->first + o.terms_.begin()->first)});
        if (!tail_.empty() && !(o.is_exact_zero())) {
            Line lo = o.lower_line();
            for (const auto& t : tail_) r.tail_.push_back(Line{t.A + lo.A, t.B + lo.B});
        }
        if (!o.tail_.empty() && !is_exact_zero()) {
            Line lo = lower_line();
            for (const auto& t : o.tail_) r.tail_.push_back(Line{t.A + lo.A, t.B + lo.B});
        }
        r.window_drop();
        prune_lines(r.tail_);
        return r;
    }

    RobbaElem scale(const CohenElem& a) const {
        RobbaElem r(c_, w_);
        for (const auto& [k, b] : terms_) r.add_raw(k, b * a);
        Val v = a.valuation();
        if (!v.is_inf())
            for (const auto& t : tail_) r.tail_.push_back(Line{t.A + v.value(), t.B});
        if (!terms_.empty()) r.tail_.push_back(Line{Rational(c_.N()), Rational(terms_.begin()->first)});
        prune_lines(r.tail_);
        return r;
    }

    RobbaElem shift(int k) const {
        RobbaElem r(c_, w_);
        for (const auto& [e, a] : terms_) r.add_raw(e + k, a);
        for (const auto& t : tail_) r.tail_.push_back(Line{t.A, t.B + k});
        r.window_drop();
        prune_lines(r.tail_);
        return r;
    }

    // j = 0: d/dS ; j >= 1: d/dB_j
    RobbaElem derive(int j) const {
        RobbaElem r(c_, w_);
        if (j == 0) {
            for (const auto& [k, a] : terms_)
                if (k != 0) r.add_raw(k - 1, a.scale_int(k));
            for (const auto& t : tail_) r.tail_.push_back(Line{t.A, t.B - 1});
        } else {
            for (const auto& [k, a] : terms_) r.add_raw(k, a.derivative(j - 1));
            r.tail_ = tail_;
        }
        if (!terms_.empty()) r.tail_.push_back(Line{Rational(c_.N()), Rational(terms_.begin()->first - (j == 0 ? 1 : 0))});
        r.window_drop();
        prune_lines(r.tail_);
        return r;
    }

    Rational tail_at(const Rational& c) const {
        Rational best(0);
        bool any = false;
        for (const auto& t : tail_) {
            Rational v = t.at(c);
            if (!any || v < best) best = v;
            any = true;
        }
        if (!any) throw error(errc::uncertified_value, "no tail");
        return best;
    }

    GaussVal gauss_valuation(const Rational& c) const {
        if (c <= 0) throw error(errc::radius_out_of_range, "gauss valuation needs c > 0");
        Val v = Val::infinity();
        for (const auto& [k, a] : terms_) v = min(v, a.valuation() + Val(Rational(k) * c));
        if (tail_.empty()) return {v, true};
        Rational t = tail_at(c);
        if (v.is_inf()) return {Val(t), false};
        return {v, v.value() <= t};
    }

    AffineVal eventual_valuation() const {
        if (terms_.empty()) throw error(errc::zero_element, "eventual valuation of zero");
        bool first = true;
        Rational A, B;
        for (const auto& [k, a] : terms_) {
            Rational v = a.valuation().value();
            if (first || v < A || (v == A && Rational(k) < B)) {
                A = v;
                B = Rational(k);
            }
            first = false;
        }
        std::optional<Rational> cmax;
        for (const auto& [k, a] : terms_) {
            Rational v = a.valuation().value();
            if (v == A && Rational(k) == B) continue;
            cmax = opt_min(cmax, crossing(A, B, v, Rational(k)));
        }
        for (const auto& t : tail_) {
            if (t.A < A || (t.A == A && t.B <= B))
                throw error(errc::uncertified_leading_term, "tail bound does not dominate near c = 0");
            cmax = opt_min(cmax, crossing(A, B, t.A, t.B));
        }
        return AffineVal{A, B, cmax};
    }

    // a single line below the full valuation, valid for all c > 0
    Line lower_line() const {
        bool first = true;
        Line r{Rational(0), Rational(0)};
        auto take = [&](const Rational& a, const Rational& b) {
            if (first) {
                r = Line{a, b};
                first = false;
            } else {
                r.A = std::min(r.A, a);
                r.B = std::min(r.B, b);
            }
        };
        for (const auto& [k, a] : terms_) take(a.valuation().value(), Rational(k));
        for (const auto& t : tail_) take(t.A, t.B);
        return r;
    }

    // g*: B_j -> B_j + t*S with t = coefficient `t` (a Cohen element), j 0-based
    template <class T>
    RobbaElem substitute_shift(int j, const T& t) const {
        RobbaElem r(c_, w_);
        for (const auto& [k, a] : terms_) {
            const int D = std::max(0, w_.hi - k);
            auto tay = taylor_in(a, j, D);
            CohenElem tp = CohenElem::from_int(1, c_);
            for (int i = 0; i <= D; ++i) {
                if (!tay[i].is_zero()) r.add_raw(k + i, tay[i] * tp);
                tp = tp * t;
            }
            // omitted Taylor terms sit past the window
            Val v = a.valuation();
            if (!v.is_inf()) r.tail_.push_back(Line{v.value(), Rational(k + D + 1)});
        }
        for (const auto& l : tail_) r.tail_.push_back(l);
        if (!terms_.empty()) r.tail_.push_back(Line{Rational(c_.N()), Rational(terms_.begin()->first)});
        r.window_drop();
        prune_lines(r.tail_);
        return r;
    }

    RobbaElem map_coeffs(const CohenCtx& c2, const std::function<CohenElem(const CohenElem&)>& f) const {
        RobbaElem r(c2, w_);
        for (const auto& [k, a] : terms_) r.add_raw(k, f(a));
        r.tail_ = tail_;
        return r;
    }

    bool operator==(const RobbaElem& o) const {
        if (terms_.size() != o.terms_.size()) return false;
        auto it = o.terms_.begin();
        for (const auto& [k, a] : terms_) {
            if (k != it->first || !(a == it->second)) return false;
            ++it;
        }
        return true;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::string s;
        bool first = true;
        for (const auto& [k, a] : terms_) {
            if (!first) s += " + ";
            first = false;
            s += "(" + a.str() + ")";
            if (k != 0) s += "*S^" + std::to_string(k);
        }
        return s;
    }

    void add_raw(int k, const CohenElem& a) {
        if (a.is_zero()) return;
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(k, a);
        } else {
            it->second = it->second + a;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    void add_tail(const Line& l) {
        tail_.push_back(l);
        prune_lines(tail_);
    }

private:
    void check(const RobbaElem& o) const {
        if (!(c_ == o.c_)) throw error(errc::context_mismatch, "series contexts differ");
    }

    void set_support(int k) { tail_.push_back(Line{Rational(c_.N()), Rational(k)}); }

    // moves terms outside the window into the tail
    void window_drop() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (it->first < w_.lo || it->first > w_.hi) {
                tail_.push_back(Line{it->second.valuation().value(), Rational(it->first)});
                it = terms_.erase(it);
            } else {
                ++it;
            }
        }
    }

    CohenCtx c_;
    Window w_;
    std::map<int, CohenElem> terms_;
    std::vector<Line> tail_;
};

}  // namespace diffcond
