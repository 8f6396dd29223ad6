#pragma once

#include <boost/rational.hpp>

#include <compare>
#include <cstdint>
#include <string>

#include "error.hpp"

namespace diffcond {

using Rational = boost::rational<std::int64_t>;

inline std::string to_string(const Rational& q) {
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

// accepts "n", "-n", "n/d"
inline Rational parse_rational(const std::string& s) {
    auto bad = [&] { return error(errc::parse_error, "bad rational '" + s + "'"); };
    auto to_int = [&](const std::string& t) -> std::int64_t {
        if (t.empty()) throw bad();
        std::size_t pos = 0;
        std::int64_t v = 0;
        try {
            v = std::stoll(t, &pos);
        } catch (...) {
            throw bad();
        }
        if (pos != t.size()) throw bad();
        return v;
    };
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(to_int(s));
    std::int64_t d = to_int(s.substr(slash + 1));
    if (d == 0) throw bad();
    return Rational(to_int(s.substr(0, slash)), d);
}

// A valuation: a rational or +infinity.
class Val {
public:
    Val() : inf_(true) {}
    Val(const Rational& q) : inf_(false), q_(q) {}
    Val(std::int64_t n) : inf_(false), q_(n) {}

    static Val infinity() { return Val(); }

    bool is_inf() const { return inf_; }
    const Rational& value() const {
        if (inf_) throw error(errc::uncertified_value, "infinite valuation has no finite value");
        return q_;
    }

    friend bool operator==(const Val& a, const Val& b) {
        return a.inf_ == b.inf_ && (a.inf_ || a.q_ == b.q_);
    }
    friend std::strong_ordering operator<=>(const Val& a, const Val& b) {
        if (a.inf_ || b.inf_) return (a.inf_ ? 1 : 0) <=> (b.inf_ ? 1 : 0);
        if (a.q_ < b.q_) return std::strong_ordering::less;
        if (b.q_ < a.q_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
    friend Val operator+(const Val& a, const Val& b) {
        if (a.inf_ || b.inf_) return Val();
        return Val(a.q_ + b.q_);
    }

    std::string str() const { return inf_ ? std::string("inf") : to_string(q_); }

private:
    bool inf_;
    Rational q_;
};

inline Val min(const Val& a, const Val& b) { return a < b ? a : b; }
inline Val max(const Val& a, const Val& b) { return a < b ? b : a; }

}  // namespace diffcond
