#pragma once

#include <cstdint>
#include <compare>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace wander {

/// Exact rational angle p/q on the circle T = R/Z, kept in canonical reduced
/// form 0 <= num < den, gcd(num, den) = 1. Arithmetic is exact; intermediate
/// products run through 128-bit integers and overflow raises AngleOverflow.
class CircleAngle {
public:
    CircleAngle() : num_(0), den_(1) {}

    CircleAngle(std::int64_t num, std::int64_t den) {
        if (den == 0) throw AngleOverflow("zero denominator");
        if (den < 0) { num = -num; den = -den; }
        num %= den;
        if (num < 0) num += den;
        const std::int64_t g = std::gcd(num, den);
        num_ = num / g;
        den_ = den / g;
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// Signed representative in (-1/2, 1/2], as a (num, den) pair.
    std::pair<std::int64_t, std::int64_t> signed_rep() const {
        if (2 * num_ > den_) return {num_ - den_, den_};
        return {num_, den_};
    }

    /// Image under the tripling map theta -> 3 theta mod 1.
    CircleAngle tripled() const {
        return CircleAngle(mul_check(3, num_) % den_, den_);
    }

    /// Image under n triplings.
    CircleAngle tripled(int n) const {
        CircleAngle t = *this;
        for (int i = 0; i < n; ++i) t = t.tripled();
        return t;
    }

    /// The preimage (theta + branch)/3 under tripling, branch in {0,1,2}.
    CircleAngle third(int branch) const {
        return CircleAngle(add_check(num_, mul_check(branch, den_)), mul_check(3, den_));
    }

    CircleAngle operator+(const CircleAngle& o) const {
        const std::int64_t g = std::gcd(den_, o.den_);
        const std::int64_t d = mul_check(den_ / g, o.den_);
        const std::int64_t n = add_check(mul_check(num_, o.den_ / g), mul_check(o.num_, den_ / g));
        return CircleAngle(n, d);
    }

    CircleAngle operator-(const CircleAngle& o) const {
        const std::int64_t g = std::gcd(den_, o.den_);
        const std::int64_t d = mul_check(den_ / g, o.den_);
        const std::int64_t n = sub_check(mul_check(num_, o.den_ / g), mul_check(o.num_, den_ / g));
        return CircleAngle(n, d);
    }

    bool operator==(const CircleAngle& o) const { return num_ == o.num_ && den_ == o.den_; }

    /// Order by position in [0,1).
    std::strong_ordering operator<=>(const CircleAngle& o) const {
        const __int128 l = static_cast<__int128>(num_) * o.den_;
        const __int128 r = static_cast<__int128>(o.num_) * den_;
        if (l < r) return std::strong_ordering::less;
        if (l > r) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

    /// Parse "p/q" (or a bare integer p, meaning p/1).
    static CircleAngle parse(const std::string& s) {
        const auto slash = s.find('/');
        if (slash == std::string::npos) return CircleAngle(std::stoll(s), 1);
        return CircleAngle(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    }

private:
    static std::int64_t mul_check(std::int64_t a, std::int64_t b) {
        const __int128 p = static_cast<__int128>(a) * b;
        if (p > INT64_MAX || p < INT64_MIN) throw AngleOverflow();
        return static_cast<std::int64_t>(p);
    }
    static std::int64_t add_check(std::int64_t a, std::int64_t b) {
        const __int128 p = static_cast<__int128>(a) + b;
        if (p > INT64_MAX || p < INT64_MIN) throw AngleOverflow();
        return static_cast<std::int64_t>(p);
    }
    static std::int64_t sub_check(std::int64_t a, std::int64_t b) {
        const __int128 p = static_cast<__int128>(a) - b;
        if (p > INT64_MAX || p < INT64_MIN) throw AngleOverflow();
        return static_cast<std::int64_t>(p);
    }

    std::int64_t num_;
    std::int64_t den_;
};

/// Counterclockwise closed arc [start, end] on T.
struct Arc {
    CircleAngle start;
    CircleAngle end;

    /// Membership in the closed ccw arc; [a,b] and [b,a] cover T, overlapping
    /// exactly in {a, b}.
    bool contains(const CircleAngle& t) const {
        if (start == end) return t == start;
        if (t == start || t == end) return true;
        if (start < end) return start < t && t < end;
        return t > start || t < end;
    }

    /// Strict interior membership.
    bool contains_open(const CircleAngle& t) const {
        return contains(t) && !(t == start) && !(t == end);
    }
};

/// Index of the ccw arc of T \ {cuts} (cuts sorted ascending) that contains t,
/// or -1 if t equals one of the cuts. Arc i spans (cuts[i], cuts[i+1 mod n]).
inline int arc_index(const CircleAngle& t, const std::vector<CircleAngle>& cuts) {
    const int n = static_cast<int>(cuts.size());
    for (int i = 0; i < n; ++i)
        if (t == cuts[i]) return -1;
    for (int i = 0; i < n; ++i) {
        if (Arc{cuts[i], cuts[(i + 1) % n]}.contains_open(t)) return i;
    }
    return -1;
}

} // namespace wander
