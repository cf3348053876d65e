#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include "errors.hpp"

namespace wander {

/// Default working precision: IEEE double.
using Cx = std::complex<double>;

/// Traits bridging the numeric operations the library needs over a complex
/// type. Specialized for std::complex<double> here and for the extended
/// precision type in extended.hpp.
template <class C>
struct num_traits;

template <>
struct num_traits<Cx> {
    using real_t = double;
    static constexpr bool is_double = true;

    static Cx make(double re, double im) { return {re, im}; }
    static Cx make_r(real_t re, real_t im) { return {re, im}; }
    static real_t re(const Cx& z) { return z.real(); }
    static real_t im(const Cx& z) { return z.imag(); }
    static real_t abs(const Cx& z) { return std::abs(z); }
    static Cx sqrt(const Cx& z) { return std::sqrt(z); }
    static Cx from(const Cx& z) { return z; }
    static Cx to_cx(const Cx& z) { return z; }
    static double to_double(real_t x) { return x; }
    static real_t from_double(double x) { return x; }
    static bool finite(const Cx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }
    static real_t eps() { return std::numeric_limits<double>::epsilon(); }
};

template <class C>
typename num_traits<C>::real_t cabs(const C& z) { return num_traits<C>::abs(z); }

template <class C>
Cx to_cx(const C& z) { return num_traits<C>::to_cx(z); }

} // namespace wander
