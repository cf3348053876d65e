#pragma once

#include <array>
#include <cmath>

#include "numerics.hpp"

namespace wander {

/// Monic cubic fixing 0, stored by its critical points (a, b):
///   f(z) = z^3 - 3/2 (a+b) z^2 + 3ab z.
/// The pair (a, b) is the source of truth; coefficients are derived on
/// construction. Escape cutoff for iteration is 1e15.
template <class C = Cx>
class CubicPoly {
public:
    using traits = num_traits<C>;
    using R = typename traits::real_t;

    CubicPoly(const C& a, const C& b) : a_(a), b_(b) {
        if (!traits::finite(a) || !traits::finite(b)) throw NonFiniteInput("critical points must be finite");
        const double scale = std::max({1.0, traits::to_double(traits::abs(a)), traits::to_double(traits::abs(b))});
        if (traits::to_double(traits::abs(a - b)) < 1e-14 * scale) throw DegenerateCritical();
        c2_ = R(-3) / R(2) * (a + b);
        c1_ = R(3) * a * b;
    }

    const C& a() const { return a_; }
    const C& b() const { return b_; }
    const C& c1() const { return c1_; }
    const C& c2() const { return c2_; }

    C operator()(const C& z) const { return ((z + c2_) * z + c1_) * z; }
    C deriv(const C& z) const { return (R(3) * z + R(2) * c2_) * z + c1_; }

    /// n-fold composition with escape cutoff; raises Escaped with the step.
    C iterate(C z, int n) const {
        for (int i = 0; i < n; ++i) {
            z = (*this)(z);
            if (traits::to_double(traits::abs(z)) > 1e15) throw Escaped(i + 1);
        }
        return z;
    }

    /// Polynomial swapped to the other precision / critical-point order.
    CubicPoly swapped() const { return CubicPoly(b_, a_); }

    /// Asymptotics of the Boettcher coordinate at infinity:
    /// phi(w) = w + boettcher_a0() + boettcher_a1()/w + O(1/w^2).
    C boettcher_a0() const { return -c2_ / R(3); }
    C boettcher_a1() const { return c2_ * c2_ / R(9) - c1_ / R(3); }

private:
    C a_, b_;
    C c1_, c2_;
};

using CubicPolynomial = CubicPoly<Cx>;

/// Construct from critical points (checks distinctness).
template <class C = Cx>
CubicPoly<C> from_critical_points(const C& a, const C& b) { return CubicPoly<C>(a, b); }

/// The real negative parameter of the explicit seed f(z) = z(z - 3w)^2 with
/// f(f(w)) = 3w: w = -(1/4) sqrt(6 + 2 sqrt(9 + 8 sqrt 3)).
inline double seed_omega() {
    return -0.25 * std::sqrt(6.0 + 2.0 * std::sqrt(9.0 + 8.0 * std::sqrt(3.0)));
}

/// The explicit seed polynomial with critical points (w, 3w).
template <class C = Cx>
CubicPoly<C> seed_polynomial() {
    using T = num_traits<C>;
    using R = typename T::real_t;
    using std::sqrt;
    const R three = R(3);
    const R w = -sqrt(R(6) + R(2) * sqrt(R(9) + R(8) * sqrt(three))) / R(4);
    return CubicPoly<C>(T::make_r(w, R(0)), T::make_r(three * w, R(0)));
}

template <class C = Cx>
struct FixedPoints {
    C alpha, beta, gamma;
    std::array<C, 3> multipliers; // f' at alpha, beta, gamma
};

/// The three fixed points of f: alpha = 0 plus the two roots of
/// z^2 + c2 z + (c1 - 1). Before rays are available, beta/gamma are ordered
/// lexicographically; for seed-like real polynomials this places beta (the
/// landing point of the angle-1/2 ray) first.
template <class C = Cx>
FixedPoints<C> fixed_points(const CubicPoly<C>& f) {
    using T = num_traits<C>;
    using R = typename T::real_t;
    const C c2 = f.c2(), c1 = f.c1();
    const C disc = T::sqrt(c2 * c2 - R(4) * (c1 - R(1)));
    C r1 = (-c2 + disc) / R(2);
    C r2 = (-c2 - disc) / R(2);
    const double scale = std::max(1.0, T::to_double(T::abs(r1)));
    if (T::to_double(T::abs(r1 - r2)) < 1e-12 * scale)
        throw ConfigurationMismatch("fixed_points: beta and gamma coincide");
    // lexicographic order (re, then im)
    const bool swap = (T::re(r2) < T::re(r1)) ||
                      (!(T::re(r1) < T::re(r2)) && T::im(r2) < T::im(r1));
    if (swap) std::swap(r1, r2);
    FixedPoints<C> out;
    out.alpha = T::make(0, 0);
    out.beta = r1;
    out.gamma = r2;
    out.multipliers = {f.deriv(out.alpha), f.deriv(out.beta), f.deriv(out.gamma)};
    return out;
}

} // namespace wander
