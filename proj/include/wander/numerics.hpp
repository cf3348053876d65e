#pragma once

#include <algorithm>
#include <array>
#include <functional>

#include "numeric.hpp"

namespace wander {

/// Roots of c3 z^3 + c2 z^2 + c1 z + c0 (with multiplicity), ordered
/// lexicographically by (re, im) so downstream branch selection is
/// reproducible. Cardano followed by two Newton polish steps per root.
template <class C = Cx>
std::array<C, 3> cubic_roots(const C& c3, const C& c2, const C& c1, const C& c0) {
    using T = num_traits<C>;
    using R = typename T::real_t;
    if (!T::finite(c3) || !T::finite(c2) || !T::finite(c1) || !T::finite(c0))
        throw NonFiniteInput("cubic_roots: non-finite coefficient");
    if (T::abs(c3) == R(0)) throw NonFiniteInput("cubic_roots: leading coefficient is zero");

    // depressed form t^3 + p t + q, z = t - b/3
    const C b = c2 / c3, c = c1 / c3, d = c0 / c3;
    const C shift = b / R(3);
    const C p = c - b * b / R(3);
    const C q = d - b * c / R(3) + C(2) * b * b * b / R(27);

    std::array<C, 3> roots;
    const R pn = T::abs(p), qn = T::abs(q);
    if (pn == R(0) && qn == R(0)) {
        roots = {-shift, -shift, -shift};
    } else {
        // Cardano: u^3 = -q/2 + sqrt(q^2/4 + p^3/27), take the larger branch
        const C disc = T::sqrt(q * q / R(4) + p * p * p / R(27));
        C u3 = -q / R(2) + disc;
        if (T::abs(u3) < T::abs(-q / R(2) - disc)) u3 = -q / R(2) - disc;
        // complex cube root via polar form
        using std::atan2; using std::cbrt; using std::cos; using std::sin; using std::sqrt;
        const R r = T::abs(u3);
        const R th = atan2(T::im(u3), T::re(u3));
        const R rc = cbrt(r);
        const C u = T::make_r(rc * cos(th / R(3)), rc * sin(th / R(3)));
        const R half = R(1) / R(2);
        const R sq3_2 = sqrt(R(3)) / R(2);
        const C w1 = T::make_r(-half, sq3_2);
        const C w2 = T::make_r(-half, -sq3_2);
        for (int i = 0; i < 3; ++i) {
            const C ui = (i == 0) ? u : (i == 1 ? u * w1 : u * w2);
            C t = (T::abs(ui) > R(0)) ? ui - p / (R(3) * ui) : ui;
            roots[i] = t - shift;
        }
    }

    // polish each root; keep steps bounded so multiple roots stay put
    auto f = [&](const C& z) { return ((c3 * z + c2) * z + c1) * z + c0; };
    auto df = [&](const C& z) { return (R(3) * c3 * z + R(2) * c2) * z + c1; };
    using std::sqrt;
    const R scale = std::max({T::abs(c3), T::abs(c2), T::abs(c1), T::abs(c0)});
    for (auto& z : roots) {
        for (int it = 0; it < 3; ++it) {
            const C fv = f(z), dv = df(z);
            if (T::abs(dv) < T::eps() * scale) break;
            const C step = fv / dv;
            if (T::abs(step) > R(1) + T::abs(z)) break;
            z = z - step;
        }
    }
    std::sort(roots.begin(), roots.end(), [](const C& x, const C& y) {
        using TT = num_traits<C>;
        if (TT::re(x) < TT::re(y)) return true;
        if (TT::re(y) < TT::re(x)) return false;
        return TT::im(x) < TT::im(y);
    });
    return roots;
}

template <class C>
struct NewtonResult {
    C x;
    int iterations;
};

/// Damped one-variable Newton: returns z with |F(z)| <= tol. Step is halved
/// while |F| fails to decrease (at most 20 halvings per iteration).
template <class C, class F, class DF>
NewtonResult<C> newton_1c(F&& f, DF&& df, C seed, double tol, int max_iter) {
    using T = num_traits<C>;
    using R = typename T::real_t;
    C z = seed;
    R fz = T::abs(f(z));
    for (int it = 0; it < max_iter; ++it) {
        if (T::to_double(fz) <= tol) return {z, it};
        const C d = df(z);
        if (T::to_double(T::abs(d)) < 1e-30) throw DerivativeVanished();
        const C step = f(z) / d;
        R t = R(1);
        C znew = z - step;
        R fnew = T::abs(f(znew));
        for (int h = 0; h < 20 && !(fnew < fz); ++h) {
            t = t / R(2);
            znew = z - t * step;
            fnew = T::abs(f(znew));
        }
        z = znew;
        fz = fnew;
    }
    if (T::to_double(fz) <= tol) return {z, max_iter};
    throw NoConvergence("newton_1c: iteration budget exhausted", T::to_double(fz), max_iter);
}

template <class C>
struct Newton2Result {
    C a, b;
    int iterations;
};

/// Two-variable damped Newton on G: C^2 -> C^2. The Jacobian comes from
/// central finite differences (relative step 1e-7) unless an analytic handle
/// is supplied. A 2x2 condition estimate above 1e12 raises SingularJacobian.
template <class C, class G>
Newton2Result<C> newton_2c(G&& g, C seed_a, C seed_b, double tol, int max_iter) {
    using T = num_traits<C>;
    using R = typename T::real_t;
    C a = seed_a, b = seed_b;
    auto norm_inf = [](const std::pair<C, C>& v) {
        return std::max(T::to_double(T::abs(v.first)), T::to_double(T::abs(v.second)));
    };
    std::pair<C, C> v = g(a, b);
    double r = norm_inf(v);
    for (int it = 0; it < max_iter; ++it) {
        if (r <= tol) return {a, b, it};
        // finite-difference Jacobian, columns d/da and d/db
        C J[2][2];
        {
            const R ha = T::from_double(1e-7 * std::max(1.0, T::to_double(T::abs(a))));
            const R hb = T::from_double(1e-7 * std::max(1.0, T::to_double(T::abs(b))));
            const auto vpa = g(a + ha, b), vma = g(a - ha, b);
            const auto vpb = g(a, b + hb), vmb = g(a, b - hb);
            J[0][0] = (vpa.first - vma.first) / (R(2) * ha);
            J[1][0] = (vpa.second - vma.second) / (R(2) * ha);
            J[0][1] = (vpb.first - vmb.first) / (R(2) * hb);
            J[1][1] = (vpb.second - vmb.second) / (R(2) * hb);
        }
        const C det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        {
            // condition estimate from the eigenvalues of J^H J
            using std::sqrt;
            const R s11 = T::abs(J[0][0]) * T::abs(J[0][0]) + T::abs(J[1][0]) * T::abs(J[1][0]);
            const R s22 = T::abs(J[0][1]) * T::abs(J[0][1]) + T::abs(J[1][1]) * T::abs(J[1][1]);
            const R tr = s11 + s22;
            const R dd = T::abs(det) * T::abs(det);
            const R rad = sqrt(std::max(R(0), tr * tr - R(4) * dd));
            const R lmax = (tr + rad) / R(2), lmin = (tr - rad) / R(2);
            const double cond = (T::to_double(lmin) > 0)
                ? std::sqrt(T::to_double(lmax) / T::to_double(lmin))
                : std::numeric_limits<double>::infinity();
            if (cond > 1e12) throw SingularJacobian("newton_2c: jacobian condition estimate too large", cond);
        }
        const C sa = (v.first * J[1][1] - v.second * J[0][1]) / det;
        const C sb = (J[0][0] * v.second - J[1][0] * v.first) / det;
        R t = R(1);
        bool improved = false;
        C a2 = a, b2 = b;
        std::pair<C, C> v2 = v;
        for (int h = 0; h < 24; ++h) {
            a2 = a - t * sa;
            b2 = b - t * sb;
            try {
                v2 = g(a2, b2);
            } catch (const Error&) {
                t = t / R(2);
                continue; // trial left the valid region; shorten the step
            }
            if (norm_inf(v2) < r) { improved = true; break; }
            t = t / R(2);
        }
        if (!improved)
            throw NoConvergence("newton_2c: damping stalled", r, it);
        a = a2; b = b2; v = v2; r = norm_inf(v);
    }
    if (r <= tol) return {a, b, max_iter};
    throw NoConvergence("newton_2c: iteration budget exhausted", r, max_iter);
}

} // namespace wander
