#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "rays.hpp"

namespace wander {

/// Critical orbit pattern xi ->(j) omega ->(k) omega' ->(l) alpha = 0.
struct Configuration {
    int j = 0;
    int k = 1;
    int l = 1;

    std::string str() const {
        return "(" + std::to_string(j) + "," + std::to_string(k) + "," + std::to_string(l) + ")";
    }
};

/// One named check with its measured value and tolerance.
struct CheckItem {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string note;
};

struct CheckReport {
    std::vector<CheckItem> items;

    bool all_pass() const {
        for (const auto& it : items)
            if (!it.pass) return false;
        return true;
    }
    void add(const std::string& name, bool pass, double measured, double tol,
             const std::string& note = "") {
        items.push_back({name, pass, measured, tol, note});
    }
    std::string summary() const {
        std::ostringstream os;
        for (const auto& it : items)
            os << (it.pass ? "[pass] " : "[FAIL] ") << it.name << " measured=" << it.measured
               << " tol=" << it.tolerance << (it.note.empty() ? "" : " " + it.note) << "\n";
        return os.str();
    }
};

/// Residual of the strengthened (k,l)-configuration system:
///   (f^k(a) - b, f^l(b)).
/// The orbit is pinned to pass through the second critical point, which
/// selects the intended intersection component.
template <class C = Cx>
std::pair<C, C> config_residual(const C& a, const C& b, int k, int l) {
    const CubicPoly<C> f(a, b);
    return {f.iterate(a, k) - b, f.iterate(b, l)};
}

/// Minimality of (k, l) for a polynomial with critical points (a, b):
/// f^i(a) != b for 0 < i < k and f^i(b) != 0 for 0 <= i < l.
/// Returns the violating step or -1.
template <class C = Cx>
int minimality_violation(const CubicPoly<C>& f, int k, int l, double tol) {
    using T = num_traits<C>;
    C z = f.a();
    for (int i = 1; i < k; ++i) {
        z = f(z);
        if (T::to_double(T::abs(z - f.b())) <= tol) return i;
    }
    C w = f.b();
    for (int i = 0; i < l; ++i) {
        if (T::to_double(T::abs(w)) <= tol) return k + i;
        w = f(w);
    }
    return -1;
}

/// Newton solve for a cubic with exact (k,l)-configuration from a nearby seed.
template <class C = Cx>
CubicPoly<C> solve_config(const C& seed_a, const C& seed_b, int k, int l, double tol = 1e-10) {
    auto residual = [&](const C& a, const C& b) { return config_residual<C>(a, b, k, l); };
    const auto r = newton_2c<C>(residual, seed_a, seed_b, tol, 80);
    CubicPoly<C> f(r.a, r.b);
    const int viol = minimality_violation(f, k, l, 1e-6);
    if (viol >= 0) throw NonMinimal(viol);
    return f;
}

/// Membership evidence for the ray/region configuration class: three repelling
/// fixed points, distinct critical points, the 0 / 1/2 / +-1/4 landing pattern
/// and the region placement of the critical orbit.
inline CheckReport verify_in_V(const CubicPolynomial& f, double landing_tol = 1e-5) {
    CheckReport rep;
    // (1) three distinct repelling fixed points
    try {
        const auto fp = fixed_points(f);
        double mmin = std::numeric_limits<double>::infinity();
        for (const auto& m : fp.multipliers) mmin = std::min(mmin, std::abs(m));
        rep.add("fixed_points_repelling", mmin > 1.0, mmin, 1.0, "min |multiplier|");

        // (2) distinct critical points
        const double dc = std::abs(f.a() - f.b());
        rep.add("critical_points_distinct", dc > 1e-10, dc, 1e-10);

        // (3) ray 0 lands at alpha
        const Cx l0 = landing_point(f, CircleAngle(0, 1), landing_tol);
        rep.add("ray0_lands_alpha", std::abs(l0) < 100 * landing_tol, std::abs(l0), 100 * landing_tol);

        // (4) ray 1/2 lands at beta
        const Cx lh = landing_point(f, CircleAngle(1, 2), landing_tol);
        const double dbeta = std::min(std::abs(lh - fp.beta), std::abs(lh - fp.gamma));
        const bool beta_ok = std::abs(lh - fp.beta) < 100 * landing_tol ||
                             std::abs(lh - fp.gamma) < 100 * landing_tol;
        rep.add("ray_half_lands_fixed", beta_ok, dbeta, 100 * landing_tol,
                "distance to nearest nonzero fixed point");

        // (5) rays +-1/4 land together at the remaining fixed point; regions
        const Cx lq1 = landing_point(f, CircleAngle(1, 4), landing_tol);
        const Cx lq2 = landing_point(f, CircleAngle(3, 4), landing_tol);
        rep.add("quarter_rays_common", std::abs(lq1 - lq2) < 3 * landing_tol, std::abs(lq1 - lq2),
                3 * landing_tol);

        const auto regions = build_standard_regions(f);
        // identify omega_alpha (critical point in U_alpha); the other is omega_beta
        const bool a_in_alpha = regions.U_alpha.contains(f.a());
        const Cx om_a = a_in_alpha ? f.a() : f.b();
        const Cx om_b = a_in_alpha ? f.b() : f.a();
        rep.add("one_critical_in_U_alpha", regions.U_alpha.contains(om_a) && regions.U_beta.contains(om_b),
                1.0, 1.0);
        rep.add("f(omega_beta)_in_U_alpha", regions.U_alpha.contains(f(om_b)), 1.0, 1.0);
        rep.add("f(omega_alpha)_in_U_beta", regions.U_beta.contains(f(om_a)), 1.0, 1.0);
        rep.add("f2(omega_alpha)_in_U_beta", regions.U_beta.contains(f.iterate(om_a, 2)), 1.0, 1.0);
    } catch (const Error& e) {
        rep.add(std::string("verify_in_V aborted: ") + e.what(), false, 0.0, 0.0);
    }
    return rep;
}

} // namespace wander
