#pragma once

#include <optional>

#include "perturbation.hpp"

namespace wander {

/// The branching point of a chain member: the common landing point of four
/// rays, their exact angles (ccw), the precritical depth j, and which arc of
/// the circle minus the four angles holds each of the test angles 1/2, 1/6,
/// 5/6.
struct BranchingData {
    Cx xi{};
    std::vector<CircleAngle> angles; // four, sorted ascending = ccw
    int j = 0;
    std::array<int, 3> separation{}; // arc index per test angle
    double cluster_spread = 0.0;
    double iteration_residual = 0.0;
};

inline const std::array<CircleAngle, 3>& separation_test_angles() {
    static const std::array<CircleAngle, 3> t{CircleAngle(1, 2), CircleAngle(1, 6), CircleAngle(5, 6)};
    return t;
}

/// True when the three test angles fall into three distinct components of
/// T minus the given four angles.
inline bool separation_ok(const std::vector<CircleAngle>& four, std::array<int, 3>* idx_out = nullptr) {
    std::vector<CircleAngle> cuts = four;
    std::sort(cuts.begin(), cuts.end());
    std::array<int, 3> idx{};
    for (int i = 0; i < 3; ++i) idx[i] = arc_index(separation_test_angles()[i], cuts);
    if (idx_out) *idx_out = idx;
    return idx[0] >= 0 && idx[1] >= 0 && idx[2] >= 0 &&
           idx[0] != idx[1] && idx[1] != idx[2] && idx[0] != idx[2];
}

/// The sublist of candidate angles whose rays land within tol of target.
/// Unresolved rays are skipped (recorded in *unresolved when given).
inline std::vector<CircleAngle> landing_angles_at(const CubicPolynomial& f, const Cx& target,
                                                  const std::vector<CircleAngle>& candidates,
                                                  double tol = 4e-3,
                                                  std::vector<CircleAngle>* unresolved = nullptr) {
    std::vector<Cx> landings(candidates.size());
    std::vector<char> ok(candidates.size(), 0);
    parallel_for(candidates.size(), [&](std::size_t i) {
        try {
            landings[i] = landing_point(f, candidates[i], std::max(1e-7, tol / 4));
            ok[i] = 1;
        } catch (const LandingUnresolved&) {
            ok[i] = 0;
        }
    }, 1);
    std::vector<CircleAngle> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!ok[i]) {
            if (unresolved) unresolved->push_back(candidates[i]);
            continue;
        }
        if (std::abs(landings[i] - target) < tol) out.push_back(candidates[i]);
    }
    return out;
}

namespace detail {

/// Angles of the rays landing at orbit.back(), where orbit runs backwards
/// from a point of known angles: orbit[0] has angle set `start`, and
/// f(orbit[i+1]) = orbit[i]. Level-by-level pullback with pruning against the
/// known orbit points.
inline std::vector<CircleAngle> rays_along_orbit(const CubicPolynomial& f,
                                                 const std::vector<Cx>& orbit,
                                                 std::vector<CircleAngle> kept,
                                                 double tol = 4e-3) {
    for (std::size_t lvl = 1; lvl < orbit.size(); ++lvl) {
        std::vector<CircleAngle> cands;
        for (const auto& t : kept)
            for (int e = 0; e < 3; ++e) cands.push_back(t.third(e));
        std::sort(cands.begin(), cands.end());
        cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
        kept = landing_angles_at(f, orbit[lvl], cands, tol);
        if (kept.empty())
            throw NoFourRayCluster("angle pullback: no candidate lands at orbit point level " +
                                   std::to_string(lvl));
    }
    return kept;
}

} // namespace detail

/// The two angles landing at the a-slot critical point of g, whose orbit
/// reaches 0 in `steps` iterations: pull the angle 0 back along that orbit.
inline std::vector<CircleAngle> critical_point_angles(const CubicPolynomial& g, int steps,
                                                      double tol = 4e-3) {
    std::vector<Cx> orbit(steps + 1);
    for (int i = 0; i <= steps; ++i) orbit[i] = g.iterate(g.a(), steps - i);
    auto out = detail::rays_along_orbit(g, orbit, {CircleAngle(0, 1)}, tol);
    if (out.size() != 2)
        throw NoFourRayCluster("expected 2 rays at the critical point, found " +
                               std::to_string(out.size()));
    return out;
}

/// Exact new angle quadruple at the branching point of the perturbed map.
/// Implements the eight-ray relabeling: eta1 is the tripled angle landing at
/// g^k(a); the quadruple {theta1+eta+, theta2+eta-, theta2+eta+, theta3+eta-}
/// (or its 2-rotation) is selected by the separation test.
inline std::vector<CircleAngle> ladder_step(const CubicPolynomial& g_preswap,
                                            const std::vector<CircleAngle>& theta_old,
                                            int j, int k, int l, int m, double tol = 4e-3) {
    const auto phis = critical_point_angles(g_preswap, k + l, tol);
    // phi+ in (0, 5/12), phi- in (-5/12, 0)
    std::optional<CircleAngle> phi_p, phi_m;
    for (const auto& t : phis) {
        if (Arc{CircleAngle(0, 1), CircleAngle(5, 12)}.contains_open(t)) phi_p = t;
        if (Arc{CircleAngle(7, 12), CircleAngle(0, 1)}.contains_open(t)) phi_m = t;
    }
    if (!phi_p || !phi_m)
        throw ConfigurationMismatch("critical-point angles not in the expected sectors");

    // eta+- = signed(phi+-) / 3^{m + l + j + k}
    const int shift = m + l + j + k;
    auto scaled = [&](const CircleAngle& t) {
        auto [num, den] = t.signed_rep();
        std::int64_t d = den;
        for (int i = 0; i < shift; ++i) {
            if (d > INT64_MAX / 3) throw AngleOverflow();
            d *= 3;
        }
        return CircleAngle(num, d);
    };
    const CircleAngle eta_p = scaled(*phi_p);
    const CircleAngle eta_m = scaled(*phi_m);

    std::vector<CircleAngle> th = theta_old;
    std::sort(th.begin(), th.end());
    // eta1 = the (j+k)-tripled angle whose ray lands at g^k(a)
    std::vector<CircleAngle> etas;
    for (const auto& t : th) {
        const CircleAngle e = t.tripled(j + k);
        if (std::find(etas.begin(), etas.end(), e) == etas.end()) etas.push_back(e);
    }
    if (etas.size() != 2)
        throw ConfigurationMismatch("old quadruple triples to " + std::to_string(etas.size()) +
                                    " angles, expected 2");
    const Cx target = g_preswap.iterate(g_preswap.a(), k);
    const Cx land0 = landing_point(g_preswap, etas[0], 1e-3);
    const Cx land1 = landing_point(g_preswap, etas[1], 1e-3);
    const CircleAngle eta1 = (std::abs(land0 - target) < std::abs(land1 - target)) ? etas[0] : etas[1];

    std::vector<std::vector<CircleAngle>> cand_sets;
    for (int s = 0; s < 4; ++s) {
        if (!(th[s].tripled(j + k) == eta1)) continue;
        const CircleAngle t1 = th[s], t2 = th[(s + 1) % 4], t3 = th[(s + 2) % 4];
        cand_sets.push_back({t1 + eta_p, t2 + eta_m, t2 + eta_p, t3 + eta_m});
    }
    std::vector<std::vector<CircleAngle>> ok_sets;
    for (auto& cs : cand_sets)
        if (separation_ok(cs)) ok_sets.push_back(cs);
    if (ok_sets.size() != 1)
        throw SeparationFailed("separation test selected " + std::to_string(ok_sets.size()) +
                               " of the candidate quadruples");
    auto out = ok_sets.front();
    std::sort(out.begin(), out.end());
    return out;
}

/// Verify a proposed angle quadruple: the four rays land in a cluster, the
/// Newton-refined cluster point satisfies f^j(xi) = omega, and the separation
/// test holds. `omega` is the critical point the branching point is
/// precritical to.
inline BranchingData verify_branch_angles(const CubicPolynomial& f,
                                          const std::vector<CircleAngle>& four, int j,
                                          const Cx& omega, double cluster_tol = 1.5e-2) {
    if (four.size() != 4) throw NoFourRayCluster("expected four angles");
    std::array<Cx, 4> lands;
    parallel_for(4, [&](std::size_t i) { lands[i] = landing_point(f, four[i], 1e-3); }, 1);
    Cx c{};
    for (const auto& p : lands) c += p;
    c /= 4.0;
    double spread = 0.0;
    for (const auto& p : lands) spread = std::max(spread, std::abs(p - c));
    if (spread > cluster_tol)
        throw NoFourRayCluster("four-ray cluster spread " + std::to_string(spread));

    Cx xi = c;
    if (j > 0) {
        auto fj = [&](const Cx& z) { return f.iterate(z, j) - omega; };
        auto dfj = [&](const Cx& z) {
            Cx d(1, 0), w = z;
            for (int i = 0; i < j; ++i) {
                d *= f.deriv(w);
                w = f(w);
            }
            return d;
        };
        xi = newton_1c<Cx>(fj, dfj, c, 1e-12, 60).x;
    } else {
        xi = omega;
    }
    BranchingData out;
    out.xi = xi;
    out.angles = four;
    std::sort(out.angles.begin(), out.angles.end());
    out.j = j;
    out.cluster_spread = spread;
    out.iteration_residual = std::abs(f.iterate(xi, j) - omega);
    if (!separation_ok(out.angles, &out.separation)) throw SeparationFailed();
    return out;
}

/// Locate the branching point and its four external angles.
///
/// Without a hint this enumerates: pull the angle 0 back along the known
/// critical orbits (l levels to omega', k levels to omega), then j further
/// levels keeping every candidate; the unique 4-ray cluster separating
/// 1/2, 1/6, 5/6 is the branching point. The last stage costs 4*3^j ray
/// traces, so j is capped (enumeration_limit). Chain members pass the exact
/// quadruple from the angle ladder as `hint`.
inline BranchingData find_branching_point(const CubicPolynomial& f, const Configuration& cfg,
                                          std::optional<std::vector<CircleAngle>> hint = std::nullopt,
                                          double tol = 4e-3, int enumeration_limit = 6) {
    const Cx omega = f.a();
    if (hint) return verify_branch_angles(f, *hint, cfg.j, omega);

    // angles at omega' (l levels along its orbit), then omega (k levels)
    std::vector<Cx> orbit_b(cfg.l + 1);
    for (int i = 0; i <= cfg.l; ++i) orbit_b[i] = f.iterate(f.b(), cfg.l - i);
    auto at_bslot = detail::rays_along_orbit(f, orbit_b, {CircleAngle(0, 1)}, tol);
    if (at_bslot.size() != 2)
        throw NoFourRayCluster("expected 2 rays at omega', found " + std::to_string(at_bslot.size()));

    std::vector<Cx> orbit_a(cfg.k + 1);
    for (int i = 0; i <= cfg.k; ++i) orbit_a[i] = f.iterate(f.a(), cfg.k - i);
    auto at_aslot = detail::rays_along_orbit(f, orbit_a, at_bslot, tol);
    if (at_aslot.size() != 4)
        throw NoFourRayCluster("expected 4 rays at omega, found " + std::to_string(at_aslot.size()));

    if (cfg.j == 0) return verify_branch_angles(f, at_aslot, 0, omega);
    if (cfg.j > enumeration_limit)
        throw NoFourRayCluster("j exceeds the enumeration limit; pass the ladder angles as hint");

    // enumerate all j-th preimage angles and cluster their landings
    std::vector<CircleAngle> cands = at_aslot;
    for (int lvl = 0; lvl < cfg.j; ++lvl) {
        std::vector<CircleAngle> next;
        next.reserve(cands.size() * 3);
        for (const auto& t : cands)
            for (int e = 0; e < 3; ++e) next.push_back(t.third(e));
        cands.swap(next);
    }
    std::vector<Cx> lands(cands.size());
    std::vector<char> ok(cands.size(), 0);
    parallel_for(cands.size(), [&](std::size_t i) {
        try {
            lands[i] = landing_point(f, cands[i], 1e-3);
            ok[i] = 1;
        } catch (const LandingUnresolved&) {
        }
    }, 1);
    // greedy clustering
    const double ctol = 3 * tol;
    std::vector<int> cluster(cands.size(), -1);
    std::vector<Cx> centers;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (!ok[i]) continue;
        for (std::size_t cidx = 0; cidx < centers.size(); ++cidx) {
            if (std::abs(lands[i] - centers[cidx]) < ctol) {
                cluster[i] = static_cast<int>(cidx);
                break;
            }
        }
        if (cluster[i] < 0) {
            cluster[i] = static_cast<int>(centers.size());
            centers.push_back(lands[i]);
        }
    }
    std::optional<BranchingData> found;
    for (std::size_t cidx = 0; cidx < centers.size(); ++cidx) {
        std::vector<CircleAngle> group;
        for (std::size_t i = 0; i < cands.size(); ++i)
            if (cluster[i] == static_cast<int>(cidx)) group.push_back(cands[i]);
        if (group.size() != 4) continue;
        if (!separation_ok(group)) continue;
        if (found) throw SeparationFailed("multiple separating 4-ray clusters found");
        found = verify_branch_angles(f, group, cfg.j, omega);
    }
    if (!found) throw SeparationFailed("no separating 4-ray cluster found");
    return *found;
}

/// Definition-level admissibility re-check by direct iteration plus the
/// beta-preimage landing pattern.
inline CheckReport verify_admissible(const CubicPolynomial& f, const Configuration& cfg,
                                     const BranchingData& branching) {
    CheckReport rep;
    const double tol = 1e-8;
    const auto scale = [](const Cx& z) { return 1.0 + std::abs(z); };
    try {
        const Cx omega = f.a(), omegap = f.b();
        const double rj = std::abs(f.iterate(branching.xi, cfg.j) - omega);
        rep.add("f^j(xi) = omega", rj <= tol * scale(omega), rj, tol * scale(omega));
        const double rk = std::abs(f.iterate(omega, cfg.k) - omegap);
        rep.add("f^k(omega) = omega'", rk <= tol * scale(omegap), rk, tol * scale(omegap));
        const double rl = std::abs(f.iterate(omegap, cfg.l));
        rep.add("f^l(omega') = 0", rl <= tol, rl, tol);
        rep.add("separation of 1/2, 1/6, 5/6", separation_ok(branching.angles), 1, 1);

        // f^{-1}(beta) = {beta, beta', beta''} are the landings of 1/2, 1/6, -1/6
        const Cx beta = landing_point(f, CircleAngle(1, 2), 1e-5);
        const Cx betap = landing_point(f, CircleAngle(1, 6), 1e-4);
        const Cx betapp = landing_point(f, CircleAngle(5, 6), 1e-4);
        const double d1 = std::abs(f(beta) - beta);
        const double d2 = std::abs(f(betap) - beta);
        const double d3 = std::abs(f(betapp) - beta);
        rep.add("f(beta) = beta", d1 <= 1e-3 * scale(beta), d1, 1e-3 * scale(beta));
        rep.add("f(beta') = beta", d2 <= 1e-3 * scale(beta), d2, 1e-3 * scale(beta));
        rep.add("f(beta'') = beta", d3 <= 1e-3 * scale(beta), d3, 1e-3 * scale(beta));
    } catch (const Error& e) {
        rep.add(std::string("verify_admissible aborted: ") + e.what(), false, 0, 0);
    }
    return rep;
}

/// Result of the exact-angle nodal point operation.
struct NodalPoint {
    Cx point{};
    bool separated = false; // true: the branching point; false: a degenerate landing
};

/// Nodal point of the landing points of three test angles, from the exact
/// angle data: if the branching angles separate the three test angles the
/// nodal point is xi; if two of the landings coincide the nodal point is that
/// common landing (flagged). Anything else raises NotSeparated.
inline NodalPoint nodal_point_exact(const CubicPolynomial& f, const BranchingData& branching,
                                    const std::array<CircleAngle, 3>& tests,
                                    double landing_tol = 1e-3) {
    std::vector<CircleAngle> cuts = branching.angles;
    std::sort(cuts.begin(), cuts.end());
    std::array<int, 3> idx{};
    for (int i = 0; i < 3; ++i) idx[i] = arc_index(tests[i], cuts);
    const bool distinct = idx[0] >= 0 && idx[1] >= 0 && idx[2] >= 0 &&
                          idx[0] != idx[1] && idx[1] != idx[2] && idx[0] != idx[2];
    if (distinct) return {branching.xi, true};
    // degenerate: two test angles landing together make the nodal point
    std::array<Cx, 3> lands;
    for (int i = 0; i < 3; ++i) lands[i] = landing_point(f, tests[i], landing_tol);
    for (int i = 0; i < 3; ++i)
        for (int jj = i + 1; jj < 3; ++jj)
            if (std::abs(lands[i] - lands[jj]) < 3 * landing_tol) return {lands[i], false};
    throw NotSeparated();
}

/// Uniform-angle sampling of the Caratheodory loop at a fixed small potential.
struct LoopApproximation {
    int samples = 0;
    double potential_eps = 0.0;
    std::vector<CircleAngle> angles; // j/M for j = 0..M-1
    std::vector<Cx> points;
};

/// Trace all M rays of the uniform grid to potential eps. The grid is closed
/// under tripling, so one cascade serves the whole loop; per-angle failures
/// are recorded as NaN gaps.
inline LoopApproximation approximate_loop(const CubicPolynomial& f, int M, double eps,
                                          TraceOptions opt = {}) {
    if (M < 3) throw NoTripleCoincidence("loop needs at least 3 samples");
    opt.end_potential = eps;
    std::vector<CircleAngle> grid;
    grid.reserve(M);
    for (int j = 0; j < M; ++j) grid.push_back(CircleAngle(j, M));
    const RayFamily fam = RayFamily::trace(f, grid, opt);
    LoopApproximation out;
    out.samples = M;
    out.potential_eps = eps;
    out.angles = grid;
    out.points.resize(M);
    const std::size_t last = fam.rows() - 1;
    for (int j = 0; j < M; ++j) out.points[j] = fam.node(grid[j], last);
    return out;
}

/// Discrete triple-arc nodal point: the three test angles cut the sample grid
/// into three arcs; the sample of the first arc minimizing the larger of its
/// distances to the other two arcs is the near-coincidence point. Returned as
/// the centroid of the three mutually-nearest samples. Tolerance for
/// declaring coincidence is 3x the maximum adjacent-sample spacing.
inline NodalPoint nodal_point_loop(const LoopApproximation& loop,
                                   const std::array<CircleAngle, 3>& tests,
                                   double* scatter_out = nullptr) {
    const int M = loop.samples;
    if (M < 300) throw NoTripleCoincidence("loop resolution too coarse");
    std::array<CircleAngle, 3> ts = tests;
    std::sort(ts.begin(), ts.end());
    // arc sample index ranges
    std::array<int, 3> cut{};
    for (int i = 0; i < 3; ++i)
        cut[i] = static_cast<int>(std::ceil(ts[i].value() * M)) % M;
    auto arc = [&](int i) {
        std::vector<int> idx;
        const int a = cut[i], b = cut[(i + 1) % 3];
        for (int t = a; t != b; t = (t + 1) % M) idx.push_back(t);
        return idx;
    };
    const auto A1 = arc(0), A2 = arc(1), A3 = arc(2);
    if (A1.size() < 2 || A2.size() < 2 || A3.size() < 2)
        throw NoTripleCoincidence("an arc contains too few samples");
    double best = std::numeric_limits<double>::infinity();
    Cx p1{}, p2{}, p3{};
    for (const int i : A1) {
        const Cx z = loop.points[i];
        double d2 = std::numeric_limits<double>::infinity();
        Cx q2{};
        for (const int u : A2) {
            const double d = std::abs(z - loop.points[u]);
            if (d < d2) { d2 = d; q2 = loop.points[u]; }
        }
        double d3 = std::numeric_limits<double>::infinity();
        Cx q3{};
        for (const int u : A3) {
            const double d = std::abs(z - loop.points[u]);
            if (d < d3) { d3 = d; q3 = loop.points[u]; }
        }
        const double score = std::max(d2, d3);
        if (score < best) { best = score; p1 = z; p2 = q2; p3 = q3; }
    }
    double max_spacing = 0.0;
    for (int i = 0; i < M; ++i)
        max_spacing = std::max(max_spacing, std::abs(loop.points[(i + 1) % M] - loop.points[i]));
    if (scatter_out) *scatter_out = best;
    if (best > 3.0 * max_spacing)
        throw NoTripleCoincidence("triple coincidence scatter " + std::to_string(best) +
                                  " exceeds 3x sample spacing " + std::to_string(max_spacing));
    return {(p1 + p2 + p3) / 3.0, true};
}

} // namespace wander
