#pragma once

#include "dendrite.hpp"

namespace wander {

/// One chain member with its verified combinatorial data.
struct ChainMember {
    CubicPolynomial poly;
    Configuration config;
    Cx xi{};
    std::vector<CircleAngle> angles; // four angles at xi
    int m_used = 0;                  // 0 for the seed
    CheckReport admissibility;
};

struct ChainRecord {
    std::vector<ChainMember> members;
    std::vector<double> deltas; // |c1,c2 coefficient distance| between consecutive members
};

/// Pairwise-distinctness of the first j orbit points of xi, none critical.
inline void check_orbit_distinct(const CubicPolynomial& f, const Cx& xi, int j, double tol = 1e-6) {
    std::vector<Cx> orbit(j);
    Cx z = xi;
    for (int i = 0; i < j; ++i) {
        orbit[i] = z;
        if (std::abs(z - f.a()) < tol || std::abs(z - f.b()) < tol)
            throw ConfigurationMismatch("xi orbit hits a critical point at step " + std::to_string(i));
        z = f(z);
    }
    for (int i = 0; i < j; ++i)
        for (int jj = i + 1; jj < j; ++jj)
            if (std::abs(orbit[i] - orbit[jj]) < tol)
                throw ConfigurationMismatch("xi orbit points " + std::to_string(i) + " and " +
                                            std::to_string(jj) + " coincide");
}

/// Build the chain f_0, f_1, ..., f_N: start from the seed, verify its
/// admissibility, then apply the Key-Proposition perturbation N times with
/// the given m schedule, carrying the exact angle quadruple through the
/// eight-ray relabeling and re-verifying every step:
///  - the (m+l, k+l)-configuration by direct iteration,
///  - j_{n+1} = j_n + k_n via the Newton-refined branching point,
///  - separation of 1/2, 1/6, 5/6,
///  - pairwise distinctness of the xi orbit.
inline ChainRecord build_chain(int N, const std::vector<int>& m_schedule, double tol = 1e-10) {
    if (static_cast<int>(m_schedule.size()) < N)
        throw ConfigurationMismatch("m schedule shorter than chain length");
    ChainRecord rec;

    CubicPolynomial f = seed_polynomial<>();
    Configuration cfg{0, 2, 1};
    BranchingData bd = find_branching_point(f, cfg);
    ChainMember seed{f, cfg, bd.xi, bd.angles, 0, verify_admissible(f, cfg, bd)};
    if (!seed.admissibility.all_pass())
        throw ConfigurationMismatch("seed failed admissibility:\n" + seed.admissibility.summary());
    rec.members.push_back(std::move(seed));

    for (int n = 0; n < N; ++n) {
        const int m = m_schedule[n];
        const auto& prev = rec.members.back();
        const auto step = perturb<Cx>(prev.poly, prev.config, m, tol);
        const CubicPolynomial g = step.target;
        const CubicPolynomial g_pre = g.swapped();

        Configuration ncfg;
        ncfg.j = prev.config.j + prev.config.k; // Lemma-level j increment
        ncfg.k = step.m_used + prev.config.l;
        ncfg.l = prev.config.k + prev.config.l;

        const auto angles = ladder_step(g_pre, prev.angles, prev.config.j, prev.config.k,
                                        prev.config.l, step.m_used);
        BranchingData nbd = verify_branch_angles(g, angles, ncfg.j, g.a());
        check_orbit_distinct(g, nbd.xi, ncfg.j);

        ChainMember mem{g, ncfg, nbd.xi, nbd.angles, step.m_used,
                        verify_admissible(g, ncfg, nbd)};
        if (!mem.admissibility.all_pass())
            throw ConfigurationMismatch("chain member " + std::to_string(n + 1) +
                                        " failed admissibility:\n" + mem.admissibility.summary());
        const double delta = std::abs(g.c1() - prev.poly.c1()) + std::abs(g.c2() - prev.poly.c2());
        rec.deltas.push_back(delta);
        rec.members.push_back(std::move(mem));
    }
    return rec;
}

inline ChainRecord build_chain(int N, double tol = 1e-10) {
    std::vector<int> schedule(N);
    for (int i = 0; i < N; ++i) schedule[i] = i + 1;
    return build_chain(N, schedule, tol);
}

} // namespace wander
