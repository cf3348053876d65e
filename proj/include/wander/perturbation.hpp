#pragma once

#include <cmath>
#include <vector>

#include "config_solver.hpp"

namespace wander {

/// Unique preimage of z under g inside V (g: V -> W is an isomorphism and
/// V is contained in W). Region tests run at double precision; the root value
/// carries the full precision of C.
template <class C = Cx>
C inverse_branch_preimage(const CubicPoly<C>& g, const C& z, const StandardRegions& regions,
                          bool check_in_w = true) {
    using T = num_traits<C>;
    if (check_in_w && !regions.W.contains(to_cx<C>(z))) throw NotInW();
    const auto roots = cubic_roots<C>(C(1), g.c2(), g.c1(), -z);
    int inside = 0;
    C pick{};
    for (const auto& r : roots) {
        if (regions.V.contains(to_cx<C>(r))) {
            ++inside;
            pick = r;
        }
    }
    if (inside != 1) throw AmbiguousBranch(inside);
    return pick;
}

/// The inverse-branch chain omega_0 = omega(a-slot), g(omega_{-i-1}) = omega_{-i}
/// with every omega_{-i-1} in V. Forward recomposition is verified per link.
template <class C = Cx>
std::vector<C> omega_minus_chain(const CubicPoly<C>& g, int m, const StandardRegions& regions) {
    using T = num_traits<C>;
    std::vector<C> chain{g.a()};
    for (int i = 0; i < m; ++i) {
        const C w = inverse_branch_preimage<C>(g, chain.back(), regions);
        const double err = T::to_double(T::abs(g(w) - chain.back()));
        if (err > 1e-10 * (1.0 + T::to_double(T::abs(chain.back()))))
            throw ConfigurationMismatch("omega chain link failed forward verification");
        chain.push_back(w);
    }
    return chain;
}

/// Convenience overload building the standard regions internally.
template <class C = Cx>
std::vector<C> omega_minus_chain(const CubicPoly<C>& g, int m) {
    const CubicPolynomial gd(to_cx<C>(g.a()), to_cx<C>(g.b()));
    const StandardRegions regions = build_standard_regions(gd);
    return omega_minus_chain<C>(g, m, regions);
}

namespace detail {

/// Scan-mode proxy for the V-branch: the chain contracts to 0 and the other
/// preimages stay order-one away, so the smallest-modulus root is the V-root.
/// The region-based selection cross-checks it at the accepted solution.
template <class C>
C omega_minus_smallroot(const CubicPoly<C>& g, int m) {
    using T = num_traits<C>;
    C z = g.a();
    for (int i = 0; i < m; ++i) {
        const auto roots = cubic_roots<C>(C(1), g.c2(), g.c1(), -z);
        C best = roots[0];
        for (const auto& r : roots)
            if (T::abs(r) < T::abs(best)) best = r;
        z = best;
    }
    return z;
}

/// Caches the standard double-precision regions, re-tracing only when the
/// parameters move more than `threshold` (ray tracing dominates cost).
class RegionCache {
public:
    explicit RegionCache(double threshold = 1e-3) : threshold_(threshold) {}

    template <class C>
    const StandardRegions& get(const CubicPoly<C>& g) {
        const Cx a = to_cx<C>(g.a()), b = to_cx<C>(g.b());
        if (!valid_ || std::abs(a - key_a_) + std::abs(b - key_b_) > threshold_) {
            const CubicPolynomial gd(a, b);
            regions_ = build_standard_regions(gd);
            key_a_ = a;
            key_b_ = b;
            valid_ = true;
        }
        return regions_;
    }

private:
    double threshold_;
    bool valid_ = false;
    Cx key_a_{}, key_b_{};
    StandardRegions regions_;
};

/// Inner solve on the curve Sigma = {F_{a,b}^{k+l}(a) = 0}: given b, find a
/// near a_seed with the Sigma equation satisfied (1D damped Newton, FD slope).
template <class C>
C sigma_inner_solve(const C& b, const C& a_seed, int k, int l) {
    using T = num_traits<C>;
    using R = typename T::real_t;
    auto r1 = [&](const C& a) { return CubicPoly<C>(a, b).iterate(a, k + l); };
    C a = a_seed;
    R fa = T::abs(r1(a));
    for (int it = 0; it < 80; ++it) {
        if (T::to_double(fa) < 1e-12) return a;
        const R h = T::from_double(1e-7 * std::max(1.0, T::to_double(T::abs(a))));
        const C d = (r1(a + h) - r1(a - h)) / (R(2) * h);
        if (T::to_double(T::abs(d)) < 1e-30) throw DerivativeVanished("sigma inner solve");
        const C step = r1(a) / d;
        R t = R(1);
        C a2 = a - step;
        R f2 = T::abs(r1(a2));
        for (int hh = 0; hh < 20 && !(f2 < fa); ++hh) {
            t = t / R(2);
            a2 = a - t * step;
            f2 = T::abs(r1(a2));
        }
        a = a2;
        fa = f2;
    }
    throw NoConvergence("sigma inner solve stalled", T::to_double(fa), 80);
}

} // namespace detail

/// One Key-Proposition step: the source, the zero index m, the perturbed
/// target with exchanged critical-point roles, and the verified inverse chain.
template <class C = Cx>
struct PerturbationStep {
    CubicPoly<C> source;
    int m = 0;
    int m_used = 0;
    CubicPoly<C> target;                 // roles swapped: a-slot is the new omega
    Configuration target_config;         // (m+l, k+l) with j carried by the caller
    std::vector<C> omega_chain;          // of the target, omega_0 .. omega_{-m}
    bool role_swap = true;
    double sigma_zero_magnitude = 0.0;   // |t_m| in the b coordinate
};

namespace detail {
template <class C>
PerturbationStep<C> perturb_once(const CubicPoly<C>& f, int k, int l, int m, double tol);
}

/// Perturb an admissible f with (k,l)-configuration into g with
/// (m+l, k+l)-configuration and exchanged critical-point roles.
///
/// The zero of sigma_m is located by walking the Sigma curve: a broad ring
/// scan around b (inner-solving a per sample), local minima of the residual
/// polished by 1D Newton, then the full two-variable system
///   G(a,b) = (F^{k+l}(a), F^l(b) - omega_{-m}(F))
/// tightened with region-based inverse branches. Among the polished zeros the
/// smallest |t| is kept (ties: larger Im c1). If no zero is found for m the
/// next few m values are tried (the Rouche threshold is not effective).
template <class C = Cx>
PerturbationStep<C> perturb(const CubicPoly<C>& f, const Configuration& cfg, int m,
                            double tol = 1e-10) {
    using T = num_traits<C>;
    const int k = cfg.k, l = cfg.l;
    for (int mm = m; mm <= m + 5; ++mm) {
        try {
            PerturbationStep<C> step = detail::perturb_once<C>(f, k, l, mm, tol);
            step.m = m;
            step.m_used = mm;
            return step;
        } catch (const NoConvergence&) {
            if (mm == m + 5) throw;
        }
    }
    throw NoConvergence("perturb: no admissible zero found", 0.0, 0);
}

namespace detail {

template <class C>
PerturbationStep<C> perturb_once(const CubicPoly<C>& f, int k, int l, int m, double tol) {
    using T = num_traits<C>;
    using R = typename T::real_t;
    const C a0 = f.a(), b0 = f.b();

    // h(b) = F^l(b) - omega_{-m}(F) along Sigma, with the scan-mode chain
    auto h_of = [&](const C& b, const C& a_seed) -> std::pair<C, C> {
        const C a = sigma_inner_solve<C>(b, a_seed, k, l);
        const CubicPoly<C> g(a, b);
        return {g.iterate(b, l) - omega_minus_smallroot<C>(g, m), a};
    };

    // ring scan, outward continuation per ray of phases
    constexpr int NR = 72, NP = 64;
    std::vector<double> radii(NR);
    for (int i = 0; i < NR; ++i)
        radii[i] = 1e-6 * std::pow(0.35 / 1e-6, static_cast<double>(i) / (NR - 1));
    struct Cell {
        double v = std::numeric_limits<double>::infinity();
        C b{}, a{};
    };
    std::vector<Cell> grid(NR * NP);
    auto scan_ray = [&](std::size_t jp) {
        const double ph = 2.0 * M_PI * static_cast<double>(jp) / NP;
        const C dir = T::make(std::cos(ph), std::sin(ph));
        C aprev = a0;
        for (int ir = 0; ir < NR; ++ir) {
            const C b = b0 + T::from_double(radii[ir]) * dir;
            try {
                auto [hv, a] = h_of(b, aprev);
                aprev = a;
                grid[ir * NP + jp] = {T::to_double(T::abs(hv)), b, a};
            } catch (const Error&) {
                break;
            }
        }
    };
    parallel_for(NP, scan_ray, 1);

    // grid-local minima (8-neighborhood, phases cyclic)
    std::vector<std::pair<double, int>> cands;
    for (int ir = 0; ir < NR; ++ir) {
        for (int jp = 0; jp < NP; ++jp) {
            const double v = grid[ir * NP + jp].v;
            if (!std::isfinite(v)) continue;
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di) {
                const int i2 = ir + di;
                if (i2 < 0 || i2 >= NR) continue;
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int j2 = ((jp + dj) % NP + NP) % NP;
                    if (grid[i2 * NP + j2].v < v) { is_min = false; break; }
                }
            }
            if (is_min) cands.emplace_back(v, ir * NP + jp);
        }
    }
    std::sort(cands.begin(), cands.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    // polish each candidate basin by 1D complex Newton in b
    struct Zero {
        C b{}, a{};
        double tmag = 0.0;
        double im_c1 = 0.0;
    };
    std::vector<Zero> zeros;
    const int limit = std::min<std::size_t>(cands.size(), 40);
    for (int q = 0; q < limit && static_cast<int>(zeros.size()) < 6; ++q) {
        C b = grid[cands[q].second].b;
        C aseed = grid[cands[q].second].a;
        bool ok = true;
        double hv_last = 0.0;
        for (int it = 0; it < 40; ++it) {
            std::pair<C, C> hv;
            try {
                hv = h_of(b, aseed);
            } catch (const Error&) {
                ok = false;
                break;
            }
            aseed = hv.second;
            hv_last = T::to_double(T::abs(hv.first));
            if (hv_last <= 1e-11) break;
            const R dh = T::from_double(1e-7 * std::max(1.0, T::to_double(T::abs(b))));
            C d;
            try {
                d = (h_of(b + dh, aseed).first - h_of(b - dh, aseed).first) / (R(2) * dh);
            } catch (const Error&) {
                ok = false;
                break;
            }
            if (T::to_double(T::abs(d)) < 1e-30) { ok = false; break; }
            const C step = hv.first / d;
            R t = R(1);
            bool improved = false;
            for (int hh = 0; hh < 20; ++hh) {
                try {
                    const auto h2 = h_of(b - t * step, aseed);
                    if (T::to_double(T::abs(h2.first)) < hv_last) { improved = true; break; }
                } catch (const Error&) {
                }
                t = t / R(2);
            }
            if (!improved) { ok = false; break; }
            b = b - t * step;
        }
        if (!ok || hv_last > 1e-11) continue;
        const C a = sigma_inner_solve<C>(b, aseed, k, l);
        const CubicPoly<C> g(a, b);
        // reject the degenerate zero at t = 0 (the unperturbed polynomial)
        if (T::to_double(T::abs(g.iterate(b, l))) <= 10 * tol) continue;
        bool dup = false;
        for (const auto& z : zeros)
            if (T::to_double(T::abs(z.b - b)) < 1e-8) dup = true;
        if (dup) continue;
        zeros.push_back({b, a, T::to_double(T::abs(b - b0)), T::to_double(T::im(g.c1()))});
    }
    if (zeros.empty()) throw NoConvergence("perturb: sigma_m zero not found in scan", 0.0, 0);

    std::sort(zeros.begin(), zeros.end(), [](const Zero& x, const Zero& y) {
        const double rx = std::round(x.tmag * 1e9), ry = std::round(y.tmag * 1e9);
        if (rx != ry) return rx < ry;
        return x.im_c1 > y.im_c1;
    });
    const Zero& best = zeros.front();

    // final full system with the region-based inverse branch
    RegionCache cache;
    auto G = [&](const C& a, const C& b) -> std::pair<C, C> {
        const CubicPoly<C> g(a, b);
        const auto& regions = cache.get(g);
        const auto chain = omega_minus_chain<C>(g, m, regions);
        return {g.iterate(a, k + l), g.iterate(b, l) - chain.back()};
    };
    const auto sol = newton_2c<C>(G, best.a, best.b, tol, 60);
    const CubicPoly<C> gsol(sol.a, sol.b);

    // cross-check the scan proxy against the region-based branch
    {
        const auto& regions = cache.get(gsol);
        const auto chain = omega_minus_chain<C>(gsol, m, regions);
        const C proxy = omega_minus_smallroot<C>(gsol, m);
        if (T::to_double(T::abs(chain.back() - proxy)) > 1e-8)
            throw ConfigurationMismatch("inverse-branch selections disagree at the solution");
    }
    if (T::to_double(T::abs(gsol.iterate(sol.b, l))) <= tol)
        throw NoConvergence("perturb: converged to the unperturbed solution", 0.0, 0);

    PerturbationStep<C> out{f, m, m, gsol.swapped(), Configuration{0, m + l, k + l},
                            omega_minus_chain<C>(gsol, m, cache.get(gsol)), true,
                            T::to_double(T::abs(sol.b - b0))};
    // verify the transferred configuration by direct iteration on the swapped roles
    const auto res = config_residual<C>(out.target.a(), out.target.b(), m + l, k + l);
    const double r1 = T::to_double(T::abs(res.first));
    const double r2 = T::to_double(T::abs(res.second));
    if (r1 > 1e-6 || r2 > 1e-6)
        throw ConfigurationMismatch("perturb: (m+l, k+l) configuration residual " +
                                    std::to_string(std::max(r1, r2)));
    const int viol = minimality_violation(out.target, m + l, k + l, 1e-8);
    if (viol >= 0) throw NonMinimal(viol);
    return out;
}

} // namespace detail

} // namespace wander
