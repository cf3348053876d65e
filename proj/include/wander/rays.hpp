#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "angle.hpp"
#include "cubic.hpp"
#include "parallel.hpp"

namespace wander {

struct TraceOptions {
    int substeps = 24;           // nodes per potential tripling (3^{1/24} ratio)
    double start_potential = 2.0;
    double end_potential = 1e-8;
    double newton_step_tol = 3e-14;  // relative position stop
    int newton_max_iter = 80;
    double jump_factor = 10.0;       // bifurcation guard: jump vs local spacing
    double jump_floor = 3e-5;        // absolute part, relative to 1+|z|
    double min_asymptotic_potential = 18.0;
    double landing_tolerance = 1e-7;
};

/// Green potential G(z) = lim 3^{-n} log |f^n(z)|, computed by iterating to
/// |z| > 1e8 and applying one correction term. Non-escaping points return 0.
template <class C = Cx>
double potential(const CubicPoly<C>& f, C z, int budget = 10000) {
    using T = num_traits<C>;
    double pow3 = 1.0;
    for (int n = 0; n < budget; ++n) {
        const double az = T::to_double(T::abs(z));
        if (az > 1e8) {
            // log|f(z)| = 3 log|z| + log|1 + c2/z + c1/z^2|
            const C corr = C(1) + f.c2() / z + f.c1() / (z * z);
            const double c = std::log(std::abs(to_cx(corr)));
            return (std::log(az) + c / 3.0) / pow3;
        }
        z = f(z);
        pow3 *= 3.0;
        if (!T::finite(z)) return 0.0;
    }
    return 0.0;
}

/// External rays for a tripling-closed family of angles, traced together by
/// Newton pullback down one shared potential ladder. Node (row i, angle t)
/// satisfies f(node) = node(row i - substeps, angle 3t); the top of the ladder
/// is seeded from the Boettcher asymptotics at large potential. Results are
/// bitwise-identical for any thread count.
class RayFamily {
public:
    static RayFamily trace(const CubicPolynomial& f, const std::vector<CircleAngle>& seed_angles,
                           const TraceOptions& opt = {}) {
        RayFamily fam(f);
        // closure under tripling
        std::map<CircleAngle, int> index;
        for (const auto& t : seed_angles) {
            if (!index.count(t)) {
                index.emplace(t, static_cast<int>(fam.angles_.size()));
                fam.angles_.push_back(t);
            }
        }
        for (std::size_t i = 0; i < fam.angles_.size(); ++i) {
            const CircleAngle t3 = fam.angles_[i].tripled();
            if (!index.count(t3)) {
                index.emplace(t3, static_cast<int>(fam.angles_.size()));
                fam.angles_.push_back(t3);
            }
        }
        fam.next_.resize(fam.angles_.size());
        for (std::size_t i = 0; i < fam.angles_.size(); ++i)
            fam.next_[i] = index.at(fam.angles_[i].tripled());
        fam.index_ = std::move(index);
        fam.run(opt);
        return fam;
    }

    const CubicPolynomial& poly() const { return f_; }
    const std::vector<CircleAngle>& angles() const { return angles_; }
    const std::vector<double>& potentials() const { return pots_; }
    std::size_t rows() const { return rows_.size(); }

    bool has(const CircleAngle& t) const { return index_.count(t) != 0; }

    /// Node of the ray of angle t at ladder row r (0 = start potential).
    Cx node(const CircleAngle& t, std::size_t r) const { return rows_[r][index_.at(t)]; }

    /// Full polyline of one ray, top (start potential) first.
    std::vector<Cx> ray(const CircleAngle& t) const {
        const int j = index_.at(t);
        std::vector<Cx> out(rows_.size());
        for (std::size_t r = 0; r < rows_.size(); ++r) out[r] = rows_[r][j];
        return out;
    }

    /// Row index whose potential is nearest to p.
    std::size_t row_at(double p) const {
        std::size_t best = 0;
        double bd = std::abs(pots_[0] - p);
        for (std::size_t r = 1; r < pots_.size(); ++r) {
            const double d = std::abs(pots_[r] - p);
            if (d < bd) { bd = d; best = r; }
        }
        return best;
    }

private:
    explicit RayFamily(const CubicPolynomial& f) : f_(f) {}

    void run(const TraceOptions& opt) {
        const int SUB = opt.substeps;
        const double scale = 1.0 + std::abs(f_.boettcher_a0()) + std::abs(f_.boettcher_a1());
        const double tmin = opt.min_asymptotic_potential + std::log(scale);
        const int K = std::max(1, static_cast<int>(std::ceil(std::log(tmin / opt.start_potential) / std::log(3.0))));
        const double T = opt.start_potential * std::pow(3.0, K);
        const double rho = std::pow(3.0, 1.0 / SUB);
        const int n_steps = SUB * K +
            static_cast<int>(std::ceil(SUB * std::log(opt.start_potential / opt.end_potential) / std::log(3.0)));
        const int start_row = SUB * K;
        const std::size_t n = angles_.size();

        std::vector<std::vector<Cx>> ring(SUB + 1);
        std::vector<double> ring_pot(SUB + 1);
        // asymptotic init for rows 0..SUB
        const Cx a0 = f_.boettcher_a0(), a1 = f_.boettcher_a1();
        for (int i = 0; i <= SUB; ++i) {
            const double pot = T * std::pow(rho, -i);
            ring_pot[i % (SUB + 1)] = pot;
            auto& row = ring[i % (SUB + 1)];
            row.resize(n);
            for (std::size_t j = 0; j < n; ++j) {
                const Cx w = std::exp(Cx(pot, 2.0 * M_PI * angles_[j].value()));
                row[j] = w + a0 + a1 / w;
            }
        }
        std::vector<Cx> prev = ring[SUB % (SUB + 1)];
        std::vector<Cx> prev2 = ring[(SUB - 1) % (SUB + 1)];
        auto keep = [&](int i, const std::vector<Cx>& row, double pot) {
            if (i >= start_row) {
                pots_.push_back(pot);
                rows_.push_back(row);
            }
        };
        for (int i = start_row; i <= SUB; ++i)
            keep(i, ring[i % (SUB + 1)], T * std::pow(rho, -i));
        std::vector<Cx> cur(n);
        for (int i = SUB + 1; i <= n_steps; ++i) {
            const double pot = T * std::pow(rho, -i);
            // target row is i - SUB, held in ring slot (i - SUB) % (SUB + 1)
            const auto& target_row = ring[(i - SUB) % (SUB + 1)];
            auto solve = [&](std::size_t j) {
                const Cx target = target_row[next_[j]];
                Cx z = prev[j];
                const double tol = opt.newton_step_tol;
                for (int it = 0; it < opt.newton_max_iter; ++it) {
                    const Cx v = f_(z) - target;
                    const Cx d = f_.deriv(z);
                    if (std::abs(d) < 1e-30) throw DerivativeVanished("ray cascade: f' vanished");
                    const Cx step = v / d;
                    z -= step;
                    if (std::abs(step) <= tol * (1.0 + std::abs(z))) break;
                }
                const double jump = std::abs(z - prev[j]);
                const double spacing = std::abs(prev[j] - prev2[j]);
                if (jump > opt.jump_factor * spacing + opt.jump_floor * (1.0 + std::abs(prev[j])))
                    throw RayBifurcationSuspected(
                        "ray " + angles_[j].str() + ": jump " + std::to_string(jump) +
                        " vs spacing " + std::to_string(spacing) + " at potential " + std::to_string(pot));
                cur[j] = z;
            };
            parallel_for(n, solve, 512);
            ring[i % (SUB + 1)] = cur;
            keep(i, cur, pot);
            prev2.swap(prev);
            prev = cur;
        }
    }

    CubicPolynomial f_;
    std::vector<CircleAngle> angles_;
    std::vector<int> next_;
    std::map<CircleAngle, int> index_;
    std::vector<double> pots_;           // potentials of kept rows (start downward)
    std::vector<std::vector<Cx>> rows_;  // kept rows
};

/// Polyline approximation of one external ray with landing estimate.
struct TracedRay {
    CircleAngle angle;
    std::vector<double> potentials;  // strictly decreasing
    std::vector<Cx> points;
    std::optional<Cx> landing;
    double landing_spread = 0.0;

    /// Diameter of the last n nodes.
    double tail_spread(std::size_t n = 10) const {
        const std::size_t m = points.size();
        const std::size_t lo = m > n ? m - n : 0;
        double s = 0.0;
        for (std::size_t i = lo; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j)
                s = std::max(s, std::abs(points[i] - points[j]));
        return s;
    }
};

/// Trace a single ray from start_potential down to end_potential. The angle's
/// forward orbit under tripling is traced alongside (the pullback needs it).
inline TracedRay trace_ray(const CubicPolynomial& f, const CircleAngle& theta,
                           double start_potential, double end_potential,
                           TraceOptions opt = {}) {
    opt.start_potential = start_potential;
    opt.end_potential = end_potential;
    const RayFamily fam = RayFamily::trace(f, {theta}, opt);
    TracedRay out;
    out.angle = theta;
    out.potentials = fam.potentials();
    out.points = fam.ray(theta);
    out.landing_spread = out.tail_spread();
    if (out.landing_spread < opt.landing_tolerance && !out.points.empty())
        out.landing = out.points.back();
    return out;
}

/// Landing point with spread-driven refinement: end potential is divided by 10
/// (up to 6 times) until the tail spread meets tol; stops early at the double
/// precision noise floor.
inline Cx landing_point(const CubicPolynomial& f, const CircleAngle& theta, double tol,
                        TraceOptions opt = {}) {
    double end = 1e-3;
    double best_spread = std::numeric_limits<double>::infinity();
    Cx best{};
    double prev_spread = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 7; ++pass) {
        opt.end_potential = end;
        opt.landing_tolerance = tol;
        const TracedRay r = trace_ray(f, theta, opt.start_potential, end, opt);
        const double s = r.tail_spread();
        if (s < best_spread) { best_spread = s; best = r.points.back(); }
        if (s < tol) return r.points.back();
        if (pass > 0 && s > 0.5 * prev_spread && end < 1e-5) break; // noise floor
        prev_spread = s;
        end /= 10.0;
    }
    if (best_spread <= tol) return best;
    throw LandingUnresolved("landing unresolved for angle " + theta.str(), best_spread);
}

/// Open region bounded by two external rays landing at a common point.
/// Membership is a crossing-parity test of the segment [z, witness] against
/// the boundary polyline; the witness is a fixed interior point.
struct RayRegion {
    CircleAngle angle1, angle2;
    std::vector<Cx> boundary;        // far -> landing -> far
    std::vector<double> local_space; // per-vertex spacing for the proximity guard
    Cx common_landing{};
    Cx witness{};
    bool contains_zero_side = false;

    bool contains(const Cx& z) const {
        guard_proximity(z);
        return crossings(z, witness) % 2 == 0;
    }

    /// Count crossings of segment [p, q] with the boundary. Signs use a
    /// half-open convention (zero classed as negative side) so a polyline
    /// vertex lying exactly on the segment is counted once, not zero or twice.
    int crossings(const Cx& p, const Cx& q) const {
        int count = 0;
        const Cx d = q - p;
        for (std::size_t i = 0; i + 1 < boundary.size(); ++i) {
            const Cx a = boundary[i], b = boundary[i + 1];
            const Cx e = b - a;
            const bool s1 = cross(d, a - p) > 0, s2 = cross(d, b - p) > 0;
            const bool t1 = cross(e, p - a) > 0, t2 = cross(e, q - a) > 0;
            if (s1 != s2 && t1 != t2) ++count;
        }
        return count;
    }

    void guard_proximity(const Cx& z) const {
        for (std::size_t i = 0; i + 1 < boundary.size(); ++i) {
            const double guard = 2.0 * local_space[i];
            // endpoint distance bounds segment distance from below by |d| - seg_len
            if (std::abs(z - boundary[i]) > local_space[i] + guard) continue;
            if (dist_segment(z, boundary[i], boundary[i + 1]) < guard) throw TooCloseToBoundary();
        }
    }

    static double cross(const Cx& u, const Cx& v) {
        return u.real() * v.imag() - u.imag() * v.real();
    }
    static double dist_segment(const Cx& z, const Cx& a, const Cx& b) {
        const Cx ab = b - a;
        const double len2 = std::norm(ab);
        if (len2 == 0.0) return std::abs(z - a);
        double t = ((z - a).real() * ab.real() + (z - a).imag() * ab.imag()) / len2;
        t = std::clamp(t, 0.0, 1.0);
        return std::abs(z - (a + t * ab));
    }
};

/// Build the region bounded by the rays of two angles that land together.
/// Raises CommonLandingFailed if the landings disagree.
inline RayRegion make_region(const CubicPolynomial& f, const CircleAngle& t1, const CircleAngle& t2,
                             const Cx& witness, double landing_agreement = 1e-4,
                             TraceOptions opt = {}) {
    opt.start_potential = 4.0;
    opt.end_potential = 1e-6;
    const RayFamily fam = RayFamily::trace(f, {t1, t2}, opt);
    const std::vector<Cx> r1 = fam.ray(t1);
    const std::vector<Cx> r2 = fam.ray(t2);
    const Cx l1 = r1.back(), l2 = r2.back();
    const double scale = 1.0 + std::abs(l1);
    if (std::abs(l1 - l2) > landing_agreement * scale)
        throw CommonLandingFailed("rays " + t1.str() + ", " + t2.str() + " land apart by " +
                                  std::to_string(std::abs(l1 - l2)));
    RayRegion reg;
    reg.angle1 = t1;
    reg.angle2 = t2;
    reg.common_landing = 0.5 * (l1 + l2);
    reg.boundary.reserve(r1.size() + r2.size() + 1);
    reg.boundary.insert(reg.boundary.end(), r1.begin(), r1.end());
    reg.boundary.push_back(reg.common_landing);
    reg.boundary.insert(reg.boundary.end(), r2.rbegin(), r2.rend());
    reg.local_space.resize(reg.boundary.size());
    for (std::size_t i = 0; i + 1 < reg.boundary.size(); ++i)
        reg.local_space[i] = std::abs(reg.boundary[i + 1] - reg.boundary[i]);
    if (!reg.local_space.empty()) reg.local_space.back() = reg.local_space[reg.local_space.size() - 2];
    reg.witness = witness;
    reg.contains_zero_side = false;
    try {
        reg.contains_zero_side = reg.contains(Cx(0, 0));
    } catch (const TooCloseToBoundary&) {
    }
    return reg;
}

/// The four standard regions of the ray configuration: U_alpha / U_beta
/// (bounded by the angle +-1/4 rays through gamma) and W / V (angles +-5/12
/// and +-5/36). f maps V isomorphically onto W; build() checks this on
/// boundary samples.
struct StandardRegions {
    RayRegion U_alpha, U_beta, W, V;
};

inline StandardRegions build_standard_regions(const CubicPolynomial& f, TraceOptions opt = {}) {
    // interior witnesses: points on the invariant rays at moderate potential
    opt.end_potential = 1e-3;
    const TracedRay ray0 = trace_ray(f, CircleAngle(0, 1), 1.0, 1e-3, opt);
    const TracedRay rayh = trace_ray(f, CircleAngle(1, 2), 1.0, 1e-3, opt);
    const Cx w_alpha = ray0.points.back();  // near alpha, inside U_alpha, V and W
    const Cx w_beta = rayh.points.back();   // near beta, inside U_beta

    StandardRegions out{
        make_region(f, CircleAngle(1, 4), CircleAngle(3, 4), w_alpha),
        make_region(f, CircleAngle(1, 4), CircleAngle(3, 4), w_beta),
        make_region(f, CircleAngle(5, 12), CircleAngle(7, 12), w_alpha),
        make_region(f, CircleAngle(5, 36), CircleAngle(31, 36), w_alpha)};

    // V maps onto W: forward-map sample V-boundary nodes and check they lie on
    // the W boundary within tolerance
    const auto& vb = out.V.boundary;
    for (std::size_t i = 24; i + 25 < vb.size(); i += std::max<std::size_t>(1, vb.size() / 24)) {
        const Cx img = f(vb[i]);
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j + 1 < out.W.boundary.size(); ++j)
            dmin = std::min(dmin, RayRegion::dist_segment(img, out.W.boundary[j], out.W.boundary[j + 1]));
        if (dmin > 1e-3 * (1.0 + std::abs(img)))
            throw CommonLandingFailed("f(V boundary) misses W boundary by " + std::to_string(dmin));
    }
    return out;
}

} // namespace wander
