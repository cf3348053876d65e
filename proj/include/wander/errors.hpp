#pragma once

#include <stdexcept>
#include <string>

namespace wander {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteInput : Error {
    explicit NonFiniteInput(const std::string& w = "non-finite input") : Error(w) {}
};

struct NoConvergence : Error {
    double residual = 0.0;
    int iterations = 0;
    NoConvergence(const std::string& w, double r = 0.0, int it = 0)
        : Error(w), residual(r), iterations(it) {}
};

struct DerivativeVanished : Error {
    explicit DerivativeVanished(const std::string& w = "derivative vanished at iterate") : Error(w) {}
};

struct SingularJacobian : Error {
    double condition = 0.0;
    explicit SingularJacobian(const std::string& w, double c = 0.0) : Error(w), condition(c) {}
};

struct DegenerateCritical : Error {
    explicit DegenerateCritical(const std::string& w = "critical points coincide") : Error(w) {}
};

/// Orbit left the escape cutoff; carries the step at which it happened.
struct Escaped : Error {
    int step;
    explicit Escaped(int s) : Error("orbit escaped at step " + std::to_string(s)), step(s) {}
};

struct RayBifurcationSuspected : Error {
    explicit RayBifurcationSuspected(const std::string& w) : Error(w) {}
};

struct LandingUnresolved : Error {
    double spread = 0.0;
    explicit LandingUnresolved(const std::string& w, double s = 0.0) : Error(w), spread(s) {}
};

struct NotInW : Error {
    explicit NotInW(const std::string& w = "point not in W region") : Error(w) {}
};

struct AmbiguousBranch : Error {
    int roots_inside;
    explicit AmbiguousBranch(int n)
        : Error("inverse branch: " + std::to_string(n) + " roots inside V"), roots_inside(n) {}
};

struct TooCloseToBoundary : Error {
    explicit TooCloseToBoundary(const std::string& w = "point too close to region boundary") : Error(w) {}
};

struct CommonLandingFailed : Error {
    explicit CommonLandingFailed(const std::string& w) : Error(w) {}
};

struct NonMinimal : Error {
    int index;
    explicit NonMinimal(int i)
        : Error("configuration not minimal: orbit hit at intermediate step " + std::to_string(i)),
          index(i) {}
};

struct ConfigurationMismatch : Error {
    explicit ConfigurationMismatch(const std::string& w) : Error(w) {}
};

struct NoFourRayCluster : Error {
    explicit NoFourRayCluster(const std::string& w) : Error(w) {}
};

struct SeparationFailed : Error {
    explicit SeparationFailed(const std::string& w = "branching point does not separate the test angles") : Error(w) {}
};

struct NotSeparated : Error {
    explicit NotSeparated(const std::string& w = "nodal point coincides with a landing point") : Error(w) {}
};

struct NoTripleCoincidence : Error {
    explicit NoTripleCoincidence(const std::string& w) : Error(w) {}
};

struct StitchingBroken : Error {
    explicit StitchingBroken(const std::string& w) : Error(w) {}
};

/// Exact angle arithmetic left the int64 range.
struct AngleOverflow : Error {
    explicit AngleOverflow(const std::string& w = "circle-angle arithmetic overflow") : Error(w) {}
};

} // namespace wander
