#pragma once

#include <optional>

#include "zb/group.hpp"
#include "zb/moebius.hpp"
#include "zb/report.hpp"

namespace zb {

struct StabilizesInfinity : Error {
  explicit StabilizesInfinity(const std::string& m) : Error(m) {}
};

// Isometric sphere of a group element: the semicircle where |g'| = 1.
struct IsometricSphere {
  double center = 0.0;
  double radius = 1.0;
  Moebius generator;

  bool same_circle(const IsometricSphere& o, double eps = kEps) const {
    return std::abs(center - o.center) < eps && std::abs(radius - o.radius) < eps;
  }
};

// center = -d/c = g^{-1}.inf, radius = 1/|c|.  Throws StabilizesInfinity when
// |c| < eps (the element fixes infinity and has no isometric sphere).
IsometricSphere sphere_of(const Moebius& g, double eps = kEps);

// Height-maximizing point of the sphere: center + i*radius.
HPoint summit(const IsometricSphere& I);

// Open interval of R under the sphere: (center - radius, center + radius).
BoundaryInterval shadow(const IsometricSphere& I);

// Height of the sphere over x, zero outside the shadow (envelope helper).
double sphere_height(const IsometricSphere& I, double x);

// Designated parabolic data for the translation-compatibility identity.
struct ParabolicMark {
  Moebius t;      // z -> z + lambda
  double lambda;  // translation length along R
};

// Identity suite over every sphere in the ball:
//   iso1_mapping     g.iso(g) = iso(g^{-1}) pointwise on samples
//   iso2_height      Im(g.z) = Im z on samples of iso(g)
//   deriv_on_sphere  |g'| = 1 on samples of iso(g)
//   chain_rule       |(gh)'(z)| = |g'(h.z)| |h'(z)| (relative), g a generator
//   interior_maps_out sampled interior of iso(g) lands outside iso(g^{-1})
//   concentric_pairs  no two distinct spheres share a center within eps
//   translate_shift  iso(g t^n) = t^{-n}.iso(g), n in {-2,-1,1,2} (only when a
//                    parabolic is designated)
// Violations are recorded, not thrown.
Report check_iso_identities(const GroupPresentation& pres, const WordBall& ball,
                            int samples,
                            const std::optional<ParabolicMark>& parabolic = {});

// Desk-scale shadow/limit-set contact report: fraction of ball spheres whose
// shadow contains at least one class fixed point (informational).
CheckResult shadow_limit_report(const GroupPresentation& pres,
                                const WordBall& ball,
                                const std::vector<ConjClass>& classes);

// All distinct isometric spheres of ball elements (identity and other
// infinity-stabilizers skipped), deduplicated by (center, radius); generator
// kept from the first (shortest-word) element producing the circle.
std::vector<IsometricSphere> ball_spheres(const GroupPresentation& pres,
                                          const WordBall& ball);

}  // namespace zb
