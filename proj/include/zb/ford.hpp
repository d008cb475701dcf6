#pragma once

#include <vector>

#include "zb/group.hpp"
#include "zb/isometric.hpp"
#include "zb/report.hpp"

namespace zb {

struct NoSpheres : Error {
  explicit NoSpheres(const std::string& m) : Error(m) {}
};
struct PairingIncomplete : Error {
  explicit PairingIncomplete(const std::string& m) : Error(m) {}
};

// Point of the closed upper half-plane; y = 0 marks a boundary endpoint.
struct ArcPoint {
  double x = 0.0, y = 0.0;
};

// Maximal arc of one sphere on the boundary of the common exterior K.
struct EnvelopeSide {
  IsometricSphere sphere;
  ArcPoint left, right;
  Moebius pairing;  // generator g; the partner side belongs to g^{-1}
};

struct DomainVertex {
  HPoint p;
  int left_side = -1, right_side = -1;
  double angle = 0.0;  // interior angle of K at p
};

struct FordDomain {
  std::vector<EnvelopeSide> sides;  // ordered left to right
  double alpha = 0.0, beta = 0.0;   // tight horizontal extent of the envelope
  std::vector<DomainVertex> vertices;

  // Signed exterior margin: min over spheres of dist(z, sphere) - radius.
  // Nonnegative iff z lies in the common exterior of `spheres`.
  static double exterior_margin(const std::vector<IsometricSphere>& spheres,
                                const HPoint& z);
  // Envelope height over x (0 over real gaps / outside all shadows).
  double height(double x) const;
};

// Pointwise-maximum envelope of the circle-height functions; breakpoint sweep
// with midpoint dominance.  Input is deduplicated by (center, radius).
FordDomain upper_envelope(const std::vector<IsometricSphere>& spheres,
                          double eps = kEps);

struct RelevantSet {
  std::vector<IsometricSphere> spheres;
  // Set unchanged when recomputed from the (N-1)-ball; instability signals a
  // too-small cutoff and is reported by callers, not asserted.
  bool stable = true;
};

RelevantSet relevant_set(const GroupPresentation& pres, const WordBall& ball);

struct VertexCycle {
  std::vector<HPoint> vertices;
  std::vector<double> angles;
  double angle_sum = 0.0;
  int omega = 0;  // 0 = absent (2*pi / angle_sum not near an integer)
  double height_discrepancy = 0.0;
};

// Cycles computed by following side pairings g: vertex -> g.vertex until the
// walk closes.  Throws PairingIncomplete when an image vertex or the partner
// side is missing from the domain.
std::vector<VertexCycle> vertex_cycles(const FordDomain& domain, double eps = kEps);

// Every side's summit must lie in the relative interior of its arc.
Report check_condition_A(const FordDomain& domain, double eps = kEps);

// ISO8 side-pairing consistency: for each side of g the partner side of g^{-1}
// exists and g maps the one arc onto the other endpoint-to-endpoint.
Report check_side_pairing(const FordDomain& domain, double eps = kEps);

// Fundamental-domain spot checks on the funnel-only case: (a) no ball element
// moves a sampled interior point of K to another interior point; (b) sampled
// points of H are covered by ball-translates of the closure (coverage is
// cutoff-limited and reported, not asserted).
Report spotcheck_fundamental(const FordDomain& domain,
                             const GroupPresentation& pres, const WordBall& ball,
                             int samples);

}  // namespace zb
