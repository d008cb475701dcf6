#pragma once

#include <optional>
#include <utility>

#include "zb/ford.hpp"

namespace zb {

struct ParabolicDetected : Error {
  explicit ParabolicDetected(const std::string& m) : Error(m) {}
};
struct ConditionStarFails : Error {
  explicit ConditionStarFails(const std::string& m) : Error(m) {}
};

// Funnel-only group extended by a horizontal translation t: z -> z + lambda
// pairing the walls of the strip (alpha', beta').  The quotient by the
// extended group is compact-boundary-friendly: every relevant sphere of the
// base group lies strictly inside the strip.
struct AuxiliaryGroup {
  GroupPresentation base;
  double alpha = 0.0, beta = 0.0;          // tight envelope extent of the base
  double alpha_prime = 0.0, beta_prime = 0.0;  // strip walls
  double lambda = 0.0;                     // beta_prime - alpha_prime
  Moebius t_lambda;
  GroupPresentation presentation_W;  // relevant-sphere generators plus t
  FordDomain domain_W;               // base envelope (entirely inside the strip)
  std::vector<IsometricSphere> relevant;
};

// Tight horizontal extent of the envelope: min(center - radius) and
// max(center + radius) over the domain's spheres.
std::pair<double, double> bounds_alpha_beta(const FordDomain& domain);

// Builds the extended group from the base ball.  Wall positions default to
// alpha - m, beta + m with m = half the maximal relevant radius; an explicit
// (alpha', beta') override must satisfy alpha' < alpha <= beta < beta'.
// Throws ParabolicDetected when the base ball contains a parabolic and
// ConditionStarFails when a nontrivial base element fixes infinity (the
// envelope then cannot leave a neighborhood of infinity uncovered).
AuxiliaryGroup build_auxiliary(
    const GroupPresentation& base, int cutoff,
    const std::optional<std::pair<double, double>>& wall_override = {});

// Four named checks over the extended group's N-ball:
//   stabilizer_of_infinity  only powers of t fix infinity
//   rel_preserved           envelope sides meeting the open strip carry
//                           exactly the base relevant spheres (plus stability
//                           of the relevant set under cutoff reduction)
//   ford_type               strip-restricted common exterior of the extended
//                           ball's spheres equals the base domain, sampled
//   condition_A             summit interiority for the strip sides
Report verify_auxiliary(const AuxiliaryGroup& aux, int N, int samples = 200);

}  // namespace zb
