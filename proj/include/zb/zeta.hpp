#pragma once

#include <complex>
#include <string>
#include <vector>

#include "zb/branch.hpp"
#include "zb/group.hpp"

namespace zb {

// Finite Euler-product truncation of the Selberg zeta function
//   Z(s) = prod_{gamma primitive} prod_{k>=0} (1 - e^{-(s+k) l(gamma)})
// over an explicit class list, with the k-product cut at k <= depth.
struct ZetaTruncation {
  std::vector<ConjClass> classes;  // classes actually multiplied, sorted
  double class_length_cap = 0.0;   // largest translation length considered
  int ball_cutoff = 0;             // word-ball radius behind the class list
  int depth = 0;                   // K: k runs over 0..K
  std::complex<double> s{0.0, 0.0};
  std::complex<double> value{1.0, 0.0};
  double bound = 0.0;  // heuristic k-tail estimate for the given classes
};

// Literal finite double product over the supplied classes.  Requires
// Re s > 0; the class list is taken as-is (primitive representatives).
ZetaTruncation selberg_zeta_truncated(const std::vector<ConjClass>& classes,
                                      std::complex<double> s, int depth);

// One comparison point det(I - M_s) vs Z_trunc(s).
struct ZetaComparisonRow {
  std::complex<double> s{0.0, 0.0};
  std::complex<double> det{0.0, 0.0};   // Fredholm determinant, pruned system
  std::complex<double> zeta{0.0, 0.0};  // truncation under chosen convention
  double abs_err = 0.0;                 // |det - zeta|
  double rel_err = 0.0;                 // |det/zeta - 1|
  double tail_bound = 0.0;              // k-tail + class-truncation estimate
};

struct ZetaComparison {
  std::vector<ZetaComparisonRow> rows;  // one per requested s, input order
  // Orientation bookkeeping: class enumeration counts gamma and gamma^{-1}
  // separately; some cross sections see each unoriented geodesic once.  The
  // harness evaluates both conventions and reports the better match.
  bool orientation_merged = false;  // true: one class per inverse pair
  bool squaring_detected = false;   // true when full enumeration = match^2
  std::string note;                 // human-readable convention summary
  std::vector<ConjClass> classes;   // classes used (chosen convention)
  std::vector<ConjClass> shell;     // longer classes behind the tail estimate
  double class_length_cap = 0.0;
  int ball_cutoff = 0;
  int depth = 0;
  int order = 0;
};

// Independent cross-check of the determinant against the zeta truncation on a
// pruned branch system.  Enumerates primitive classes of `base` with length
// <= L_max (ball radius = base.word_cutoff), assembles the transfer operator
// at collocation order `order` for each s, and selects the orientation
// convention that matches best over the whole s list.  The tail bound per row
// combines the k-tail of the kept classes with twice the exactly-enumerated
// contribution of classes in (L_max, 1.6 L_max].
ZetaComparison compare_det_vs_zeta(const BranchSystem& pruned,
                                   const GroupPresentation& base,
                                   const std::vector<std::complex<double>>& ss,
                                   int order, double L_max, int depth);

}  // namespace zb
