#pragma once

#include <complex>

#include "zb/branch.hpp"

namespace zb {

// A transition element whose image sticks out of the target chart (or whose
// derivative pole lies inside the source chart) cannot be collocated.
struct ChartViolation : Error {
  explicit ChartViolation(const std::string& m) : Error(m) {}
};

// Compact collocation window for one branch: the convex hull of the
// enumerated limit points inside the branch's forward arc, padded by a
// configurable factor (clamped so the window stays inside the arc), then
// closed under the incoming transition images.  The affine chart maps
// [lo, hi] onto [-1, 1].
struct ChartedInterval {
  int branch = 0;
  double lo = 0.0;
  double hi = 1.0;

  double to_chart(double x) const { return (2.0 * x - lo - hi) / (hi - lo); }
  double from_chart(double t) const { return 0.5 * ((hi - lo) * t + lo + hi); }
  bool contains(double x, double tol = 0.0) const {
    return x >= lo - tol && x <= hi + tol;
  }
};

std::vector<ChartedInterval> build_charts(const BranchSystem& sys,
                                          double padding = 1.2);

// Chebyshev nodes of the first kind on (-1, 1), descending, and the matching
// barycentric weights.
std::vector<double> chebyshev_nodes(int order);
std::vector<double> barycentric_weights(int order);

// Values of the `order` Lagrange basis polynomials through the Chebyshev
// nodes at chart coordinate t, by the barycentric formula.
std::vector<double> lagrange_basis(int order, double t);

// Nystrom-collocation matrix of the weighted composition operator
//   (L_s f)_k(x) = sum over (j, g in transitions[j][k]) of |g'(x)|^s f_j(g.x)
// over the per-branch Chebyshev charts.  Rows and columns are indexed by
// (branch block, node); blocks follow the order of sys.branches.
struct TransferOperatorMatrix {
  std::complex<double> s;
  int order = 0;
  std::vector<ChartedInterval> charts;
  std::vector<std::complex<double>> entries;  // row-major dim() x dim()

  std::size_t dim() const { return charts.size() * static_cast<std::size_t>(order); }
  std::complex<double>& at(std::size_t r, std::size_t c) {
    return entries[r * dim() + c];
  }
  const std::complex<double>& at(std::size_t r, std::size_t c) const {
    return entries[r * dim() + c];
  }
};

TransferOperatorMatrix assemble(const BranchSystem& sys, std::complex<double> s,
                                int order,
                                const std::vector<ChartedInterval>& charts);
TransferOperatorMatrix assemble(const BranchSystem& sys, std::complex<double> s,
                                int order, double padding = 1.2);

// det(I - M) by pivoted complex LU, with the largest-magnitude eigenvalue
// estimates of M for diagnostics.
struct FredholmResult {
  std::complex<double> det;
  double log_abs = 0.0;
  std::vector<std::complex<double>> top_eigenvalues;  // at most 5, |.| descending
};

FredholmResult fredholm_det(const TransferOperatorMatrix& M);

// Every transition must contract (non-expansion within tolerance for the
// identity transitions of two-step cycles) on its source chart.
CheckResult check_contraction(const BranchSystem& sys,
                              const std::vector<ChartedInterval>& charts,
                              int samples = 64);

// Grid evaluation of det(I - M_s) over the rectangle [lo, hi], secant
// polishing of strict interior local minima of |det|.  Polished points that
// leave the rectangle are discarded; candidates whose iteration stalls are
// reported in `failures`.
struct ResonanceCandidate {
  std::complex<double> s;
  double residual = 0.0;  // |det(I - M_s)|
  int iterations = 0;
  bool converged = false;
};

struct ResonanceScanResult {
  std::vector<ResonanceCandidate> roots;     // converged, inside rectangle
  std::vector<ResonanceCandidate> failures;  // no convergence
  long grid_evaluations = 0;
};

ResonanceScanResult resonance_scan(const BranchSystem& sys,
                                   std::complex<double> lo,
                                   std::complex<double> hi, int nx, int ny,
                                   int order, double padding = 1.2);

}  // namespace zb
