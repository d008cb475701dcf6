#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "zb/auxiliary.hpp"
#include "zb/branch.hpp"
#include "zb/transfer.hpp"

using namespace zb;

namespace {

Moebius hecke_h(double lambda) {
  const double s = 1.0 / (2.0 * std::sqrt(lambda));
  return Moebius::from_entries(s * (lambda + 1), s * (lambda - 1),
                               s * (lambda - 1), s * (lambda + 1));
}

GroupPresentation hecke_free() {
  GroupPresentation p;
  p.name = "hecke-free-l2";
  p.generators = {{"h", hecke_h(2.0)}, {"s", Moebius::from_entries(0, -1, 1, 0)}};
  return p;
}

GroupPresentation cyclic() {
  GroupPresentation p;
  p.name = "cyclic-l2";
  p.generators = {{"h", hecke_h(2.0)}};
  return p;
}

// Pruned systems for the two lambda = 2 fixtures.
BranchSystem pruned_fixture(bool hecke) {
  GroupPresentation base = hecke ? hecke_free() : cyclic();
  AuxiliaryGroup aux =
      hecke ? build_auxiliary(base, 4,
                              std::make_pair(-(3.0 + 3.0 * std::sqrt(2.0)),
                                             3.0 + 3.0 * std::sqrt(2.0)))
            : build_auxiliary(base, 6);
  BranchSystem sys = build_branch_system(aux);
  sys = compute_transitions(sys, enumerate_ball(aux.presentation_W, 6), 32);
  auto cls = primitive_hyperbolic_classes(base, enumerate_ball(base, 6), 3.0);
  return prune_to_active(sys, cls);
}

// Single self-branch carrying one strongly contracting map: y = [[3,8],[1,3]]
// (attracting fixed point 2*sqrt(2), |y'| there = (3+2*sqrt(2))^-2).
BranchSystem single_branch_system() {
  GroupPresentation g;
  g.name = "single";
  g.generators = {{"y", Moebius::from_entries(3, 8, 1, 3)}};
  BranchSystem sys;
  sys.group = g;
  sys.branches = {make_branch(1, 1.0, Facing::Right)};
  sys.transitions[{1, 1}] = {g.generators[0].mat};
  return sys;
}

}  // namespace

TEST_CASE("chebyshev nodes, weights, lagrange basis") {
  const int n = 8;
  const std::vector<double> nodes = chebyshev_nodes(n);
  REQUIRE(nodes.size() == static_cast<std::size_t>(n));
  for (int a = 0; a + 1 < n; ++a) CHECK(nodes[a] > nodes[a + 1]);
  for (double t : nodes) CHECK(std::abs(t) < 1.0);

  // Cardinal property at the nodes, partition of unity away from them.
  for (int a = 0; a < n; ++a) {
    const std::vector<double> ell = lagrange_basis(n, nodes[a]);
    for (int b = 0; b < n; ++b)
      CHECK(ell[b] == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
  }
  for (double t : {-0.9, -0.3, 0.11, 0.77}) {
    const std::vector<double> ell = lagrange_basis(n, t);
    double sum = 0.0;
    for (double v : ell) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // Reproduces cubics exactly (degree < n).
    double p = 0.0;
    for (int b = 0; b < n; ++b) p += std::pow(nodes[b], 3) * ell[b];
    CHECK(p == doctest::Approx(t * t * t).epsilon(1e-12));
  }
}

TEST_CASE("assemble: 1x1 matrix is the weight at the chart midpoint") {
  BranchSystem sys = single_branch_system();
  const Moebius y = sys.group.generators[0].mat;
  const double fp = 2.0 * std::sqrt(2.0);
  const std::vector<ChartedInterval> charts = {{1, fp - 0.1, fp + 0.1}};
  const std::complex<double> s{2.0, 0.0};
  TransferOperatorMatrix M = assemble(sys, s, 1, charts);
  REQUIRE(M.dim() == 1);
  // Order-1 collocation: the single node sits at the chart midpoint (= fp).
  const double w = deriv_mag(y, BoundaryPoint::at(fp));
  CHECK(M.at(0, 0).real() == doctest::Approx(w * w).epsilon(1e-12));
  CHECK(M.at(0, 0).imag() == 0.0);
  CHECK(fredholm_det(M).det.real() == doctest::Approx(1.0 - w * w).epsilon(1e-12));
}

TEST_CASE("assemble: no transitions gives the zero matrix, det 1") {
  BranchSystem sys = single_branch_system();
  sys.transitions.clear();
  TransferOperatorMatrix M = assemble(sys, {1.0, 0.0}, 4, 1.2);
  for (std::size_t r = 0; r < M.dim(); ++r)
    for (std::size_t c = 0; c < M.dim(); ++c) CHECK(M.at(r, c) == std::complex<double>{0.0, 0.0});
  FredholmResult f = fredholm_det(M);
  CHECK(f.det.real() == doctest::Approx(1.0));
  CHECK(f.det.imag() == 0.0);
}

TEST_CASE("assemble: real s gives a real matrix on the cyclic fixture") {
  BranchSystem pr = pruned_fixture(false);
  TransferOperatorMatrix M = assemble(pr, {1.5, 0.0}, 6, 1.2);
  for (const std::complex<double>& e : M.entries) CHECK(e.imag() == 0.0);
}

TEST_CASE("fredholm_det: closed forms for tiny matrices") {
  TransferOperatorMatrix M;
  M.s = {1.0, 0.0};
  M.order = 1;
  M.charts = {{1, -1.0, 1.0}};
  M.entries = {{0.25, 0.0}};
  FredholmResult f = fredholm_det(M);
  CHECK(f.det.real() == doctest::Approx(0.75).epsilon(1e-15));
  REQUIRE(f.top_eigenvalues.size() == 1);
  CHECK(f.top_eigenvalues[0].real() == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("determinant convergence in the collocation order") {
  // Strong contraction (multiplier ~0.029): doubling the order leaves the
  // determinant unchanged to 10+ significant digits.
  BranchSystem sys = single_branch_system();
  const double fp = 2.0 * std::sqrt(2.0);
  const std::vector<ChartedInterval> charts = {{1, fp - 0.1, fp + 0.1}};
  const std::complex<double> s{2.0, 0.0};
  const std::complex<double> d8 = fredholm_det(assemble(sys, s, 8, charts)).det;
  const std::complex<double> d16 = fredholm_det(assemble(sys, s, 16, charts)).det;
  CHECK(std::abs(d8 / d16 - 1.0) < 1e-10);

  // Weak contraction (multiplier 1/2, hecke fixture): the order-8 and
  // order-16 determinants differ by the genuine spectral tail
  // sum_{k=8..15} 2^-(2+k) ~ 1.94e-3 -- geometric, not super-exponential.
  BranchSystem pr = pruned_fixture(true);
  const std::vector<ChartedInterval> pcharts = build_charts(pr);
  const std::complex<double> p8 = fredholm_det(assemble(pr, s, 8, pcharts)).det;
  const std::complex<double> p16 = fredholm_det(assemble(pr, s, 16, pcharts)).det;
  const double gap = std::abs(p8 / p16 - 1.0);
  CHECK(gap > 1.0e-3);
  CHECK(gap < 3.0e-3);
}

TEST_CASE("determinant is chart-padding independent once converged") {
  BranchSystem pr = pruned_fixture(false);
  const std::complex<double> s{1.5, 0.0};
  std::vector<std::complex<double>> dets;
  for (double padding : {1.05, 1.2, 1.35, 1.5})
    dets.push_back(fredholm_det(assemble(pr, s, 40, build_charts(pr, padding))).det);
  for (std::size_t i = 1; i < dets.size(); ++i)
    CHECK(std::abs(dets[i] - dets[0]) < 1e-8);
}

TEST_CASE("largest eigenvalue magnitude stabilizes between orders 16 and 24") {
  for (bool hecke : {false, true}) {
    BranchSystem pr = pruned_fixture(hecke);
    const std::vector<ChartedInterval> charts = build_charts(pr);
    const std::complex<double> s{2.0, 0.0};
    FredholmResult f16 = fredholm_det(assemble(pr, s, 16, charts));
    FredholmResult f24 = fredholm_det(assemble(pr, s, 24, charts));
    REQUIRE(!f16.top_eigenvalues.empty());
    REQUIRE(!f24.top_eigenvalues.empty());
    CHECK(std::abs(std::abs(f16.top_eigenvalues[0]) -
                   std::abs(f24.top_eigenvalues[0])) < 1e-10);
  }
}

TEST_CASE("contraction check: fixtures pass, an expanding map is flagged") {
  for (bool hecke : {false, true}) {
    BranchSystem pr = pruned_fixture(hecke);
    CheckResult res = check_contraction(pr, build_charts(pr));
    CHECK(res.passed);
    CHECK(res.max_violation <= 0.0);
  }

  BranchSystem bad = single_branch_system();
  const Moebius y = bad.group.generators[0].mat;
  bad.transitions[{1, 1}] = {y.inverse()};  // repels from 2*sqrt(2)
  const double fp = 2.0 * std::sqrt(2.0);
  const std::vector<ChartedInterval> charts = {{1, fp - 0.1, fp + 0.1}};
  CheckResult res = check_contraction(bad, charts);
  CHECK(!res.passed);
  CHECK(res.max_violation > 30.0);  // |y^-1'| ~ (3+2 sqrt 2)^2 ~ 34 there
}

TEST_CASE("assemble rejects charts the transitions do not respect") {
  BranchSystem sys = single_branch_system();
  // Window far from the attracting fixed point: y maps it outside itself.
  const std::vector<ChartedInterval> charts = {{1, 30.0, 40.0}};
  CHECK_THROWS_AS(assemble(sys, {2.0, 0.0}, 4, charts), ChartViolation);
}

TEST_CASE("charts cover the class fixed points of the pruned dynamics") {
  BranchSystem pr = pruned_fixture(false);
  const std::vector<ChartedInterval> charts = build_charts(pr);
  REQUIRE(charts.size() == pr.branches.size());
  // The cyclic fixture's pruned dynamics lives on the h-axis endpoints +-1.
  int holding_plus = 0, holding_minus = 0;
  for (const ChartedInterval& c : charts) {
    CHECK(c.lo < c.hi);
    if (c.contains(1.0)) ++holding_plus;
    if (c.contains(-1.0)) ++holding_minus;
  }
  CHECK(holding_plus == 2);
  CHECK(holding_minus == 2);
}

TEST_CASE("resonance scan: no zeros right of the axis on the fixtures") {
  BranchSystem pr = pruned_fixture(false);
  ResonanceScanResult scan =
      resonance_scan(pr, {0.5, -1.0}, {2.5, 1.0}, 9, 7, 10);
  CHECK(scan.roots.empty());
  CHECK(scan.grid_evaluations == 9 * 7);

  // Doubling the grid density changes nothing.
  ResonanceScanResult dense =
      resonance_scan(pr, {0.5, -1.0}, {2.5, 1.0}, 17, 13, 10);
  CHECK(dense.roots.size() == scan.roots.size());

  BranchSystem none = single_branch_system();
  none.transitions.clear();
  ResonanceScanResult empty =
      resonance_scan(none, {0.5, -1.0}, {2.5, 1.0}, 5, 5, 4);
  CHECK(empty.roots.empty());
  CHECK(empty.failures.empty());
}
