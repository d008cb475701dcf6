#include "zb/transfer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace zb {

namespace {

constexpr double kPi = std::numbers::pi;

// Position of each published branch index inside sys.branches.
std::map<int, std::size_t> branch_positions(const BranchSystem& sys) {
  std::map<int, std::size_t> pos;
  for (std::size_t i = 0; i < sys.branches.size(); ++i)
    pos[sys.branches[i].index] = i;
  return pos;
}

// Monotone image of [lo, hi]; the derivative pole must lie outside.
struct ImageSpan {
  double lo, hi;
  bool has_pole;
};

ImageSpan map_span(const Moebius& g, double lo, double hi, double tol) {
  if (std::abs(g.c) > kEps) {
    const double pole = -g.d / g.c;
    if (pole >= lo - tol && pole <= hi + tol) return {0.0, 0.0, true};
  }
  const BoundaryPoint a = apply_boundary(g, BoundaryPoint::at(lo));
  const BoundaryPoint b = apply_boundary(g, BoundaryPoint::at(hi));
  if (a.infinite || b.infinite) return {0.0, 0.0, true};
  return {std::min(a.x, b.x), std::max(a.x, b.x), false};
}

std::string transition_tag(int j, int k, const Moebius& g) {
  std::ostringstream os;
  os << "(" << j << "," << k << ") g=" << g.str();
  return os.str();
}

}  // namespace

std::vector<double> chebyshev_nodes(int order) {
  std::vector<double> x(order);
  for (int a = 0; a < order; ++a)
    x[a] = std::cos(kPi * (2 * a + 1) / (2.0 * order));
  return x;
}

std::vector<double> barycentric_weights(int order) {
  std::vector<double> w(order);
  for (int a = 0; a < order; ++a) {
    const double v = std::sin(kPi * (2 * a + 1) / (2.0 * order));
    w[a] = (a % 2 == 0) ? v : -v;
  }
  return w;
}

std::vector<double> lagrange_basis(int order, double t) {
  const std::vector<double> x = chebyshev_nodes(order);
  const std::vector<double> w = barycentric_weights(order);
  std::vector<double> ell(order, 0.0);
  for (int a = 0; a < order; ++a) {
    if (std::abs(t - x[a]) < 1e-14) {
      ell[a] = 1.0;
      return ell;
    }
  }
  double denom = 0.0;
  for (int a = 0; a < order; ++a) {
    ell[a] = w[a] / (t - x[a]);
    denom += ell[a];
  }
  for (int a = 0; a < order; ++a) ell[a] /= denom;
  return ell;
}

namespace {

// Periodic points of the branch dynamics x in I_k -> g.x in I_j: fixed
// points of composed maps around simple cycles of the transition graph,
// restricted to the forward arc of the branch they sit on.  These are the
// class fixed points the charts must contain; the full strip-group limit
// set also holds wandering translate orbits (unbounded in the fixtures)
// that would blow the collocation windows up.
std::vector<std::vector<double>> cycle_seed_points(const BranchSystem& sys) {
  const std::map<int, std::size_t> pos = branch_positions(sys);
  struct Edge {
    std::size_t to;
    Moebius g;
  };
  std::vector<std::vector<Edge>> out(sys.branches.size());
  for (const auto& [jk, gs] : sys.transitions) {
    const auto pj = pos.find(jk.first);
    const auto pk = pos.find(jk.second);
    if (pj == pos.end() || pk == pos.end()) continue;
    for (const Moebius& g : gs) out[pk->second].push_back({pj->second, g});
  }

  std::vector<std::vector<double>> seeds(sys.branches.size());
  long budget = 20000;
  std::vector<std::size_t> path_nodes;
  std::vector<Moebius> path_maps;
  std::vector<char> on_path(sys.branches.size(), 0);

  auto record_cycle = [&](std::size_t start) {
    Moebius composed;
    for (const Moebius& g : path_maps) composed = compose(g, composed);
    if (classify(composed, kEps).kind != ElementKind::Hyperbolic) return;
    const FixedPointSet fps = fixed_points(composed);
    for (const BoundaryPoint& fp : {fps.attracting, fps.repelling}) {
      if (fp.infinite) continue;
      if (!circular_contains(sys.branches[start].I, fp)) continue;
      // Walk the orbit of the periodic point along the cycle.
      BoundaryPoint p = fp;
      seeds[start].push_back(p.x);
      for (std::size_t i = 0; i < path_maps.size(); ++i) {
        p = apply_boundary(path_maps[i], p);
        if (p.infinite) break;
        const std::size_t node =
            i + 1 < path_nodes.size() ? path_nodes[i + 1] : start;
        if (node != start) seeds[node].push_back(p.x);
      }
    }
  };

  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t start,
                                                          std::size_t node) {
    if (budget <= 0) return;
    --budget;
    for (const Edge& e : out[node]) {
      if (e.to == start) {
        path_maps.push_back(e.g);
        record_cycle(start);
        path_maps.pop_back();
        continue;
      }
      // Canonical start = smallest node on the cycle, each node visited once.
      if (e.to < start || on_path[e.to]) continue;
      on_path[e.to] = 1;
      path_nodes.push_back(e.to);
      path_maps.push_back(e.g);
      dfs(start, e.to);
      path_maps.pop_back();
      path_nodes.pop_back();
      on_path[e.to] = 0;
    }
  };

  for (std::size_t s0 = 0; s0 < sys.branches.size(); ++s0) {
    path_nodes.assign(1, s0);
    path_maps.clear();
    std::fill(on_path.begin(), on_path.end(), 0);
    on_path[s0] = 1;
    dfs(s0, s0);
  }
  return seeds;
}

}  // namespace

std::vector<ChartedInterval> build_charts(const BranchSystem& sys,
                                          double padding) {
  if (!(padding >= 1.0))
    throw ChartViolation("chart padding factor must be >= 1");
  std::vector<std::vector<double>> seeds = cycle_seed_points(sys);

  // Branches without any periodic orbit fall back to the enumerated limit
  // points of the carrying group, and finally to a unit window beside the
  // base point (a branch with no transitions contributes a zero block).
  std::optional<LimitPointSample> lps;
  for (std::size_t i = 0; i < sys.branches.size(); ++i) {
    if (!seeds[i].empty()) continue;
    if (!lps) {
      const WordBall ball = enumerate_ball(sys.group, sys.group.word_cutoff);
      lps = enumerate_limit_points(sys.group, ball);
    }
    for (double p : lps->hyperbolic)
      if (circular_contains(sys.branches[i].I, BoundaryPoint::at(p)))
        seeds[i].push_back(p);
    if (seeds[i].empty())
      seeds[i].push_back(sys.branches[i].facing == Facing::Right
                             ? sys.branches[i].x + 1.0
                             : sys.branches[i].x - 1.0);
  }

  std::vector<ChartedInterval> charts;
  charts.reserve(sys.branches.size());
  std::vector<std::pair<double, double>> hulls;  // raw seed hulls, shrink limits
  for (std::size_t i = 0; i < sys.branches.size(); ++i) {
    const Branch& br = sys.branches[i];
    const double slo = *std::min_element(seeds[i].begin(), seeds[i].end());
    const double shi = *std::max_element(seeds[i].begin(), seeds[i].end());
    hulls.emplace_back(slo, shi);
    double lo = slo, hi = shi;
    // Resolution floor so a single fixed point still gets a usable window.
    // Kept tight: collocation accuracy degrades quickly with chart width on
    // weakly contracting systems.
    if (hi - lo < 0.2) {
      const double c = 0.5 * (lo + hi);
      lo = c - 0.1;
      hi = c + 0.1;
    }
    const double extra = 0.5 * (padding - 1.0) * (hi - lo);
    double plo = lo - extra;
    double phi = hi + extra;
    // The padded window must stay inside the forward arc; keep at least half
    // of the gap between the seed hull and the branch base point.
    if (br.facing == Facing::Right)
      plo = std::max(plo, br.x + 0.5 * (slo - br.x));
    else
      phi = std::min(phi, br.x + 0.5 * (shi - br.x));
    charts.push_back(ChartedInterval{br.index, plo, phi});
  }

  // Close the windows under the transition images so collocation points map
  // chart-to-chart.  Padding is advisory: when g.chart_k sticks out of
  // chart_j the SOURCE window is trimmed back toward its seed hull (never
  // past it), using that a real Moebius map is increasing away from its
  // pole.  Expanding targets instead is unstable: a padded edge near a pole
  // maps far away and the blow-up cascades through identity chains.
  const std::map<int, std::size_t> pos = branch_positions(sys);
  for (int sweep = 0; sweep < 200; ++sweep) {
    bool changed = false;
    auto trim_lo = [&](ChartedInterval& ck, double v, double limit) {
      v = std::min(v, limit);
      if (v > ck.lo + 1e-12) {
        ck.lo = v;
        changed = true;
      }
    };
    auto trim_hi = [&](ChartedInterval& ck, double v, double limit) {
      v = std::max(v, limit);
      if (v < ck.hi - 1e-12) {
        ck.hi = v;
        changed = true;
      }
    };
    for (const auto& [jk, gs] : sys.transitions) {
      const auto pj = pos.find(jk.first);
      const auto pk = pos.find(jk.second);
      if (pj == pos.end() || pk == pos.end()) continue;
      const ChartedInterval& cj = charts[pj->second];
      ChartedInterval& ck = charts[pk->second];
      const std::pair<double, double>& hull = hulls[pk->second];
      for (const Moebius& g : gs) {
        if (std::abs(g.c) > 1e-300) {
          // A pole inside the window splits the image; keep the side where
          // the seeds live.
          const double pole = -g.d / g.c;
          if (pole > ck.lo && pole < ck.hi) {
            const double mid = 0.5 * (hull.first + hull.second);
            if (mid > pole)
              trim_lo(ck, pole + 0.1 * (hull.first - pole), hull.first);
            else
              trim_hi(ck, pole - 0.1 * (pole - hull.second), hull.second);
            continue;
          }
        }
        const ImageSpan im = map_span(g, ck.lo, ck.hi, 0.0);
        if (im.has_pole) continue;
        if (im.lo < cj.lo - 1e-12) {
          const BoundaryPoint pre =
              apply_boundary(g.inverse(), BoundaryPoint::at(cj.lo));
          if (!pre.infinite) trim_lo(ck, pre.x, hull.first);
        }
        if (im.hi > cj.hi + 1e-12) {
          const BoundaryPoint pre =
              apply_boundary(g.inverse(), BoundaryPoint::at(cj.hi));
          if (!pre.infinite) trim_hi(ck, pre.x, hull.second);
        }
      }
    }
    if (!changed) break;
  }
  return charts;
}

TransferOperatorMatrix assemble(const BranchSystem& sys, std::complex<double> s,
                                int order,
                                const std::vector<ChartedInterval>& charts) {
  if (order < 1) throw ChartViolation("collocation order must be >= 1");
  if (charts.size() != sys.branches.size())
    throw ChartViolation("chart list does not match the branch list");
  const std::map<int, std::size_t> pos = branch_positions(sys);
  for (std::size_t i = 0; i < charts.size(); ++i) {
    if (charts[i].branch != sys.branches[i].index)
      throw ChartViolation("chart list does not match the branch list");
    if (!(charts[i].lo < charts[i].hi))
      throw ChartViolation("empty chart on branch " +
                           std::to_string(charts[i].branch));
  }

  // Validate that every transition maps its source chart into its target.
  for (const auto& [jk, gs] : sys.transitions) {
    const auto pj = pos.find(jk.first);
    const auto pk = pos.find(jk.second);
    if (pj == pos.end() || pk == pos.end()) continue;
    const ChartedInterval& cj = charts[pj->second];
    const ChartedInterval& ck = charts[pk->second];
    const double tol =
        1e-7 * std::max({1.0, std::abs(cj.lo), std::abs(cj.hi)});
    for (const Moebius& g : gs) {
      const ImageSpan im = map_span(g, ck.lo, ck.hi, kEps);
      if (im.has_pole)
        throw ChartViolation("derivative pole inside source chart for " +
                             transition_tag(jk.first, jk.second, g));
      if (im.lo < cj.lo - tol || im.hi > cj.hi + tol)
        throw ChartViolation("image [" + std::to_string(im.lo) + ", " +
                             std::to_string(im.hi) +
                             "] leaves target chart [" + std::to_string(cj.lo) +
                             ", " + std::to_string(cj.hi) + "] for " +
                             transition_tag(jk.first, jk.second, g));
    }
  }

  TransferOperatorMatrix M;
  M.s = s;
  M.order = order;
  M.charts = charts;
  M.entries.assign(M.dim() * M.dim(), std::complex<double>(0.0, 0.0));

  const std::vector<double> nodes = chebyshev_nodes(order);
  const std::size_t n = static_cast<std::size_t>(order);
  for (const auto& [jk, gs] : sys.transitions) {
    const auto pj = pos.find(jk.first);
    const auto pk = pos.find(jk.second);
    if (pj == pos.end() || pk == pos.end()) continue;
    const ChartedInterval& cj = charts[pj->second];
    const ChartedInterval& ck = charts[pk->second];
    for (const Moebius& g : gs) {
      for (std::size_t a = 0; a < n; ++a) {
        const double x = ck.from_chart(nodes[a]);
        const double w = deriv_mag(g, BoundaryPoint::at(x));
        // |g'|^s as the principal power of a positive base: exp(s log w).
        const std::complex<double> weight = std::exp(s * std::log(w));
        const BoundaryPoint gx = apply_boundary(g, BoundaryPoint::at(x));
        const std::vector<double> ell = lagrange_basis(order, cj.to_chart(gx.x));
        const std::size_t row = pk->second * n + a;
        for (std::size_t b = 0; b < n; ++b)
          M.at(row, pj->second * n + b) += weight * ell[b];
      }
    }
  }
  return M;
}

TransferOperatorMatrix assemble(const BranchSystem& sys, std::complex<double> s,
                                int order, double padding) {
  return assemble(sys, s, order, build_charts(sys, padding));
}

FredholmResult fredholm_det(const TransferOperatorMatrix& M) {
  const Eigen::Index n = static_cast<Eigen::Index>(M.dim());
  Eigen::MatrixXcd A(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      A(r, c) = M.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));

  FredholmResult out;
  if (n == 0) {
    out.det = 1.0;
    out.log_abs = 0.0;
    return out;
  }

  Eigen::MatrixXcd ImA = Eigen::MatrixXcd::Identity(n, n) - A;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(ImA);
  out.det = lu.determinant();
  out.log_abs = std::log(std::abs(out.det));

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A, false);
  std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                       es.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
              if (a.real() != b.real()) return a.real() > b.real();
              return a.imag() > b.imag();
            });
  if (ev.size() > 5) ev.resize(5);
  out.top_eigenvalues = std::move(ev);
  return out;
}

CheckResult check_contraction(const BranchSystem& sys,
                              const std::vector<ChartedInterval>& charts,
                              int samples) {
  CheckResult chk;
  const std::map<int, std::size_t> pos = branch_positions(sys);
  const std::vector<double> nodes = chebyshev_nodes(std::max(samples, 2));
  for (const auto& [jk, gs] : sys.transitions) {
    const auto pk = pos.find(jk.second);
    if (pk == pos.end()) continue;
    const ChartedInterval& ck = charts[pk->second];
    for (const Moebius& g : gs) {
      double dmax = 0.0;
      bool pole = false;
      for (double t : nodes) {
        try {
          dmax = std::max(dmax,
                          deriv_mag(g, BoundaryPoint::at(ck.from_chart(t))));
        } catch (const PoleError&) {
          pole = true;
        }
      }
      if (pole) {
        chk.fail(std::numeric_limits<double>::infinity(),
                 "derivative pole inside chart for " +
                     transition_tag(jk.first, jk.second, g));
        continue;
      }
      chk.observe(std::max(0.0, dmax - 1.0), 1e-9,
                  transition_tag(jk.first, jk.second, g) +
                      " max |g'| = " + std::to_string(dmax));
    }
  }
  return chk;
}

ResonanceScanResult resonance_scan(const BranchSystem& sys,
                                   std::complex<double> lo,
                                   std::complex<double> hi, int nx, int ny,
                                   int order, double padding) {
  if (nx < 2 || ny < 1) throw ChartViolation("resonance grid must be >= 2x1");
  const std::vector<ChartedInterval> charts = build_charts(sys, padding);

  ResonanceScanResult out;
  auto det_at = [&](std::complex<double> s) {
    ++out.grid_evaluations;
    return fredholm_det(assemble(sys, s, order, charts)).det;
  };

  const double re0 = std::min(lo.real(), hi.real());
  const double re1 = std::max(lo.real(), hi.real());
  const double im0 = std::min(lo.imag(), hi.imag());
  const double im1 = std::max(lo.imag(), hi.imag());
  const double dre = (re1 - re0) / (nx - 1);
  const double dim = ny > 1 ? (im1 - im0) / (ny - 1) : 0.0;

  std::vector<double> mag(static_cast<std::size_t>(nx) * ny);
  auto s_at = [&](int i, int j) {
    return std::complex<double>(re0 + i * dre, im0 + j * dim);
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      mag[static_cast<std::size_t>(j) * nx + i] = std::abs(det_at(s_at(i, j)));

  // Strict local minima over the 8-neighbourhood, interior only.
  std::vector<std::complex<double>> seeds;
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i + 1 < nx; ++i) {
      const double m = mag[static_cast<std::size_t>(j) * nx + i];
      bool strict = true;
      for (int dj = -1; dj <= 1 && strict; ++dj) {
        if (j + dj < 0 || j + dj >= ny) continue;
        for (int di = -1; di <= 1 && strict; ++di) {
          if (di == 0 && dj == 0) continue;
          if (m >= mag[static_cast<std::size_t>(j + dj) * nx + (i + di)])
            strict = false;
        }
      }
      if (strict) seeds.push_back(s_at(i, j));
    }
  }

  const double margin = 1e-6 * (1.0 + re1 - re0);
  for (const std::complex<double>& seed : seeds) {
    std::complex<double> s0 = seed;
    std::complex<double> s1 = seed + std::complex<double>(0.25 * dre, 0.0);
    std::complex<double> f0 = det_at(s0);
    std::complex<double> f1 = det_at(s1);
    bool converged = false;
    int it = 0;
    for (; it < 50; ++it) {
      if (std::abs(f1 - f0) == 0.0) break;
      const std::complex<double> s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
      s0 = s1;
      f0 = f1;
      s1 = s2;
      f1 = det_at(s1);
      if (std::abs(s1 - s0) < 1e-12 * (1.0 + std::abs(s1)) ||
          std::abs(f1) < 1e-13) {
        converged = true;
        break;
      }
      // Runaway iterations (seed was not tracking a root in the region).
      if (std::abs(s1 - seed) > 4.0 * (std::abs(hi - lo) + 1.0)) break;
    }
    ResonanceCandidate cand;
    cand.s = s1;
    cand.residual = std::abs(f1);
    cand.iterations = it;
    cand.converged = converged;
    if (!converged) {
      out.failures.push_back(cand);
      continue;
    }
    const bool inside = s1.real() >= re0 - margin && s1.real() <= re1 + margin &&
                        s1.imag() >= im0 - margin && s1.imag() <= im1 + margin;
    if (!inside) continue;  // genuine root, but outside the requested window
    bool dup = false;
    for (const ResonanceCandidate& r : out.roots)
      if (std::abs(r.s - s1) < 1e-8) dup = true;
    if (!dup) out.roots.push_back(cand);
  }
  return out;
}

}  // namespace zb
