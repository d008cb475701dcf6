#include "zb/branch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>

namespace zb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPosTol = 1e-9;   // minimum flow-time separation of crossings
constexpr double kTieTol = 1e-7;   // two matched crossings closer than this tie
constexpr double kXQuant = 1e-7;   // endpoint quantum for line deduplication

// Angle coordinate on the boundary circle: 2*atan maps R monotonically onto
// (-pi, pi) and infinity to pi, so counterclockwise order becomes increasing
// angle.
double to_theta(const BoundaryPoint& p) {
  if (p.infinite) return M_PI;
  return 2.0 * std::atan(p.x);
}

double wrap_2pi(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a;
}

struct ThetaArc {
  double start = 0.0, len = 0.0;
};

ThetaArc arc_theta(const BoundaryInterval& I) {
  double s = to_theta(I.left);
  double e = to_theta(I.right);
  return {s, wrap_2pi(e - s)};
}

bool arc_contains_theta(const ThetaArc& a, double theta, double tol) {
  double off = wrap_2pi(theta - a.start);
  if (off > 2.0 * M_PI - 1e-12) off -= 2.0 * M_PI;
  return off >= tol && off <= a.len - tol;
}

bool arc_contains_arc(const ThetaArc& outer, const ThetaArc& inner,
                      double tol) {
  double off = wrap_2pi(inner.start - outer.start);
  if (off > 2.0 * M_PI - tol) off -= 2.0 * M_PI;
  return off >= -tol && off + inner.len <= outer.len + tol;
}

// Total angular length of the intersection of two circular intervals
// (the intersection can consist of two arcs).
double arc_overlap_len(const ThetaArc& a, const ThetaArc& b) {
  double cuts[4] = {a.start, wrap_2pi(a.start + a.len), b.start,
                    wrap_2pi(b.start + b.len)};
  std::sort(cuts, cuts + 4);
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    double lo = cuts[i];
    double hi = (i + 1 < 4) ? cuts[i + 1] : cuts[0] + 2.0 * M_PI;
    if (hi - lo < 1e-15) continue;
    double mid = wrap_2pi(0.5 * (lo + hi));
    if (arc_contains_theta(a, mid, 0.0) && arc_contains_theta(b, mid, 0.0))
      total += hi - lo;
  }
  return total;
}

// Geodesic through two interior points, oriented from z to w.  Along any
// geodesic the x coordinate is monotone, which fixes the endpoint order.
Geodesic geodesic_between(const HPoint& z, const HPoint& w) {
  if (std::abs(z.x - w.x) < 1e-12) {
    if (w.y > z.y)
      return {BoundaryPoint::at(z.x), BoundaryPoint::inf()};
    return {BoundaryPoint::inf(), BoundaryPoint::at(z.x)};
  }
  double m = (w.x * w.x + w.y * w.y - z.x * z.x - z.y * z.y) /
             (2.0 * (w.x - z.x));
  double r = std::hypot(z.x - m, z.y);
  if (w.x > z.x)
    return {BoundaryPoint::at(m - r), BoundaryPoint::at(m + r)};
  return {BoundaryPoint::at(m + r), BoundaryPoint::at(m - r)};
}

// Deterministic nested subsampling: visiting list positions in bit-reversed
// order makes the first m picks a prefix of the first m' picks for m < m',
// so coarser grids select subsets of finer ones.
std::vector<std::size_t> nested_pick(std::size_t n, std::size_t m) {
  std::vector<std::size_t> picks;
  if (n == 0) return picks;
  int bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  std::size_t B = std::size_t{1} << bits;
  for (std::size_t v = 0; v < B && picks.size() < std::min(n, m); ++v) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b)
      if (v & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    if (r < n) picks.push_back(r);
  }
  return picks;
}

std::int64_t quant_x(double x) { return std::llround(x / kXQuant); }

// Key for an unordered endpoint pair; infinite endpoints get a sentinel.
using LineKey = std::pair<std::int64_t, std::int64_t>;

LineKey line_key(const BoundaryPoint& p, const BoundaryPoint& q) {
  std::int64_t a =
      p.infinite ? std::numeric_limits<std::int64_t>::max() : quant_x(p.x);
  std::int64_t b =
      q.infinite ? std::numeric_limits<std::int64_t>::max() : quant_x(q.x);
  if (a > b) std::swap(a, b);
  return {a, b};
}

bool word_before(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string facing_name(Facing f) {
  return f == Facing::Right ? "right" : "left";
}

Branch make_branch(int index, double x, Facing facing) {
  Branch b;
  b.index = index;
  b.x = x;
  b.facing = facing;
  if (facing == Facing::Right) {
    b.I = {BoundaryPoint::at(x), BoundaryPoint::inf()};
    b.J = {BoundaryPoint::inf(), BoundaryPoint::at(x)};
  } else {
    b.I = {BoundaryPoint::inf(), BoundaryPoint::at(x)};
    b.J = {BoundaryPoint::at(x), BoundaryPoint::inf()};
  }
  return b;
}

const Branch* BranchSystem::find(int index) const {
  for (const auto& b : branches)
    if (b.index == index) return &b;
  return nullptr;
}

std::vector<CandidatePoint> candidate_base_points(const AuxiliaryGroup& aux) {
  const double ytol = 1e-7;
  const double xtol = 1e-7;
  std::vector<CandidatePoint> raw;
  raw.push_back({aux.alpha_prime, true, true});
  raw.push_back({aux.beta_prime, true, true});
  for (const auto& side : aux.domain_W.sides) {
    if (side.left.y < ytol) raw.push_back({side.left.x, true, true});
    if (side.right.y < ytol) raw.push_back({side.right.x, true, true});
  }
  for (const auto& sph : aux.relevant) raw.push_back({sph.center, true, false});

  // Normalize interior candidates into [alpha', beta') by wall translations.
  for (auto& c : raw) {
    double m = std::floor((c.x - aux.alpha_prime) / aux.lambda);
    if (m != 0.0 && std::abs(c.x - aux.beta_prime) > xtol) c.x -= m * aux.lambda;
  }
  std::sort(raw.begin(), raw.end(),
            [](const CandidatePoint& a, const CandidatePoint& b) {
              return a.x < b.x;
            });
  std::vector<CandidatePoint> out;
  for (const auto& c : raw) {
    if (!out.empty() && std::abs(c.x - out.back().x) < xtol) {
      out.back().faces_right = out.back().faces_right || c.faces_right;
      out.back().faces_left = out.back().faces_left || c.faces_left;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

BranchSystem build_branch_system(const AuxiliaryGroup& aux) {
  BranchSystem sys;
  sys.group = aux.presentation_W;
  auto cand = candidate_base_points(aux);
  int idx = 0;
  for (const auto& c : cand)
    if (c.faces_right) sys.branches.push_back(make_branch(++idx, c.x, Facing::Right));
  for (auto it = cand.rbegin(); it != cand.rend(); ++it)
    if (it->faces_left)
      sys.branches.push_back(make_branch(++idx, it->x, Facing::Left));
  return sys;
}

LimitPointSample enumerate_limit_points(const GroupPresentation& pres,
                                        const WordBall& ball) {
  LimitPointSample lp;
  for (const auto& el : ball.elements()) {
    auto cls = classify(el.mat, pres.epsilon);
    if (cls.kind == ElementKind::Hyperbolic) {
      auto fp = fixed_points(el.mat, pres.epsilon);
      if (!fp.attracting.infinite) lp.hyperbolic.push_back(fp.attracting.x);
      if (!fp.repelling.infinite) lp.hyperbolic.push_back(fp.repelling.x);
    } else if (cls.kind == ElementKind::Parabolic) {
      auto fp = fixed_points(el.mat, pres.epsilon);
      if (fp.parabolic_point.infinite)
        lp.infinity_is_limit = true;
      else
        lp.parabolic_orbit.push_back(fp.parabolic_point.x);
    }
  }
  auto dedup = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-9; }),
            v.end());
  };
  dedup(lp.hyperbolic);
  dedup(lp.parabolic_orbit);
  return lp;
}

TranslateIndex::TranslateIndex(const BranchSystem& sys, const WordBall& ball)
    : sys_(sys), ball_(ball) {
  std::map<LineKey, int> seen;
  const auto& els = ball.elements();
  for (int bi = 0; bi < static_cast<int>(els.size()); ++bi) {
    const Moebius& g = els[bi].mat;
    for (const auto& br : sys.branches) {
      BoundaryPoint p = apply_boundary(g, BoundaryPoint::at(br.x));
      BoundaryPoint q = apply_boundary(g, BoundaryPoint::inf());
      LineKey key = line_key(p, q);
      int id = -1;
      // Probe neighbouring quanta so nearly equal endpoints merge.
      for (std::int64_t da = -1; da <= 1 && id < 0; ++da)
        for (std::int64_t db = -1; db <= 1 && id < 0; ++db) {
          auto it = seen.find({key.first + da, key.second + db});
          if (it != seen.end()) id = it->second;
        }
      if (id < 0) {
        Line ln;
        if (p.infinite || q.infinite) {
          double u = p.infinite ? q.x : p.x;
          ln.u = u;
          ln.w = kInf;
          ln.geo = {BoundaryPoint::at(u), BoundaryPoint::inf()};
        } else {
          ln.u = std::min(p.x, q.x);
          ln.w = std::max(p.x, q.x);
          ln.geo = {BoundaryPoint::at(ln.u), BoundaryPoint::at(ln.w)};
        }
        id = static_cast<int>(lines_.size());
        lines_.push_back(std::move(ln));
        seen[key] = id;
      }
      lines_[id].owners.push_back({br.index, bi, apply_interval(g, br.I)});
    }
  }
  for (auto& ln : lines_)
    std::sort(ln.owners.begin(), ln.owners.end(),
              [&](const Line::Owner& a, const Line::Owner& b) {
                const Word& wa = els[a.ball_index].word;
                const Word& wb = els[b.ball_index].word;
                if (wa != wb) return word_before(wa, wb);
                return a.k < b.k;
              });

  base_line_.resize(sys.branches.size(), -1);
  for (std::size_t i = 0; i < sys.branches.size(); ++i) {
    LineKey key = line_key(BoundaryPoint::at(sys.branches[i].x),
                           BoundaryPoint::inf());
    for (std::int64_t da = -1; da <= 1 && base_line_[i] < 0; ++da) {
      auto it = seen.find({key.first + da, key.second});
      if (it != seen.end()) base_line_[i] = it->second;
    }
  }

  std::vector<int> all(lines_.size());
  for (std::size_t i = 0; i < lines_.size(); ++i) all[i] = static_cast<int>(i);
  root_ = build(all);
}

int TranslateIndex::build(std::vector<int>& idx) {
  if (idx.empty()) return -1;
  std::vector<double> ends;
  ends.reserve(idx.size() * 2);
  for (int i : idx) {
    ends.push_back(lines_[i].u);
    if (std::isfinite(lines_[i].w)) ends.push_back(lines_[i].w);
  }
  std::nth_element(ends.begin(), ends.begin() + ends.size() / 2, ends.end());
  double c = ends[ends.size() / 2];
  Node node;
  node.center = c;
  std::vector<int> left, right;
  for (int i : idx) {
    if (lines_[i].w <= c)
      left.push_back(i);
    else if (lines_[i].u >= c)
      right.push_back(i);
    else
      node.by_u.push_back(i);
  }
  // Degenerate split (all endpoints equal): keep everything in this node.
  if (node.by_u.empty() && (left.empty() || right.empty())) {
    auto& rest = left.empty() ? right : left;
    node.by_u = rest;
    rest.clear();
  }
  node.by_w = node.by_u;
  std::sort(node.by_u.begin(), node.by_u.end(),
            [&](int a, int b) { return lines_[a].u < lines_[b].u; });
  std::sort(node.by_w.begin(), node.by_w.end(),
            [&](int a, int b) { return lines_[a].w > lines_[b].w; });
  int self = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(node));
  int l = build(left);
  int r = build(right);
  nodes_[self].left = l;
  nodes_[self].right = r;
  return self;
}

void TranslateIndex::stab(double p, std::vector<int>& out) const {
  int cur = root_;
  while (cur >= 0) {
    const Node& nd = nodes_[cur];
    if (p < nd.center) {
      for (int i : nd.by_u) {
        if (lines_[i].u < p)
          out.push_back(i);
        else
          break;
      }
      cur = nd.left;
    } else if (p > nd.center) {
      for (int i : nd.by_w) {
        if (lines_[i].w > p)
          out.push_back(i);
        else
          break;
      }
      cur = nd.right;
    } else {
      for (int i : nd.by_u)
        if (lines_[i].u < p && lines_[i].w > p) out.push_back(i);
      break;
    }
  }
}

namespace {

// Lines separating the geodesic's endpoints, i.e. crossing it in H.
void separating_lines(const TranslateIndex& ti,
                      const std::function<void(double, std::vector<int>&)>& stab,
                      const Geodesic& gamma, std::vector<int>& out) {
  (void)ti;
  std::vector<int> sx, sy;
  if (!gamma.plus_end.infinite && !gamma.minus_end.infinite) {
    stab(gamma.plus_end.x, sx);
    stab(gamma.minus_end.x, sy);
    std::sort(sx.begin(), sx.end());
    std::sort(sy.begin(), sy.end());
    std::set_symmetric_difference(sx.begin(), sx.end(), sy.begin(), sy.end(),
                                  std::back_inserter(out));
  } else {
    double p = gamma.plus_end.infinite ? gamma.minus_end.x : gamma.plus_end.x;
    stab(p, sx);
    for (int i : sx) out.push_back(i);
  }
}

}  // namespace

std::optional<FirstReturn> TranslateIndex::first_return(int j, double x,
                                                        double y,
                                                        bool* ambiguous) const {
  if (ambiguous) *ambiguous = false;
  int pos = -1;
  for (std::size_t i = 0; i < sys_.branches.size(); ++i)
    if (sys_.branches[i].index == j) pos = static_cast<int>(i);
  if (pos < 0 || base_line_[pos] < 0) return std::nullopt;
  int bl = base_line_[pos];

  Geodesic gamma{BoundaryPoint::at(y), BoundaryPoint::at(x)};
  std::optional<HPoint> basept;
  try {
    basept = geodesic_meets(gamma, lines_[bl].geo);
  } catch (const CoincidentGeodesics&) {
    return std::nullopt;
  }
  if (!basept) return std::nullopt;
  double t0 = geodesic_position(gamma, *basept);

  std::vector<int> cand;
  auto stabfn = [this](double p, std::vector<int>& o) { this->stab(p, o); };
  separating_lines(*this, stabfn, gamma, cand);

  // Vertical lines never separate two finite endpoints via the tree when one
  // endpoint exceeds every center; the stab handles them through w = +inf.
  double best_t = kInf, second_t = kInf;
  int best_line = -1, best_owner = -1;
  BoundaryPoint fwd = BoundaryPoint::at(x);
  for (int li : cand) {
    if (li == bl) continue;
    const Line& ln = lines_[li];
    if (std::abs(ln.u - x) < 1e-11 || std::abs(ln.u - y) < 1e-11) continue;
    if (std::isfinite(ln.w) &&
        (std::abs(ln.w - x) < 1e-11 || std::abs(ln.w - y) < 1e-11))
      continue;
    std::optional<HPoint> pt;
    try {
      pt = geodesic_meets(gamma, ln.geo);
    } catch (const CoincidentGeodesics&) {
      continue;
    }
    if (!pt) continue;
    double t = geodesic_position(gamma, *pt);
    if (t <= t0 + kPosTol) continue;
    int owner = -1;
    for (std::size_t oi = 0; oi < ln.owners.size(); ++oi)
      if (circular_contains(ln.owners[oi].arc, fwd)) {
        owner = static_cast<int>(oi);
        break;
      }
    if (owner < 0) continue;  // pierced from the unfaced side
    if (t < best_t) {
      second_t = best_t;
      best_t = t;
      best_line = li;
      best_owner = owner;
    } else if (t < second_t) {
      second_t = t;
    }
  }
  if (best_line < 0) return std::nullopt;
  if (second_t - best_t < kTieTol) {
    if (ambiguous) *ambiguous = true;
    return std::nullopt;
  }
  const auto& ow = lines_[best_line].owners[best_owner];
  return FirstReturn{best_t - t0, ball_.elements()[ow.ball_index].mat, ow.k};
}

std::vector<TranslateIndex::Crossing> TranslateIndex::crossings_between(
    const Geodesic& gamma, double t_lo, double t_hi) const {
  std::vector<Crossing> out;
  std::vector<int> cand;
  auto stabfn = [this](double p, std::vector<int>& o) { this->stab(p, o); };
  separating_lines(*this, stabfn, gamma, cand);
  for (int li : cand) {
    const Line& ln = lines_[li];
    if (!gamma.plus_end.infinite && gamma.minus_end.infinite &&
        !std::isfinite(ln.w))
      continue;  // two verticals never cross
    std::optional<HPoint> pt;
    try {
      pt = geodesic_meets(gamma, ln.geo);
    } catch (const CoincidentGeodesics&) {
      continue;
    }
    if (!pt) continue;
    double t = geodesic_position(gamma, *pt);
    if (t <= t_lo || t >= t_hi) continue;
    for (const auto& ow : ln.owners)
      if (circular_contains(ow.arc, gamma.plus_end)) {
        out.push_back({t, ow.k, ow.ball_index});
        break;
      }
  }
  std::sort(out.begin(), out.end(),
            [](const Crossing& a, const Crossing& b) { return a.t < b.t; });
  return out;
}

bool TranslateIndex::hits_branch_union(const Geodesic& gamma) const {
  std::vector<int> cand;
  auto stabfn = [this](double p, std::vector<int>& o) { this->stab(p, o); };
  separating_lines(*this, stabfn, gamma, cand);
  for (int li : cand) {
    const Line& ln = lines_[li];
    std::optional<HPoint> pt;
    try {
      pt = geodesic_meets(gamma, ln.geo);
    } catch (const CoincidentGeodesics&) {
      continue;
    }
    if (!pt) continue;
    for (const auto& ow : ln.owners)
      if (circular_contains(ow.arc, gamma.plus_end)) return true;
  }
  return false;
}

BranchSystem compute_transitions(const BranchSystem& sys, const WordBall& ball,
                                 int grid) {
  BranchSystem out = sys;
  out.transitions.clear();
  out.coverage.clear();
  out.unresolved_count = 0;
  out.discarded_count = 0;
  out.unresolved_notes.clear();

  TranslateIndex ti(sys, ball);
  LimitPointSample lp = enumerate_limit_points(sys.group, ball);
  const double ex_tol = std::max(sys.group.epsilon, 1e-9);

  std::map<std::pair<int, int>, std::set<std::array<std::int64_t, 4>>> known;
  for (const auto& br : sys.branches) {
    std::vector<double> X, Y;
    for (double p : lp.hyperbolic) {
      if (std::abs(p - br.x) <= ex_tol) continue;
      if (circular_contains(br.I, BoundaryPoint::at(p))) X.push_back(p);
      if (circular_contains(br.J, BoundaryPoint::at(p))) Y.push_back(p);
    }
    if (X.empty() || Y.empty()) {
      out.coverage[br.index] = 0.0;
      out.unresolved_notes.push_back(
          "branch " + std::to_string(br.index) +
          ": no sample endpoints on one side at this cutoff");
      continue;
    }
    auto xi = nested_pick(X.size(), static_cast<std::size_t>(grid));
    auto yi = nested_pick(Y.size(), static_cast<std::size_t>(grid));
    long shots = 0, resolved = 0;
    double dir = br.facing == Facing::Right ? 1.0 : -1.0;
    for (std::size_t a : xi)
      for (std::size_t b : yi) {
        ++shots;
        bool done = false;
        for (int attempt = 0; attempt < 3 && !done; ++attempt) {
          double xx = X[a] + dir * attempt * 1e-5 * (1.0 + std::abs(X[a]));
          bool amb = false;
          auto fr = ti.first_return(br.index, xx, Y[b], &amb);
          if (fr) {
            auto key = fr->g_plus.quantized(1e-9);
            if (known[{br.index, fr->k_plus}].insert(key).second)
              out.transitions[{br.index, fr->k_plus}].push_back(fr->g_plus);
            ++resolved;
            done = true;
          } else if (!amb) {
            ++out.unresolved_count;
            if (out.unresolved_notes.size() < 12)
              out.unresolved_notes.push_back(
                  "branch " + std::to_string(br.index) + ": no return for (" +
                  fmt(X[a]) + ", " + fmt(Y[b]) + ")");
            done = true;
          } else if (attempt == 2) {
            ++out.discarded_count;
            done = true;
          }
        }
      }
    out.coverage[br.index] =
        static_cast<double>(resolved) / static_cast<double>(shots);
  }
  for (auto& [jk, mats] : out.transitions)
    std::sort(mats.begin(), mats.end(), [](const Moebius& a, const Moebius& b) {
      return a.quantized(1e-9) < b.quantized(1e-9);
    });
  return out;
}

Report verify_branch_properties(const BranchSystem& sys, const WordBall& ball,
                                const std::vector<ConjClass>& classes,
                                int samples) {
  Report rep;
  rep.title = "branch property verification (" + sys.group.name + ")";
  TranslateIndex ti(sys, ball);
  LimitPointSample lp = enumerate_limit_points(sys.group, ball);
  const auto& els = ball.elements();
  const double eps = sys.group.epsilon;
  const double thtol = 1e-9;

  // Periodic vectors: some translate of a class axis (either orientation)
  // crosses each branch with matching facing.
  {
    auto& chk = rep.check("b1_periodic_vector_in_branch");
    for (const auto& br : sys.branches) {
      bool found = false;
      for (const auto& c : classes) {
        for (int orient = 0; orient < 2 && !found; ++orient) {
          BoundaryPoint fwd = orient == 0 ? c.attracting : c.repelling;
          BoundaryPoint bwd = orient == 0 ? c.repelling : c.attracting;
          for (const auto& el : els) {
            BoundaryPoint gf = apply_boundary(el.mat, fwd);
            BoundaryPoint gb = apply_boundary(el.mat, bwd);
            if (circular_contains(br.I, gf) && circular_contains(br.J, gb)) {
              found = true;
              break;
            }
          }
        }
        if (found) break;
      }
      chk.observe(found ? 0.0 : 1.0, 0.5,
                  "branch " + std::to_string(br.index) +
                      ": no periodic vector among enumerated classes");
    }
  }

  // Base points keep clear of the recurrent limit points (orbit points of
  // infinity are legitimate base points and are not compared).
  {
    auto& chk = rep.check("b2_base_clear_of_limit_points");
    for (const auto& br : sys.branches) {
      double dmin = kInf;
      for (double p : lp.hyperbolic) dmin = std::min(dmin, std::abs(p - br.x));
      double viol = dmin < eps ? eps - dmin : 0.0;
      chk.observe(viol, 1e-18,
                  "branch " + std::to_string(br.index) + ": min distance " +
                      fmt(dmin));
    }
    chk.note("compared against hyperbolic fixed points only");
  }

  {
    auto& chk = rep.check("b3_half_space_structure");
    chk.observe(0.0, 1.0, "structural");
    chk.note("branches carry a facing; I and J are the half-plane arcs");
  }

  // Translates of the forward arcs cover the enumerated class fixed points.
  {
    auto& chk = rep.check("b4_translates_cover_limit_set");
    for (const auto& c : classes) {
      for (const BoundaryPoint& p : {c.attracting, c.repelling}) {
        bool found = false;
        for (const auto& el : els) {
          for (const auto& br : sys.branches) {
            if (circular_contains(apply_interval(el.mat, br.I), p)) {
              found = true;
              break;
            }
          }
          if (found) break;
        }
        chk.observe(found ? 0.0 : 1.0, 0.5,
                    "fixed point " + fmt(p.x) + " uncovered");
      }
    }
  }

  {
    auto& chk = rep.check("b5_product_structure");
    chk.observe(0.0, 1.0, "structural");
    chk.note("each (x, y) in I x J determines one vector on the base line");
  }

  // Coincidences between base lines and ball translates of base lines:
  // permitted are identical copies (same line, same facing; these occur for
  // the wall pair under the strip translation and describe the same branch
  // twice) and swapped-facing copies; transversal crossings are violations.
  {
    auto& chk = rep.check("b6_base_coincidences");
    for (const auto& ln : ti.lines()) {
      for (const auto& br : sys.branches) {
        if (std::isfinite(ln.w)) {
          if (ln.u < br.x - 1e-9 && ln.w > br.x + 1e-9)
            chk.fail(1.0, "translate line (" + fmt(ln.u) + ", " + fmt(ln.w) +
                              ") crosses base of branch " +
                              std::to_string(br.index));
          else
            chk.observe(0.0, 0.5, "");
          continue;
        }
        if (std::abs(ln.u - br.x) > 1e-7) {
          chk.observe(0.0, 0.5, "");
          continue;
        }
        ThetaArc aI = arc_theta(br.I);
        for (const auto& ow : ln.owners) {
          if (ow.k == br.index && els[ow.ball_index].word.empty()) continue;
          ThetaArc ao = arc_theta(ow.arc);
          bool same = arc_contains_arc(aI, ao, 1e-6) &&
                      arc_contains_arc(ao, aI, 1e-6);
          ThetaArc aJ = arc_theta(br.J);
          bool swapped = arc_contains_arc(aJ, ao, 1e-6) &&
                         arc_contains_arc(ao, aJ, 1e-6);
          if (same || swapped)
            chk.observe(0.0, 0.5, "");
          else
            chk.fail(1.0, "partial overlap on base of branch " +
                              std::to_string(br.index) + " by word " +
                              word_str(sys.group, els[ow.ball_index].word));
        }
      }
    }
    chk.note("identical same-facing copies and swapped-facing copies permitted");
  }

  // Forward images: recorded transition arcs nest inside the branch arc,
  // stay pairwise disjoint, and cover the enumerated points of I_j.
  {
    auto& chk = rep.check("b7a_images_nest_disjointly");
    for (const auto& br : sys.branches) {
      std::vector<std::pair<ThetaArc, std::string>> arcs;
      for (const auto& [jk, mats] : sys.transitions) {
        if (jk.first != br.index) continue;
        const Branch* tgt = sys.find(jk.second);
        if (!tgt) continue;
        for (const auto& g : mats)
          arcs.push_back({arc_theta(apply_interval(g, tgt->I)),
                          std::to_string(jk.first) + "->" +
                              std::to_string(jk.second)});
      }
      if (arcs.empty()) continue;
      ThetaArc aI = arc_theta(br.I);
      for (const auto& [a, tag] : arcs)
        chk.observe(arc_contains_arc(aI, a, 1e-7) ? 0.0 : 1.0, 0.5,
                    "image not inside branch " + std::to_string(br.index) +
                        " (" + tag + ")");
      for (std::size_t i = 0; i < arcs.size(); ++i)
        for (std::size_t k = i + 1; k < arcs.size(); ++k) {
          double ov = arc_overlap_len(arcs[i].first, arcs[k].first);
          chk.observe(ov > 1e-8 ? ov : 0.0, 1e-8,
                      "images overlap in branch " + std::to_string(br.index) +
                          " (" + arcs[i].second + " vs " + arcs[k].second +
                          ")");
        }
      for (double p : lp.hyperbolic) {
        BoundaryPoint bp = BoundaryPoint::at(p);
        if (!circular_contains(br.I, bp)) continue;
        if (std::abs(p - br.x) <= std::max(eps, 1e-9)) continue;
        double th = to_theta(bp);
        bool covered = false;
        for (const auto& [a, tag] : arcs)
          if (arc_contains_theta(a, th, -thtol)) {
            covered = true;
            break;
          }
        chk.observe(covered ? 0.0 : 1.0, 0.5,
                    "point " + fmt(p) + " in branch " +
                        std::to_string(br.index) + " not covered");
      }
    }
  }

  // Segments from the base line to a transition translate stay in the
  // forward half-plane and meet no translate of the section in between.
  {
    auto& chk = rep.check("b7b_segments_clear");
    const double hs[3] = {0.4, 1.0, 2.5};
    for (const auto& [jk, mats] : sys.transitions) {
      const Branch* bj = sys.find(jk.first);
      const Branch* bk = sys.find(jk.second);
      if (!bj || !bk) continue;
      for (const auto& g : mats) {
        BoundaryPoint p = apply_boundary(g, BoundaryPoint::at(bk->x));
        BoundaryPoint q = apply_boundary(g, BoundaryPoint::inf());
        std::vector<HPoint> targets;
        if (p.infinite || q.infinite) {
          double v = p.infinite ? q.x : p.x;
          for (double h : hs) targets.push_back({v, h});
        } else {
          double m = 0.5 * (p.x + q.x), r = 0.5 * std::abs(p.x - q.x);
          for (double th : {0.25 * M_PI, 0.5 * M_PI, 0.75 * M_PI})
            targets.push_back({m + r * std::cos(th), r * std::sin(th)});
        }
        for (double h : hs)
          for (const auto& w : targets) {
            HPoint z{bj->x, h};
            Geodesic seg = geodesic_between(z, w);
            double tz = geodesic_position(seg, z);
            double tw = geodesic_position(seg, w);
            double dir = bj->facing == Facing::Right ? 1.0 : -1.0;
            double worst = 0.0;
            for (double tau : {0.25, 0.5, 0.75}) {
              HPoint mid;
              if (seg.plus_end.infinite || seg.minus_end.infinite) {
                mid = {z.x, std::pow(z.y, 1.0 - tau) * std::pow(w.y, tau)};
              } else {
                double c = 0.5 * (seg.minus_end.x + seg.plus_end.x);
                double r = 0.5 * std::abs(seg.plus_end.x - seg.minus_end.x);
                double a0 = std::atan2(z.y, z.x - c);
                double a1 = std::atan2(w.y, w.x - c);
                double am = a0 + tau * (a1 - a0);
                mid = {c + r * std::cos(am), r * std::sin(am)};
              }
              worst = std::max(worst, dir * (bj->x - mid.x));
            }
            chk.observe(worst, 1e-9,
                        "segment leaves forward half-plane at branch " +
                            std::to_string(jk.first));
            auto mids = ti.crossings_between(seg, tz + 1e-9, tw - 1e-9);
            chk.observe(static_cast<double>(mids.size()), 0.5,
                        "intermediate section crossing on " +
                            std::to_string(jk.first) + "->" +
                            std::to_string(jk.second));
          }
      }
    }
  }

  // Backward reachability: sampled backward endpoints of a branch map into
  // some source branch's backward arc under an incoming transition.  A branch
  // identified with a same-facing translate of another (the wall copies)
  // inherits that branch's incoming transitions through the identification.
  {
    auto& chk = rep.check("b7c_backward_reachability");
    std::map<int, std::vector<std::pair<int, Moebius>>> alias;
    for (const auto& ln : ti.lines()) {
      if (std::isfinite(ln.w)) continue;
      for (const auto& br : sys.branches) {
        if (std::abs(ln.u - br.x) > 1e-7) continue;
        ThetaArc aI = arc_theta(br.I);
        for (const auto& ow : ln.owners) {
          if (els[ow.ball_index].word.empty()) continue;
          ThetaArc ao = arc_theta(ow.arc);
          if (arc_contains_arc(aI, ao, 1e-6) && arc_contains_arc(ao, aI, 1e-6))
            alias[ow.k].push_back({br.index, els[ow.ball_index].mat});
        }
      }
    }
    auto direct_covered = [&](int j, const BoundaryPoint& y) {
      for (const auto& [jk, mats] : sys.transitions) {
        if (jk.second != j) continue;
        const Branch* src = sys.find(jk.first);
        if (!src) continue;
        for (const auto& h : mats)
          if (circular_contains(src->J, apply_boundary(h, y))) return true;
      }
      return false;
    };
    for (const auto& br : sys.branches) {
      std::vector<double> Y;
      for (double p : lp.hyperbolic)
        if (std::abs(p - br.x) > std::max(eps, 1e-9) &&
            circular_contains(br.J, BoundaryPoint::at(p)))
          Y.push_back(p);
      if (Y.empty()) continue;
      for (std::size_t ii : nested_pick(Y.size(), static_cast<std::size_t>(samples))) {
        BoundaryPoint y = BoundaryPoint::at(Y[ii]);
        bool covered = direct_covered(br.index, y);
        if (!covered) {
          auto it = alias.find(br.index);
          if (it != alias.end())
            for (const auto& [j2, u] : it->second)
              if (direct_covered(j2, apply_boundary(u, y))) {
                covered = true;
                break;
              }
        }
        chk.observe(covered ? 0.0 : 1.0, 0.5,
                    "backward point " + fmt(Y[ii]) + " of branch " +
                        std::to_string(br.index) + " unreachable");
      }
    }
    chk.note("same-facing translate copies share incoming transitions");
  }

  // Every enumerated periodic geodesic crosses the section.
  {
    auto& chk = rep.check("periodic_geodesics_cross_section");
    for (const auto& c : classes) {
      Geodesic axis{c.repelling, c.attracting};
      chk.observe(ti.hits_branch_union(axis) ? 0.0 : 1.0, 0.5,
                  "axis of " + word_str(sys.group, c.cyclic_word) +
                      " misses the section");
    }
  }

  return rep;
}

BranchSystem prune_to_active(const BranchSystem& sys,
                             const std::vector<ConjClass>& classes) {
  if (classes.empty())
    throw EmptyActiveSet("no periodic classes supplied for pruning");
  BranchSystem out;
  out.group = sys.group;
  out.user_supplied = sys.user_supplied;
  std::set<int> keep;
  for (const auto& br : sys.branches) {
    bool active = false;
    for (const auto& c : classes) {
      bool direct = circular_contains(br.I, c.attracting) &&
                    circular_contains(br.J, c.repelling);
      bool reversed = circular_contains(br.I, c.repelling) &&
                      circular_contains(br.J, c.attracting);
      if (direct || reversed) {
        active = true;
        break;
      }
    }
    if (active) {
      keep.insert(br.index);
      out.branches.push_back(br);
    }
  }
  if (out.branches.empty())
    throw EmptyActiveSet("no branch is crossed by an enumerated class axis");
  for (const auto& [jk, mats] : sys.transitions)
    if (keep.count(jk.first) && keep.count(jk.second))
      out.transitions[jk] = mats;
  return out;
}

Report check_group_descent(const BranchSystem& pruned,
                           const GroupPresentation& base, int N) {
  Report rep;
  rep.title = "descent to base group (" + base.name + ")";
  WordBall bb = enumerate_ball(base, N);

  {
    auto& chk = rep.check("transitions_in_base_group");
    for (const auto& [jk, mats] : pruned.transitions)
      for (const auto& g : mats) {
        Membership m = contains_up_to(base, bb, g);
        if (m.yes)
          chk.observe(0.0, 0.5,
                      std::to_string(jk.first) + "->" +
                          std::to_string(jk.second) + " = " +
                          word_str(base, m.witness));
        else
          chk.note("warning: " + std::to_string(jk.first) + "->" +
                   std::to_string(jk.second) +
                   " not decided at cutoff " + std::to_string(N));
      }
    chk.note("checked counts definite memberships");
  }

  {
    auto& chk = rep.check("two_translates_cover_boundary");
    LimitPointSample lp = enumerate_limit_points(base, bb);
    std::vector<double> pts = lp.hyperbolic;
    pts.insert(pts.end(), lp.parabolic_orbit.begin(), lp.parabolic_orbit.end());
    std::vector<std::pair<BoundaryInterval, std::string>> arcs;
    for (const auto& el : bb.elements()) {
      for (const auto& br : pruned.branches) {
        arcs.push_back({apply_interval(el.mat, br.I),
                        "g=" + word_str(base, el.word) +
                            " j=" + std::to_string(br.index)});
        if (arcs.size() >= 400) break;
      }
      if (arcs.size() >= 400) break;
    }
    bool found = false;
    std::string witness;
    for (std::size_t i = 0; i < arcs.size() && !found; ++i)
      for (std::size_t k = i; k < arcs.size() && !found; ++k) {
        bool all = true;
        for (double p : pts) {
          BoundaryPoint bp = BoundaryPoint::at(p);
          if (!circular_contains(arcs[i].first, bp) &&
              !circular_contains(arcs[k].first, bp)) {
            all = false;
            break;
          }
        }
        if (all && !pts.empty()) {
          found = true;
          witness = arcs[i].second + " with " + arcs[k].second;
        }
      }
    auto& c = chk;
    c.observe(found ? 0.0 : 1.0, 0.5,
              found ? "covering pair: " + witness
                    : "no covering pair among candidate translates");
  }

  return rep;
}

}  // namespace zb
