#include "zb/ford.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace zb {
namespace {

std::vector<IsometricSphere> dedup_spheres(
    const std::vector<IsometricSphere>& spheres, double eps) {
  std::vector<IsometricSphere> out;
  for (const auto& s : spheres) {
    bool seen = false;
    for (const auto& t : out) {
      if (t.same_circle(s, eps)) {
        seen = true;
        break;
      }
    }
    if (!seen) out.push_back(s);
  }
  return out;
}

// Interior angle of the envelope at a vertex shared by two arcs: angle between
// the arc tangents at v, the left one pointing in -x, the right one in +x.
double vertex_angle(const IsometricSphere& left_sp,
                    const IsometricSphere& right_sp, const HPoint& v) {
  const double ulx = (v.x - left_sp.center) / left_sp.radius;
  const double uly = v.y / left_sp.radius;
  const double urx = (v.x - right_sp.center) / right_sp.radius;
  const double ury = v.y / right_sp.radius;
  // Perpendiculars of the radial unit vectors, signed so the left tangent has
  // nonpositive x-component and the right one nonnegative.
  const double tlx = -uly, tly = ulx;
  const double trx = ury, try_ = -urx;
  const double dot = std::clamp(tlx * trx + tly * try_, -1.0, 1.0);
  return std::acos(dot);
}

std::string fmt_point(const HPoint& p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

}  // namespace

double FordDomain::exterior_margin(const std::vector<IsometricSphere>& spheres,
                                   const HPoint& z) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& s : spheres) {
    const double dx = z.x - s.center;
    const double dist = std::sqrt(dx * dx + z.y * z.y);
    margin = std::min(margin, dist - s.radius);
  }
  return margin;
}

double FordDomain::height(double x) const {
  double h = 0.0;
  for (const auto& side : sides) h = std::max(h, sphere_height(side.sphere, x));
  return h;
}

FordDomain upper_envelope(const std::vector<IsometricSphere>& raw, double eps) {
  const auto spheres = dedup_spheres(raw, eps);
  if (spheres.empty()) throw EmptyInput("upper_envelope: no spheres");

  // Breakpoints: shadow endpoints plus proper pairwise circle crossings.
  std::vector<double> cuts;
  for (const auto& s : spheres) {
    cuts.push_back(s.center - s.radius);
    cuts.push_back(s.center + s.radius);
  }
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    for (std::size_t j = i + 1; j < spheres.size(); ++j) {
      const auto& a = spheres[i];
      const auto& b = spheres[j];
      const double gap = std::abs(a.center - b.center);
      if (gap < eps) continue;  // concentric circles never cross
      if (gap >= a.radius + b.radius) continue;
      if (gap <= std::abs(a.radius - b.radius)) continue;  // nested
      cuts.push_back((a.radius * a.radius - b.radius * b.radius +
                      b.center * b.center - a.center * a.center) /
                     (2.0 * (b.center - a.center)));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a < 1e-12; }),
             cuts.end());

  // Dominant sphere on each interval, decided at the midpoint.
  struct Piece {
    double lo, hi;
    int sphere;  // -1 = real-line gap
  };
  std::vector<Piece> pieces;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    int best = -1;
    double best_h = 0.0;
    for (std::size_t i = 0; i < spheres.size(); ++i) {
      const double h = sphere_height(spheres[i], mid);
      if (h > best_h + 1e-15 ||
          (best >= 0 && std::abs(h - best_h) <= 1e-15 &&
           spheres[i].center < spheres[best].center)) {
        best = static_cast<int>(i);
        best_h = h;
      }
    }
    if (!pieces.empty() && pieces.back().sphere == best) {
      pieces.back().hi = cuts[k + 1];
    } else {
      pieces.push_back({cuts[k], cuts[k + 1], best});
    }
  }

  FordDomain dom;
  dom.alpha = cuts.front();
  dom.beta = cuts.back();
  for (const auto& pc : pieces) {
    if (pc.sphere < 0) continue;
    const auto& sp = spheres[static_cast<std::size_t>(pc.sphere)];
    EnvelopeSide side;
    side.sphere = sp;
    side.pairing = sp.generator;
    side.left = {pc.lo, sphere_height(sp, pc.lo)};
    side.right = {pc.hi, sphere_height(sp, pc.hi)};
    dom.sides.push_back(side);
  }

  for (std::size_t k = 0; k + 1 < dom.sides.size(); ++k) {
    const auto& a = dom.sides[k];
    const auto& b = dom.sides[k + 1];
    if (std::abs(a.right.x - b.left.x) > eps) continue;  // real gap between
    const double h = 0.5 * (a.right.y + b.left.y);
    if (h <= eps) continue;  // arcs meet on the real line, no vertex
    DomainVertex v;
    v.p = {0.5 * (a.right.x + b.left.x), h};
    v.left_side = static_cast<int>(k);
    v.right_side = static_cast<int>(k + 1);
    v.angle = vertex_angle(a.sphere, b.sphere, v.p);
    dom.vertices.push_back(v);
  }
  return dom;
}

RelevantSet relevant_set(const GroupPresentation& pres, const WordBall& ball) {
  const auto spheres = ball_spheres(pres, ball);
  if (spheres.empty())
    throw NoSpheres("relevant_set: no isometric spheres in the ball");
  const FordDomain dom = upper_envelope(spheres, pres.epsilon);

  RelevantSet out;
  for (const auto& side : dom.sides) {
    bool seen = false;
    for (const auto& s : out.spheres)
      if (s.same_circle(side.sphere, pres.epsilon)) seen = true;
    if (!seen) out.spheres.push_back(side.sphere);
  }

  if (ball.cutoff() <= 1) {
    out.stable = false;  // nothing to compare against; cannot confirm
  } else {
    const WordBall smaller = enumerate_ball(pres, ball.cutoff() - 1);
    const auto prev_spheres = ball_spheres(pres, smaller);
    out.stable = false;
    if (!prev_spheres.empty()) {
      const FordDomain prev = upper_envelope(prev_spheres, pres.epsilon);
      std::vector<IsometricSphere> prev_set;
      for (const auto& side : prev.sides) {
        bool seen = false;
        for (const auto& s : prev_set)
          if (s.same_circle(side.sphere, pres.epsilon)) seen = true;
        if (!seen) prev_set.push_back(side.sphere);
      }
      out.stable = prev_set.size() == out.spheres.size();
      if (out.stable) {
        for (const auto& s : out.spheres) {
          bool found = false;
          for (const auto& t : prev_set)
            if (t.same_circle(s, pres.epsilon)) found = true;
          if (!found) out.stable = false;
        }
      }
    }
  }
  return out;
}

std::vector<VertexCycle> vertex_cycles(const FordDomain& domain, double eps) {
  const auto& verts = domain.vertices;
  std::vector<VertexCycle> cycles;
  std::vector<bool> visited(verts.size(), false);
  const double tol = std::max(eps, 1e-9);

  auto find_vertex = [&](const HPoint& p) -> int {
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (std::abs(verts[i].p.x - p.x) < tol &&
          std::abs(verts[i].p.y - p.y) < tol)
        return static_cast<int>(i);
    }
    return -1;
  };

  for (std::size_t start = 0; start < verts.size(); ++start) {
    if (visited[start]) continue;
    VertexCycle cyc;
    int vi = static_cast<int>(start);
    int si = verts[start].right_side;
    const std::size_t guard = 4 * verts.size() + 4;
    for (std::size_t step = 0; step <= guard; ++step) {
      if (step == guard)
        throw PairingIncomplete("vertex_cycles: walk failed to close");
      visited[static_cast<std::size_t>(vi)] = true;
      cyc.vertices.push_back(verts[static_cast<std::size_t>(vi)].p);
      cyc.angles.push_back(verts[static_cast<std::size_t>(vi)].angle);

      const Moebius g = domain.sides[static_cast<std::size_t>(si)].pairing;
      const HPoint image = apply_interior(g, verts[static_cast<std::size_t>(vi)].p);
      const int vj = find_vertex(image);
      if (vj < 0)
        throw PairingIncomplete("vertex_cycles: image " + fmt_point(image) +
                                " of " + fmt_point(verts[static_cast<std::size_t>(vi)].p) +
                                " is not a domain vertex");
      // The image arc belongs to the partner sphere of g^{-1}; continue the
      // walk through the other side incident to the image vertex.
      IsometricSphere partner;
      try {
        partner = sphere_of(g.inverse());
      } catch (const StabilizesInfinity&) {
        throw PairingIncomplete("vertex_cycles: pairing inverse fixes infinity");
      }
      const auto& v2 = verts[static_cast<std::size_t>(vj)];
      const bool left_is_partner =
          domain.sides[static_cast<std::size_t>(v2.left_side)].sphere.same_circle(
              partner, tol);
      const bool right_is_partner =
          domain.sides[static_cast<std::size_t>(v2.right_side)].sphere.same_circle(
              partner, tol);
      if (!left_is_partner && !right_is_partner)
        throw PairingIncomplete(
            "vertex_cycles: no incident side matches the partner sphere at " +
            fmt_point(v2.p));
      const int next_side = left_is_partner ? v2.right_side : v2.left_side;
      vi = vj;
      si = next_side;
      if (vi == static_cast<int>(start) && si == verts[start].right_side) break;
    }

    for (const auto& a : cyc.angles) cyc.angle_sum += a;
    double ymin = cyc.vertices.front().y, ymax = ymin;
    for (const auto& p : cyc.vertices) {
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    cyc.height_discrepancy = ymax - ymin;
    if (cyc.angle_sum > 0.0) {
      const double t = 2.0 * std::acos(-1.0) / cyc.angle_sum;
      const long rounded = std::lround(t);
      if (rounded >= 1 && std::abs(t - static_cast<double>(rounded)) <=
                              1e-6 * static_cast<double>(rounded))
        cyc.omega = static_cast<int>(rounded);
    }
    cycles.push_back(std::move(cyc));
  }
  return cycles;
}

Report check_condition_A(const FordDomain& domain, double eps) {
  Report rep;
  rep.title = "summit interiority (condition A)";
  auto& chk = rep.check("summit_in_arc_interior");
  for (const auto& side : domain.sides) {
    const double c = side.sphere.center;
    const double margin = std::min(c - side.left.x, side.right.x - c);
    ++chk.checked;
    if (margin <= eps) {
      std::ostringstream os;
      os << "summit x=" << c << " margin=" << margin;
      chk.fail(std::abs(margin) + eps, os.str());
    }
  }
  return rep;
}

Report check_side_pairing(const FordDomain& domain, double eps) {
  Report rep;
  rep.title = "side pairing consistency";
  auto& partner_chk = rep.check("partner_side_exists");
  auto& arc_chk = rep.check("arc_maps_to_partner_arc");
  const double tol = std::max(eps, 1e-8);

  auto map_endpoint = [](const Moebius& g, const ArcPoint& p, double e) -> ArcPoint {
    if (p.y > e) {
      const HPoint q = apply_interior(g, {p.x, p.y});
      return {q.x, q.y};
    }
    const BoundaryPoint q = apply_boundary(g, {p.x, false});
    return {q.x, 0.0};
  };

  for (const auto& side : domain.sides) {
    const Moebius ginv = side.pairing.inverse();
    IsometricSphere partner_sphere;
    try {
      partner_sphere = sphere_of(ginv);
    } catch (const StabilizesInfinity&) {
      partner_chk.fail(1.0, "pairing inverse fixes infinity");
      continue;
    }
    const EnvelopeSide* partner = nullptr;
    for (const auto& other : domain.sides)
      if (other.sphere.same_circle(partner_sphere, tol)) partner = &other;
    ++partner_chk.checked;
    if (!partner) {
      std::ostringstream os;
      os << "no side on circle center=" << partner_sphere.center
         << " radius=" << partner_sphere.radius;
      partner_chk.fail(1.0, os.str());
      continue;
    }

    const ArcPoint img_l = map_endpoint(side.pairing, side.left, eps);
    const ArcPoint img_r = map_endpoint(side.pairing, side.right, eps);
    const auto dist = [](const ArcPoint& a, const ArcPoint& b) {
      return std::hypot(a.x - b.x, a.y - b.y);
    };
    const double direct = std::max(dist(img_l, partner->left), dist(img_r, partner->right));
    const double swapped = std::max(dist(img_l, partner->right), dist(img_r, partner->left));
    std::ostringstream os;
    os << "side of center=" << side.sphere.center;
    arc_chk.observe(std::min(direct, swapped), tol, os.str());
  }
  return rep;
}

Report spotcheck_fundamental(const FordDomain& domain,
                             const GroupPresentation& pres, const WordBall& ball,
                             int samples) {
  Report rep;
  rep.title = "fundamental domain spot checks";
  auto& pre_chk = rep.check("no_parabolics_in_ball");
  auto& pair_chk = rep.check("interior_points_inequivalent");
  auto& cover_chk = rep.check("translate_coverage");

  std::vector<IsometricSphere> spheres;
  for (const auto& side : domain.sides) spheres.push_back(side.sphere);

  for (const auto& el : ball.elements()) {
    ++pre_chk.checked;
    if (classify(el.mat, pres.epsilon).kind == ElementKind::Parabolic)
      pre_chk.fail(1.0, "parabolic ball element " + word_str(pres, el.word));
  }
  if (!pre_chk.passed) return rep;  // strip variant needed; checks below assume funnels

  double max_radius = 0.0;
  for (const auto& s : spheres) max_radius = std::max(max_radius, s.radius);
  const double width = domain.beta - domain.alpha;

  std::mt19937_64 rng(pres.seed);
  std::uniform_real_distribution<double> ux(domain.alpha - 0.1 * width,
                                            domain.beta + 0.1 * width);
  std::uniform_real_distribution<double> uy(0.05 * max_radius, 2.0 * max_radius);

  // (a) no nontrivial ball element maps an interior sample to another interior
  // point of the common exterior.
  const double margin = 1e-6;
  int accepted = 0, attempts = 0;
  while (accepted < samples && attempts < 1000 * samples) {
    ++attempts;
    const HPoint z{ux(rng), uy(rng)};
    if (FordDomain::exterior_margin(spheres, z) < margin) continue;
    ++accepted;
    for (const auto& el : ball.elements()) {
      if (el.word.empty()) continue;
      const HPoint w = apply_interior(el.mat, z);
      ++pair_chk.checked;
      const double m = FordDomain::exterior_margin(spheres, w);
      if (m > margin && std::hypot(w.x - z.x, w.y - z.y) > margin) {
        std::ostringstream os;
        os << word_str(pres, el.word) << " maps " << fmt_point(z) << " to "
           << fmt_point(w) << " (exterior margin " << m << ")";
        pair_chk.fail(m, os.str());
      }
    }
  }
  if (accepted < samples)
    pair_chk.note("only " + std::to_string(accepted) + " interior samples accepted");

  // (b) translate coverage of a sampled box; cutoff-limited, so the fraction is
  // reported instead of asserted.
  std::uniform_real_distribution<double> cy(0.05 * max_radius, 1.2 * max_radius);
  long covered = 0;
  for (int i = 0; i < samples; ++i) {
    const HPoint z{ux(rng), cy(rng)};
    ++cover_chk.checked;
    bool found = false;
    for (const auto& el : ball.elements()) {
      const HPoint w = apply_interior(el.mat.inverse(), z);
      if (FordDomain::exterior_margin(spheres, w) >= -1e-9) {
        found = true;
        break;
      }
    }
    if (found) ++covered;
  }
  {
    std::ostringstream os;
    os << "covered " << covered << "/" << samples << " sampled points";
    cover_chk.note(os.str());
  }
  return rep;
}

}  // namespace zb
