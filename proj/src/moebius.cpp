#include "zb/moebius.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace zb {

Moebius Moebius::canonical(double a, double b, double c, double d) {
  // Scale out determinant drift (inputs are assumed to have det > 0).  For
  // entries around 1e8 and beyond the a*d - b*c cancellation can swallow the
  // determinant entirely (even making it negative); rescaling by sqrt of that
  // junk would poison the entries with NaN, so leave such products unscaled —
  // they compare unequal to everything, which is the safe outcome.
  double det = a * d - b * c;
  if (det > 0.0 && std::isfinite(det)) {
    double s = 1.0 / std::sqrt(det);
    a *= s;
    b *= s;
    c *= s;
    d *= s;
  }
  // Canonical sign: entry of largest magnitude positive, ties by a,b,c,d.
  const double m =
      std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
  double lead = d;
  if (std::abs(a) == m)
    lead = a;
  else if (std::abs(b) == m)
    lead = b;
  else if (std::abs(c) == m)
    lead = c;
  if (lead < 0.0) {
    a = -a;
    b = -b;
    c = -c;
    d = -d;
  }
  Moebius g;
  g.a = a;
  g.b = b;
  g.c = c;
  g.d = d;
  return g;
}

Moebius Moebius::from_entries(double a, double b, double c, double d, double eps) {
  const double det = a * d - b * c;
  if (!(det > eps)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "matrix [%g %g; %g %g] has determinant %g, expected > 0", a, b,
                  c, d, det);
    throw BadDeterminant(buf);
  }
  return canonical(a, b, c, d);
}

bool Moebius::approx_equal(const Moebius& o, double eps) const {
  // Entry roundoff is relative to entry magnitude; an absolute test would
  // reject genuinely equal elements once entries grow past ~1/eps of the
  // roundoff floor.  Scale the tolerance by the larger entry magnitude
  // (floored at 1 so small matrices keep the absolute behaviour).
  const double m1 =
      std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
  const double m2 = std::max(std::max(std::abs(o.a), std::abs(o.b)),
                             std::max(std::abs(o.c), std::abs(o.d)));
  const double tol = eps * std::max(1.0, std::max(m1, m2));
  return std::abs(a - o.a) < tol && std::abs(b - o.b) < tol &&
         std::abs(c - o.c) < tol && std::abs(d - o.d) < tol;
}

std::array<std::int64_t, 4> Moebius::quantized(double eps) const {
  const double inv = 1.0 / eps;
  return {std::llround(a * inv), std::llround(b * inv), std::llround(c * inv),
          std::llround(d * inv)};
}

std::string Moebius::str() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "[%.12g %.12g; %.12g %.12g]", a, b, c, d);
  return buf;
}

Moebius compose(const Moebius& g, const Moebius& h) {
  return Moebius::canonical(g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d,
                            g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d);
}

std::string BoundaryPoint::str() const {
  if (infinite) return "inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

BoundaryPoint apply_boundary(const Moebius& g, const BoundaryPoint& p, double eps) {
  if (p.infinite) {
    if (std::abs(g.c) < eps) return BoundaryPoint::inf();
    return BoundaryPoint::at(g.a / g.c);
  }
  const double den = g.c * p.x + g.d;
  if (std::abs(den) < eps) return BoundaryPoint::inf();
  return BoundaryPoint::at((g.a * p.x + g.b) / den);
}

HPoint apply_interior(const Moebius& g, const HPoint& z) {
  // (az+b)/(cz+d) with the imaginary part computed as y/|cz+d|^2 for
  // stability; that form is manifestly positive.
  const double dr = g.c * z.x + g.d;
  const double di = g.c * z.y;
  const double den2 = dr * dr + di * di;
  const double nr = g.a * z.x + g.b;
  const double ni = g.a * z.y;
  HPoint w;
  w.x = (nr * dr + ni * di) / den2;
  w.y = z.y / den2;
  return w;
}

Geodesic apply_geodesic(const Moebius& g, const Geodesic& gamma, double eps) {
  return Geodesic{apply_boundary(g, gamma.minus_end, eps),
                  apply_boundary(g, gamma.plus_end, eps)};
}

BoundaryInterval apply_interval(const Moebius& g, const BoundaryInterval& I,
                                double eps) {
  return BoundaryInterval{apply_boundary(g, I.left, eps),
                          apply_boundary(g, I.right, eps)};
}

double deriv_mag(const Moebius& g, const BoundaryPoint& p, double eps) {
  if (p.infinite) {
    if (std::abs(g.c) < eps) return g.a * g.a;
    return 0.0;
  }
  const double den = g.c * p.x + g.d;
  if (std::abs(den) < eps)
    throw PoleError("derivative pole at " + p.str() + " for " + g.str());
  return 1.0 / (den * den);
}

double deriv_mag(const Moebius& g, const HPoint& z) {
  const double dr = g.c * z.x + g.d;
  const double di = g.c * z.y;
  return 1.0 / (dr * dr + di * di);
}

std::string kind_name(ElementKind k) {
  switch (k) {
    case ElementKind::Identity: return "identity";
    case ElementKind::Elliptic: return "elliptic";
    case ElementKind::Parabolic: return "parabolic";
    case ElementKind::Hyperbolic: return "hyperbolic";
  }
  return "?";
}

Classification classify(const Moebius& g, double eps, int max_order) {
  Classification res;
  if (g.is_identity(eps)) {
    res.kind = ElementKind::Identity;
    return res;
  }
  const double t = std::abs(g.trace());
  if (std::abs(t - 2.0) < eps) {
    res.kind = ElementKind::Parabolic;
    if (t != 2.0) {
      res.ambiguous = true;
      res.alternative = t < 2.0 ? ElementKind::Elliptic : ElementKind::Hyperbolic;
    }
    return res;
  }
  if (t < 2.0) {
    res.kind = ElementKind::Elliptic;
    Moebius p = g;
    for (int n = 2; n <= max_order; ++n) {
      p = compose(p, g);
      if (p.is_identity(eps)) {
        res.elliptic_order = n;
        break;
      }
    }
    // g itself of order 1 impossible (not identity); order 2 found by loop.
    return res;
  }
  res.kind = ElementKind::Hyperbolic;
  return res;
}

FixedPointSet fixed_points(const Moebius& g, double eps) {
  const Classification cl = classify(g, eps);
  if (cl.kind == ElementKind::Identity)
    throw IdentityHasNoFixedPointSet("fixed_points of (near-)identity " + g.str());
  FixedPointSet fp;
  fp.kind = cl.kind;
  if (std::abs(g.c) < eps) {
    // Fixes infinity.  Elliptic elements always have c != 0, so only the
    // parabolic and hyperbolic cases occur here.
    if (cl.kind == ElementKind::Parabolic) {
      fp.parabolic_point = BoundaryPoint::inf();
      return fp;
    }
    const BoundaryPoint finite = BoundaryPoint::at(g.b / (g.d - g.a));
    if (1.0 / (g.d * g.d) < 1.0) {
      fp.attracting = finite;
      fp.repelling = BoundaryPoint::inf();
    } else {
      fp.attracting = BoundaryPoint::inf();
      fp.repelling = finite;
    }
    return fp;
  }
  const double tr = g.trace();
  const double disc = tr * tr - 4.0;
  switch (cl.kind) {
    case ElementKind::Hyperbolic: {
      const double s = std::sqrt(std::max(disc, 0.0));
      const double x1 = (g.a - g.d + s) / (2.0 * g.c);
      const double x2 = (g.a - g.d - s) / (2.0 * g.c);
      // Attracting fixed point is the one where |g'| = 1/(cx+d)^2 < 1.
      const double m1 = std::abs(g.c * x1 + g.d);
      if (m1 > 1.0) {
        fp.attracting = BoundaryPoint::at(x1);
        fp.repelling = BoundaryPoint::at(x2);
      } else {
        fp.attracting = BoundaryPoint::at(x2);
        fp.repelling = BoundaryPoint::at(x1);
      }
      return fp;
    }
    case ElementKind::Parabolic: {
      fp.parabolic_point = BoundaryPoint::at((g.a - g.d) / (2.0 * g.c));
      return fp;
    }
    case ElementKind::Elliptic: {
      const double s = std::sqrt(std::max(-disc, 0.0));
      // Choose the root with positive imaginary part.
      fp.elliptic_center.x = (g.a - g.d) / (2.0 * g.c);
      fp.elliptic_center.y = std::abs(s / (2.0 * g.c));
      return fp;
    }
    default: break;
  }
  throw Error("unreachable fixed_points case");
}

double translation_length(const Moebius& g, double eps) {
  if (classify(g, eps).kind != ElementKind::Hyperbolic)
    throw NotHyperbolic("translation_length of non-hyperbolic " + g.str());
  return 2.0 * std::acosh(std::abs(g.trace()) / 2.0);
}

bool circular_order(const BoundaryPoint& a, const BoundaryPoint& b,
                    const BoundaryPoint& c) {
  if (a.infinite) {
    if (b.infinite || c.infinite) return false;
    return b.x < c.x;  // arc (inf -> c) is {x < c}
  }
  if (b.infinite) {
    if (c.infinite) return false;
    return c.x < a.x;  // arc (a -> c) passes infinity iff it wraps
  }
  if (c.infinite) return b.x > a.x;  // arc (a -> inf) is {x > a}
  return (a.x < b.x && b.x < c.x) || (c.x < a.x && a.x < b.x) ||
         (b.x < c.x && c.x < a.x);
}

bool circular_contains(const BoundaryInterval& I, const BoundaryPoint& p) {
  return circular_order(I.left, p, I.right);
}

namespace {

// Either a vertical line x = pos or a半circle; normalized curve form.
struct CurveForm {
  bool vertical;
  double pos;     // vertical: x-offset
  double center;  // circle
  double radius;
};

CurveForm curve_of(const Geodesic& g) {
  CurveForm f{};
  if (g.minus_end.infinite || g.plus_end.infinite) {
    f.vertical = true;
    f.pos = g.minus_end.infinite ? g.plus_end.x : g.minus_end.x;
    return f;
  }
  f.vertical = false;
  f.center = 0.5 * (g.minus_end.x + g.plus_end.x);
  f.radius = 0.5 * std::abs(g.plus_end.x - g.minus_end.x);
  return f;
}

bool same_endpoint_sets(const Geodesic& g1, const Geodesic& g2, double eps) {
  return (g1.minus_end.approx_equal(g2.minus_end, eps) &&
          g1.plus_end.approx_equal(g2.plus_end, eps)) ||
         (g1.minus_end.approx_equal(g2.plus_end, eps) &&
          g1.plus_end.approx_equal(g2.minus_end, eps));
}

bool shares_endpoint(const Geodesic& g1, const Geodesic& g2, double eps) {
  return g1.minus_end.approx_equal(g2.minus_end, eps) ||
         g1.minus_end.approx_equal(g2.plus_end, eps) ||
         g1.plus_end.approx_equal(g2.minus_end, eps) ||
         g1.plus_end.approx_equal(g2.plus_end, eps);
}

}  // namespace

std::optional<HPoint> geodesic_meets(const Geodesic& g1, const Geodesic& g2,
                                     double eps) {
  if (same_endpoint_sets(g1, g2, eps))
    throw CoincidentGeodesics("geodesics share both endpoints");
  if (shares_endpoint(g1, g2, eps)) return std::nullopt;  // meet on the boundary
  // Transversal intersection iff the endpoints interlace: exactly one endpoint
  // of g1 lies inside the arc cut out by g2's endpoints.
  const BoundaryInterval arc{g2.minus_end, g2.plus_end};
  const bool in1 = circular_contains(arc, g1.minus_end);
  const bool in2 = circular_contains(arc, g1.plus_end);
  if (in1 == in2) return std::nullopt;

  const CurveForm f1 = curve_of(g1);
  const CurveForm f2 = curve_of(g2);
  HPoint p;
  if (f1.vertical && f2.vertical) return std::nullopt;  // parallel verticals
  if (f1.vertical || f2.vertical) {
    const CurveForm& v = f1.vertical ? f1 : f2;
    const CurveForm& c = f1.vertical ? f2 : f1;
    const double dy2 = c.radius * c.radius - (v.pos - c.center) * (v.pos - c.center);
    if (dy2 <= 0.0) return std::nullopt;
    p.x = v.pos;
    p.y = std::sqrt(dy2);
    return p;
  }
  const double dc = f2.center - f1.center;
  if (std::abs(dc) < eps) return std::nullopt;  // concentric, no transversal cut
  p.x = (f1.radius * f1.radius - f2.radius * f2.radius + f2.center * f2.center -
         f1.center * f1.center) /
        (2.0 * dc);
  const double dy2 = f1.radius * f1.radius - (p.x - f1.center) * (p.x - f1.center);
  if (dy2 <= 0.0) return std::nullopt;
  p.y = std::sqrt(dy2);
  return p;
}

double geodesic_position(const Geodesic& gamma, const HPoint& p) {
  // Map the geodesic to the upward vertical (0, inf); log of the image height
  // is the unit-speed arclength parameter.
  if (gamma.plus_end.infinite) return std::log(p.y);
  if (gamma.minus_end.infinite) {
    // z -> -1/(z - v) sends v -> inf downstairs... here minus_end = inf maps
    // to 0 and plus_end = v maps to inf via z -> 1/(v - z).
    const double dx = gamma.plus_end.x - p.x;
    return std::log(p.y / (dx * dx + p.y * p.y));
  }
  const double u = gamma.minus_end.x, v = gamma.plus_end.x;
  // phi(z) = (z-u)/(v-z) (sign-adjusted to preserve the upper half-plane)
  // sends u -> 0, v -> inf; Im phi = (v-u) y / |v-z|^2.
  const double dr = v - p.x;
  const double den = dr * dr + p.y * p.y;
  return std::log(std::abs(v - u) * p.y / den);
}

double hyperbolic_distance(const HPoint& p, const HPoint& q) {
  const double dx = p.x - q.x, dy = p.y - q.y;
  return std::acosh(1.0 + (dx * dx + dy * dy) / (2.0 * p.y * q.y));
}

}  // namespace zb
