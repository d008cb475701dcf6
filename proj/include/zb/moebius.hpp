#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>

#include "zb/errors.hpp"

namespace zb {

// Numerical comparison tolerance used throughout unless a caller overrides it.
inline constexpr double kEps = 1e-9;

struct BadDeterminant : Error {
  explicit BadDeterminant(const std::string& m) : Error(m) {}
};
struct PoleError : Error {
  explicit PoleError(const std::string& m) : Error(m) {}
};
struct NotHyperbolic : Error {
  explicit NotHyperbolic(const std::string& m) : Error(m) {}
};
struct CoincidentGeodesics : Error {
  explicit CoincidentGeodesics(const std::string& m) : Error(m) {}
};
struct IdentityHasNoFixedPointSet : Error {
  explicit IdentityHasNoFixedPointSet(const std::string& m) : Error(m) {}
};

// Orientation-preserving isometry of the upper half-plane, stored as a real
// 2x2 matrix with det = +1 and a canonical overall sign: the entry of largest
// magnitude is positive, ties broken in the order a, b, c, d.  Two matrices
// differing by sign therefore compare equal, as they must in PSL(2,R).
struct Moebius {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  Moebius() = default;

  // Normalizes det to +1 and applies the canonical sign.  Throws
  // BadDeterminant when det <= eps (orientation-reversing or singular input).
  static Moebius from_entries(double a, double b, double c, double d,
                              double eps = kEps);

  static Moebius identity() { return Moebius{}; }

  Moebius inverse() const { return canonical(d, -b, -c, a); }

  double trace() const { return a + d; }

  bool approx_equal(const Moebius& o, double eps = kEps) const;

  bool is_identity(double eps = kEps) const {
    return approx_equal(Moebius{}, eps);
  }

  // Quantized key at resolution eps for hashing/dedup of group elements.
  std::array<std::int64_t, 4> quantized(double eps = kEps) const;

  std::string str() const;

 private:
  friend Moebius compose(const Moebius&, const Moebius&);
  static Moebius canonical(double a, double b, double c, double d);
};

// Matrix product, renormalized to the canonical representative.
Moebius compose(const Moebius& g, const Moebius& h);

// Point of the boundary circle R u {infinity} (Alexandroff compactification).
struct BoundaryPoint {
  double x = 0.0;
  bool infinite = false;

  static BoundaryPoint at(double x) { return BoundaryPoint{x, false}; }
  static BoundaryPoint inf() { return BoundaryPoint{0.0, true}; }

  bool approx_equal(const BoundaryPoint& o, double eps = kEps) const {
    if (infinite || o.infinite) return infinite == o.infinite;
    return std::abs(x - o.x) < eps;
  }
  std::string str() const;
};

// Point of the open upper half-plane, y > 0.
struct HPoint {
  double x = 0.0, y = 1.0;
  std::complex<double> z() const { return {x, y}; }
  bool approx_equal(const HPoint& o, double eps = kEps) const {
    return std::abs(x - o.x) < eps && std::abs(y - o.y) < eps;
  }
};

// Complete geodesic, recorded by its ordered pair of distinct endpoints
// (backward endpoint first: the geodesic runs from minus_end to plus_end).
struct Geodesic {
  BoundaryPoint minus_end, plus_end;
};

// Open circular arc from `left` counterclockwise to `right`.  Counterclockwise
// means increasing x along R, wrapping through infinity.
struct BoundaryInterval {
  BoundaryPoint left, right;
};

BoundaryPoint apply_boundary(const Moebius& g, const BoundaryPoint& p,
                             double eps = kEps);
HPoint apply_interior(const Moebius& g, const HPoint& z);
Geodesic apply_geodesic(const Moebius& g, const Geodesic& gamma,
                        double eps = kEps);
// Moebius maps preserve circular orientation, so arcs map endpoint-to-endpoint.
BoundaryInterval apply_interval(const Moebius& g, const BoundaryInterval& I,
                                double eps = kEps);

// |g'(p)| = 1/|c p + d|^2.  Throws PoleError when p is the pole g^{-1}.inf of
// the derivative (within eps).  At p = infinity the value is the two-sided
// limit: 0 when c != 0, and a^2 when c = 0.
double deriv_mag(const Moebius& g, const BoundaryPoint& p, double eps = kEps);
double deriv_mag(const Moebius& g, const HPoint& z);

enum class ElementKind { Identity, Elliptic, Parabolic, Hyperbolic };

std::string kind_name(ElementKind k);

struct Classification {
  ElementKind kind = ElementKind::Identity;
  // For elliptic elements: smallest n <= max_order with g^n = id, or 0 if none
  // was found below the cap.
  int elliptic_order = 0;
  // Set when |tr| lies within eps of 2 without being exactly 2; `alternative`
  // then records the classification the raw trace value would give.
  bool ambiguous = false;
  ElementKind alternative = ElementKind::Parabolic;
};

Classification classify(const Moebius& g, double eps = kEps,
                        int max_order = 12);

struct FixedPointSet {
  ElementKind kind = ElementKind::Identity;
  // Hyperbolic: both set; the attracting point is the one with |g'| < 1.
  BoundaryPoint attracting, repelling;
  // Parabolic: the unique boundary fixed point.
  BoundaryPoint parabolic_point;
  // Elliptic: the fixed point in the upper half-plane.
  HPoint elliptic_center;
};

// Throws IdentityHasNoFixedPointSet for (near-)identity input.
FixedPointSet fixed_points(const Moebius& g, double eps = kEps);

// 2 arccosh(|tr|/2); throws NotHyperbolic unless classify() says hyperbolic.
double translation_length(const Moebius& g, double eps = kEps);

// True iff b lies strictly between a and c counterclockwise (all distinct).
bool circular_order(const BoundaryPoint& a, const BoundaryPoint& b,
                    const BoundaryPoint& c);

// True iff p lies strictly inside the open arc (membership is exact, no eps).
bool circular_contains(const BoundaryInterval& I, const BoundaryPoint& p);

// Transversal intersection point of two complete geodesics, present iff their
// endpoint pairs interlace on the boundary circle.  Throws CoincidentGeodesics
// when the endpoint sets agree within eps.
std::optional<HPoint> geodesic_meets(const Geodesic& g1, const Geodesic& g2,
                                     double eps = kEps);

// Signed arclength position of a point lying on the geodesic, measured along
// the unit-speed parametrization toward plus_end (zero point is an arbitrary
// but fixed gauge per geodesic).  Used to order crossing points.
double geodesic_position(const Geodesic& gamma, const HPoint& p);

// Hyperbolic distance between interior points.
double hyperbolic_distance(const HPoint& p, const HPoint& q);

}  // namespace zb
