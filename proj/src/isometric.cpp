#include "zb/isometric.hpp"

#include <cmath>

namespace zb {

IsometricSphere sphere_of(const Moebius& g, double eps) {
  if (std::abs(g.c) < eps)
    throw StabilizesInfinity("no isometric sphere: " + g.str() + " fixes inf");
  IsometricSphere I;
  I.center = -g.d / g.c;
  I.radius = 1.0 / std::abs(g.c);
  I.generator = g;
  return I;
}

HPoint summit(const IsometricSphere& I) { return HPoint{I.center, I.radius}; }

BoundaryInterval shadow(const IsometricSphere& I) {
  return BoundaryInterval{BoundaryPoint::at(I.center - I.radius),
                          BoundaryPoint::at(I.center + I.radius)};
}

double sphere_height(const IsometricSphere& I, double x) {
  const double dx = x - I.center;
  const double h2 = I.radius * I.radius - dx * dx;
  return h2 > 0.0 ? std::sqrt(h2) : 0.0;
}

std::vector<IsometricSphere> ball_spheres(const GroupPresentation& pres,
                                          const WordBall& ball) {
  std::vector<IsometricSphere> out;
  for (const BallElement& e : ball.elements()) {
    if (std::abs(e.mat.c) < pres.epsilon) continue;
    const IsometricSphere I = sphere_of(e.mat, pres.epsilon);
    bool dup = false;
    for (const IsometricSphere& J : out) {
      if (I.same_circle(J, pres.epsilon)) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(I);
  }
  return out;
}

namespace {

// Distance from an interior point to the circle of sphere J (negative inside).
double signed_circle_dist(const IsometricSphere& J, const HPoint& z) {
  const double dx = z.x - J.center;
  return std::hypot(dx, z.y) - J.radius;
}

HPoint sphere_point(const IsometricSphere& I, double theta) {
  return HPoint{I.center + I.radius * std::cos(theta),
                I.radius * std::sin(theta)};
}

}  // namespace

Report check_iso_identities(const GroupPresentation& pres, const WordBall& ball,
                            int samples,
                            const std::optional<ParabolicMark>& parabolic) {
  const double eps = pres.epsilon;
  Report rep;
  rep.title = "isometric sphere identities (" + pres.name + ")";
  CheckResult& iso1 = rep.check("iso1_mapping");
  CheckResult& iso2 = rep.check("iso2_height");
  CheckResult& donf = rep.check("deriv_on_sphere");
  CheckResult& chain = rep.check("chain_rule");
  CheckResult& intout = rep.check("interior_maps_out");
  CheckResult& conc = rep.check("concentric_pairs");

  const double tol = 1e-8;
  for (const BallElement& e : ball.elements()) {
    if (std::abs(e.mat.c) < eps) continue;
    const IsometricSphere I = sphere_of(e.mat, eps);
    const IsometricSphere Iinv = sphere_of(e.mat.inverse(), eps);
    for (int k = 0; k < samples; ++k) {
      const double theta = M_PI * (k + 0.5) / samples;
      const HPoint z = sphere_point(I, theta);
      const HPoint gz = apply_interior(e.mat, z);
      iso1.observe(std::abs(signed_circle_dist(Iinv, gz)), tol,
                   "g=" + e.mat.str());
      iso2.observe(std::abs(gz.y - z.y), tol, "g=" + e.mat.str());
      donf.observe(std::abs(deriv_mag(e.mat, z) - 1.0), tol, "g=" + e.mat.str());
      // Chain rule |(gh)'| = |g'(h.z)| |h'(z)| with h the ball element and g
      // ranging over the generators; compared relatively.
      for (const Generator& gen : pres.generators) {
        const Moebius prod = compose(gen.mat, e.mat);
        const double lhs = deriv_mag(prod, z);
        const double rhs = deriv_mag(gen.mat, gz) * deriv_mag(e.mat, z);
        chain.observe(std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)), tol,
                      "g=" + gen.label + " h=" + e.mat.str());
      }
      // Interior points (three rings) must map outside iso(g^{-1})'s closure.
      for (double rho : {0.3, 0.6, 0.9}) {
        const HPoint zi = HPoint{I.center + rho * I.radius * std::cos(theta),
                                 rho * I.radius * std::sin(theta)};
        const HPoint gzi = apply_interior(e.mat, zi);
        intout.observe(std::max(0.0, -signed_circle_dist(Iinv, gzi)), tol,
                       "g=" + e.mat.str());
      }
    }
  }

  const std::vector<IsometricSphere> spheres = ball_spheres(pres, ball);
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    for (std::size_t j = i + 1; j < spheres.size(); ++j) {
      ++conc.checked;
      if (std::abs(spheres[i].center - spheres[j].center) < eps &&
          std::abs(spheres[i].radius - spheres[j].radius) >= eps) {
        conc.fail(std::abs(spheres[i].radius - spheres[j].radius),
                  "centers " + std::to_string(spheres[i].center));
      }
    }
  }

  if (parabolic) {
    CheckResult& shift = rep.check("translate_shift");
    for (const BallElement& e : ball.elements()) {
      if (std::abs(e.mat.c) < eps) continue;
      const IsometricSphere I = sphere_of(e.mat, eps);
      Moebius tp = parabolic->t;
      Moebius tm = parabolic->t.inverse();
      for (int n = 1; n <= 2; ++n) {
        // iso(g t^n) should be iso(g) shifted by -n*lambda, same radius.
        const IsometricSphere Sp = sphere_of(compose(e.mat, tp), eps);
        const IsometricSphere Sm = sphere_of(compose(e.mat, tm), eps);
        const double vp =
            std::max(std::abs(Sp.center - (I.center - n * parabolic->lambda)),
                     std::abs(Sp.radius - I.radius));
        const double vm =
            std::max(std::abs(Sm.center - (I.center + n * parabolic->lambda)),
                     std::abs(Sm.radius - I.radius));
        shift.observe(vp, tol, "g=" + e.mat.str());
        shift.observe(vm, tol, "g=" + e.mat.str());
        tp = compose(tp, parabolic->t);
        tm = compose(tm, parabolic->t.inverse());
      }
    }
  }
  return rep;
}

CheckResult shadow_limit_report(const GroupPresentation& pres,
                                const WordBall& ball,
                                const std::vector<ConjClass>& classes) {
  CheckResult res;
  const std::vector<IsometricSphere> spheres = ball_spheres(pres, ball);
  long contact = 0;
  for (const IsometricSphere& I : spheres) {
    ++res.checked;
    const BoundaryInterval W = shadow(I);
    bool hit = false;
    for (const ConjClass& c : classes) {
      if (circular_contains(W, c.attracting) ||
          circular_contains(W, c.repelling)) {
        hit = true;
        break;
      }
    }
    if (hit) ++contact;
  }
  res.note("spheres_with_limit_contact=" + std::to_string(contact) + "/" +
           std::to_string(res.checked) + " at cutoff " +
           std::to_string(ball.cutoff()));
  return res;
}

}  // namespace zb
