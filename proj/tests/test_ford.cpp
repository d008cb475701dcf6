#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "zb/ford.hpp"

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

GroupPresentation cyclic_l2() {
  GroupPresentation p;
  p.name = "cyclic-l2";
  p.generators = {{"h", hecke_h(2.0)}};
  return p;
}

// Element whose isometric sphere is the prescribed circle: c = 1/r, d = -x0/r.
IsometricSphere synthetic_sphere(double center, double radius) {
  IsometricSphere s;
  s.center = center;
  s.radius = radius;
  s.generator =
      Moebius::from_entries(0.0, -radius, 1.0 / radius, -center / radius);
  return s;
}

const double kR2 = std::sqrt(2.0);

}  // namespace

TEST_CASE("single sphere gives one full-semicircle side") {
  const FordDomain dom = upper_envelope({synthetic_sphere(1.0, 2.0)});
  REQUIRE(dom.sides.size() == 1);
  CHECK(dom.alpha == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(dom.beta == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(dom.sides[0].left.x == doctest::Approx(-1.0));
  CHECK(dom.sides[0].left.y == doctest::Approx(0.0));
  CHECK(dom.sides[0].right.x == doctest::Approx(3.0));
  CHECK(dom.sides[0].right.y == doctest::Approx(0.0));
  CHECK(dom.vertices.empty());
  CHECK(dom.height(1.0) == doctest::Approx(2.0));
  CHECK(dom.height(5.0) == doctest::Approx(0.0));
}

TEST_CASE("two disjoint spheres leave a real gap and no vertex") {
  const FordDomain dom = upper_envelope(
      {synthetic_sphere(-3.0, 1.0), synthetic_sphere(3.0, 1.0)});
  REQUIRE(dom.sides.size() == 2);
  CHECK(dom.alpha == doctest::Approx(-4.0));
  CHECK(dom.beta == doctest::Approx(4.0));
  CHECK(dom.sides[0].right.x == doctest::Approx(-2.0));
  CHECK(dom.sides[0].right.y == doctest::Approx(0.0));
  CHECK(dom.sides[1].left.x == doctest::Approx(2.0));
  CHECK(dom.vertices.empty());
  CHECK(dom.height(0.0) == doctest::Approx(0.0));
}

TEST_CASE("duplicate spheres are merged before the sweep") {
  const FordDomain dom = upper_envelope(
      {synthetic_sphere(0.0, 1.0), synthetic_sphere(0.0, 1.0)});
  CHECK(dom.sides.size() == 1);
}

TEST_CASE("no spheres is rejected") {
  CHECK_THROWS_AS(upper_envelope({}), EmptyInput);
}

TEST_CASE("three-sphere envelope of the free product fixture") {
  const auto pres = hecke_free();
  const WordBall ball = enumerate_ball(pres, 4);
  const RelevantSet rel = relevant_set(pres, ball);
  REQUIRE(rel.spheres.size() == 3);
  CHECK(rel.stable);

  const FordDomain dom = upper_envelope(ball_spheres(pres, ball), pres.epsilon);
  REQUIRE(dom.sides.size() == 3);
  CHECK(dom.alpha == doctest::Approx(-3.0 - 2.0 * kR2).epsilon(1e-12));
  CHECK(dom.beta == doctest::Approx(3.0 + 2.0 * kR2).epsilon(1e-12));

  CHECK(dom.sides[0].sphere.center == doctest::Approx(-3.0));
  CHECK(dom.sides[0].sphere.radius == doctest::Approx(2.0 * kR2));
  CHECK(dom.sides[1].sphere.center == doctest::Approx(0.0));
  CHECK(dom.sides[1].sphere.radius == doctest::Approx(1.0));
  CHECK(dom.sides[2].sphere.center == doctest::Approx(3.0));
  CHECK(dom.sides[2].sphere.radius == doctest::Approx(2.0 * kR2));

  // Arcs cross at x = (r1^2 - r2^2 + c2^2 - c1^2) / (2 (c2 - c1)) = -1/3 for
  // the left pair; the crossing height is sqrt(1 - 1/9) = 2 sqrt(2) / 3.
  CHECK(dom.sides[0].right.x == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(dom.sides[1].left.x == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(dom.sides[1].right.x == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  REQUIRE(dom.vertices.size() == 2);
  CHECK(dom.vertices[0].p.x == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(dom.vertices[0].p.y == doctest::Approx(2.0 * kR2 / 3.0).epsilon(1e-12));
  CHECK(dom.vertices[1].p.x == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // Both circle pairs meet orthogonally here.
  CHECK(dom.vertices[0].angle == doctest::Approx(std::acos(-1.0) / 2).epsilon(1e-9));
  CHECK(dom.vertices[1].angle == doctest::Approx(std::acos(-1.0) / 2).epsilon(1e-9));

  // Ordering: a side summit strictly between the extremal summits.
  CHECK(dom.sides.front().sphere.center < dom.sides[1].sphere.center);
  CHECK(dom.sides[1].sphere.center < dom.sides.back().sphere.center);
}

TEST_CASE("envelope is continuous across side junctions") {
  const auto pres = hecke_free();
  const WordBall ball = enumerate_ball(pres, 4);
  const FordDomain dom = upper_envelope(ball_spheres(pres, ball), pres.epsilon);
  for (std::size_t k = 0; k + 1 < dom.sides.size(); ++k) {
    const auto& a = dom.sides[k];
    const auto& b = dom.sides[k + 1];
    if (std::abs(a.right.x - b.left.x) < 1e-9) {
      CHECK(a.right.y == doctest::Approx(b.left.y).epsilon(1e-9));
    } else {
      CHECK(a.right.y == doctest::Approx(0.0));
      CHECK(b.left.y == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("cyclic fixture keeps only the two generator spheres") {
  const auto pres = cyclic_l2();
  const WordBall ball = enumerate_ball(pres, 6);
  const RelevantSet rel = relevant_set(pres, ball);
  REQUIRE(rel.spheres.size() == 2);
  CHECK(rel.stable);

  const auto spheres = ball_spheres(pres, ball);
  CHECK(spheres.size() == 12);  // h^n for n in [-6, 6] \ {0}, one circle each
  const FordDomain dom = upper_envelope(spheres, pres.epsilon);
  REQUIRE(dom.sides.size() == 2);
  CHECK(dom.vertices.empty());
  CHECK(dom.sides[0].sphere.center == doctest::Approx(-3.0));
  CHECK(dom.sides[1].sphere.center == doctest::Approx(3.0));
  CHECK(dom.sides[0].sphere.radius == doctest::Approx(2.0 * kR2));

  // Power spheres are nested under the generator arcs: the square's sphere has
  // summit height 4/3 while the envelope above its center reaches sqrt(56)/3.
  const IsometricSphere I2 = sphere_of(compose(hecke_h(2.0), hecke_h(2.0)));
  CHECK(I2.center == doctest::Approx(-5.0 / 3.0).epsilon(1e-12));
  CHECK(I2.radius == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(dom.height(I2.center) > I2.radius + 1.0);

  // Brute-force domination: every non-generator sphere stays below the domain.
  for (const auto& s : spheres) {
    if (s.same_circle(dom.sides[0].sphere) || s.same_circle(dom.sides[1].sphere))
      continue;
    const double x = s.center;
    CHECK(dom.height(x) > s.radius + 1e-9);
  }
}

TEST_CASE("vertex cycle of the orthogonal corner has order two") {
  const auto pres = hecke_free();
  const WordBall ball = enumerate_ball(pres, 4);
  const FordDomain dom = upper_envelope(ball_spheres(pres, ball), pres.epsilon);
  const auto cycles = vertex_cycles(dom);
  REQUIRE(cycles.size() == 1);
  const auto& cyc = cycles[0];
  REQUIRE(cyc.vertices.size() == 2);
  CHECK(cyc.angle_sum == doctest::Approx(std::acos(-1.0)).epsilon(1e-9));
  CHECK(cyc.omega == 2);
  CHECK(cyc.height_discrepancy < 1e-9);
  // The cycle visits the two corners (-1/3, 2 sqrt 2 / 3), (1/3, 2 sqrt 2 / 3).
  const double xs = std::abs(cyc.vertices[0].x) + std::abs(cyc.vertices[1].x);
  CHECK(xs == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(cyc.vertices[0].y == doctest::Approx(2.0 * kR2 / 3.0).epsilon(1e-9));
}

TEST_CASE("cycle walk demands a complete pairing") {
  // Two crossing synthetic spheres whose pairings do not map arcs onto each
  // other: the image of the corner is not a domain vertex.
  const FordDomain dom = upper_envelope(
      {synthetic_sphere(-1.0, 1.5), synthetic_sphere(1.0, 1.5)});
  REQUIRE(dom.vertices.size() == 1);
  CHECK_THROWS_AS(vertex_cycles(dom), PairingIncomplete);
}

TEST_CASE("summit interiority holds on both fixtures") {
  const auto hp = hecke_free();
  const WordBall hb = enumerate_ball(hp, 4);
  const FordDomain hdom = upper_envelope(ball_spheres(hp, hb), hp.epsilon);
  const Report hrep = check_condition_A(hdom);
  CHECK(hrep.all_passed());
  CHECK(hrep.checks.at("summit_in_arc_interior").checked == 3);

  const auto cp = cyclic_l2();
  const WordBall cb = enumerate_ball(cp, 6);
  const FordDomain cdom = upper_envelope(ball_spheres(cp, cb), cp.epsilon);
  const Report crep = check_condition_A(cdom);
  CHECK(crep.all_passed());
  CHECK(crep.checks.at("summit_in_arc_interior").checked == 2);
}

TEST_CASE("summit interiority fails when arcs cross at a summit") {
  // Circles center 0 radius 1 and center 1 radius sqrt 2 cross exactly at
  // (0, 1), the first circle's summit, so its arc ends there.
  const FordDomain dom = upper_envelope(
      {synthetic_sphere(0.0, 1.0), synthetic_sphere(1.0, kR2)});
  REQUIRE(dom.sides.size() == 2);
  const Report rep = check_condition_A(dom);
  CHECK_FALSE(rep.all_passed());
  CHECK(rep.checks.at("summit_in_arc_interior").failures == 1);
}

TEST_CASE("sides map onto partner sides endpoint to endpoint") {
  const auto pres = hecke_free();
  const WordBall ball = enumerate_ball(pres, 4);
  const FordDomain dom = upper_envelope(ball_spheres(pres, ball), pres.epsilon);
  const Report rep = check_side_pairing(dom);
  CHECK(rep.all_passed());
  CHECK(rep.checks.at("arc_maps_to_partner_arc").max_violation < 1e-8);

  const auto cp = cyclic_l2();
  const WordBall cb = enumerate_ball(cp, 6);
  const FordDomain cdom = upper_envelope(ball_spheres(cp, cb), cp.epsilon);
  CHECK(check_side_pairing(cdom).all_passed());
}

TEST_CASE("cyclic fundamental domain spot check") {
  const auto pres = cyclic_l2();
  const WordBall ball = enumerate_ball(pres, 6);
  const FordDomain dom = upper_envelope(ball_spheres(pres, ball), pres.epsilon);
  const Report rep = spotcheck_fundamental(dom, pres, ball, 200);
  CHECK(rep.all_passed());
  CHECK(rep.checks.at("interior_points_inequivalent").failures == 0);
  CHECK(rep.checks.at("interior_points_inequivalent").checked > 0);
  CHECK(rep.checks.at("translate_coverage").checked == 200);
}

TEST_CASE("free product fundamental domain spot check") {
  const auto pres = hecke_free();
  const WordBall ball = enumerate_ball(pres, 5);
  const FordDomain dom = upper_envelope(ball_spheres(pres, ball), pres.epsilon);
  const Report rep = spotcheck_fundamental(dom, pres, ball, 120);
  CHECK(rep.all_passed());
  CHECK(rep.checks.at("interior_points_inequivalent").failures == 0);
}

TEST_CASE("relevant set needs at least one sphere") {
  GroupPresentation p;
  p.name = "translations-only";
  p.generators = {{"t", Moebius::from_entries(1, 2.5, 0, 1)}};
  const WordBall ball = enumerate_ball(p, 2);
  CHECK_THROWS_AS(relevant_set(p, ball), NoSpheres);
}
