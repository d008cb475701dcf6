#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "zb/isometric.hpp"

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

}  // namespace

TEST_CASE("sphere of the inversion and of h_lambda") {
  const IsometricSphere Is = sphere_of(Moebius::from_entries(0, -1, 1, 0));
  CHECK(Is.center == doctest::Approx(0.0));
  CHECK(Is.radius == doctest::Approx(1.0));

  // Closed forms: center (lambda+1)/(1-lambda), radius 2 sqrt(lambda)/(lambda-1).
  for (double lambda : {2.0, 3.0, 5.0}) {
    const IsometricSphere Ih = sphere_of(hecke_h(lambda));
    CHECK(Ih.center ==
          doctest::Approx((lambda + 1) / (1 - lambda)).epsilon(1e-12));
    CHECK(Ih.radius ==
          doctest::Approx(2 * std::sqrt(lambda) / (lambda - 1)).epsilon(1e-12));
    // The sphere of the inverse is mirrored through the origin here.
    const IsometricSphere Iv = sphere_of(hecke_h(lambda).inverse());
    CHECK(Iv.center == doctest::Approx(-Ih.center).epsilon(1e-12));
    CHECK(Iv.radius == doctest::Approx(Ih.radius).epsilon(1e-12));
  }
  // lambda = 2: center -3, radius 2 sqrt 2.
  const IsometricSphere I2 = sphere_of(hecke_h(2.0));
  CHECK(I2.center == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(I2.radius == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(sphere_of(Moebius::from_entries(1, 2.5, 0, 1)),
                  StabilizesInfinity);
}

TEST_CASE("summit and shadow") {
  const IsometricSphere Is = sphere_of(Moebius::from_entries(0, -1, 1, 0));
  const HPoint sm = summit(Is);
  CHECK(sm.x == doctest::Approx(0.0));
  CHECK(sm.y == doctest::Approx(1.0));

  const IsometricSphere Ih = sphere_of(hecke_h(2.0));
  const HPoint smh = summit(Ih);
  CHECK(smh.x == doctest::Approx(-3.0));
  CHECK(smh.y == doctest::Approx(2 * std::sqrt(2.0)));
  // Apex property against sampled sphere points.
  for (int k = 0; k < 100; ++k) {
    const double theta = M_PI * (k + 0.5) / 100;
    CHECK(smh.y >= Ih.radius * std::sin(theta) - 1e-12);
  }

  const BoundaryInterval W = shadow(Ih);
  CHECK(W.left.x == doctest::Approx(-3 - 2 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(W.right.x == doctest::Approx(-3 + 2 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK_FALSE(circular_contains(W, BoundaryPoint::inf()));

  // Height helper: zero outside the shadow, radius at the center.
  CHECK(sphere_height(Ih, Ih.center) == doctest::Approx(Ih.radius));
  CHECK(sphere_height(Ih, Ih.center + 2 * Ih.radius) == 0.0);
}

TEST_CASE("identity suite on the hecke-style ball") {
  const GroupPresentation p = hecke_free();
  const WordBall ball = enumerate_ball(p, 4);
  const Report rep = check_iso_identities(p, ball, 50);
  for (const char* name : {"iso1_mapping", "iso2_height", "deriv_on_sphere",
                           "chain_rule", "interior_maps_out", "concentric_pairs"}) {
    REQUIRE(rep.checks.count(name) == 1);
    const CheckResult& r = rep.checks.at(name);
    CHECK(r.passed);
    CHECK(r.max_violation < 1e-8);
  }
  // An involution has iso(g) = iso(g^{-1}) exactly.
  const IsometricSphere a = sphere_of(p.generators[1].mat);
  const IsometricSphere b = sphere_of(p.generators[1].mat.inverse());
  CHECK(a.same_circle(b, 1e-15));
}

TEST_CASE("translate-compatibility when a parabolic is designated") {
  GroupPresentation p = hecke_free();
  const double lambda = 6 + 6 * std::sqrt(2.0);
  p.generators.push_back({"t", Moebius::from_entries(1, lambda, 0, 1)});
  const WordBall ball = enumerate_ball(p, 2);
  const Report rep = check_iso_identities(
      p, ball, 20, ParabolicMark{Moebius::from_entries(1, lambda, 0, 1), lambda});
  REQUIRE(rep.checks.count("translate_shift") == 1);
  CHECK(rep.checks.at("translate_shift").passed);
}

TEST_CASE("shadows meet the limit set at desk scale") {
  const GroupPresentation p = hecke_free();
  const WordBall ball = enumerate_ball(p, 4);
  const auto classes = primitive_hyperbolic_classes(p, ball, 5.0);
  const CheckResult res = shadow_limit_report(p, ball, classes);
  CHECK(res.checked > 0);
  // The fixture's limit set is {-1, 1}; both lie inside every large sphere's
  // shadow, so contact is reported for the generator spheres at least.
  REQUIRE(!res.notes.empty());
}
