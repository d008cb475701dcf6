#include "zb/auxiliary.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace zb {
namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// Label for a relevant-sphere generator: reuse the base label when the matrix
// is a base generator (or its inverse), otherwise synthesize one.
std::string label_for(const GroupPresentation& base, const Moebius& g, int k) {
  for (const auto& gen : base.generators) {
    if (gen.mat.approx_equal(g, base.epsilon)) return gen.label;
    if (gen.mat.inverse().approx_equal(g, base.epsilon)) return gen.label + "_inv";
  }
  return "r" + std::to_string(k);
}

}  // namespace

std::pair<double, double> bounds_alpha_beta(const FordDomain& domain) {
  if (domain.sides.empty()) throw EmptyInput("bounds_alpha_beta: empty domain");
  return {domain.alpha, domain.beta};
}

AuxiliaryGroup build_auxiliary(
    const GroupPresentation& base, int cutoff,
    const std::optional<std::pair<double, double>>& wall_override) {
  const WordBall ball = enumerate_ball(base, cutoff);
  for (const auto& el : ball.elements()) {
    const auto cls = classify(el.mat, base.epsilon);
    if (cls.kind == ElementKind::Parabolic)
      throw ParabolicDetected("build_auxiliary: parabolic ball element " +
                              word_str(base, el.word));
    if (!el.word.empty() && std::abs(el.mat.c) < base.epsilon &&
        cls.kind != ElementKind::Elliptic)
      throw ConditionStarFails("build_auxiliary: " + word_str(base, el.word) +
                               " fixes infinity; infinity is not ordinary");
  }

  AuxiliaryGroup aux;
  aux.base = base;

  const auto spheres = ball_spheres(base, ball);
  if (spheres.empty())
    throw ConditionStarFails("build_auxiliary: no isometric spheres in ball");
  aux.domain_W = upper_envelope(spheres, base.epsilon);
  std::tie(aux.alpha, aux.beta) = bounds_alpha_beta(aux.domain_W);

  const RelevantSet rel = relevant_set(base, ball);
  aux.relevant = rel.spheres;

  double max_radius = 0.0;
  for (const auto& s : aux.relevant) max_radius = std::max(max_radius, s.radius);
  if (wall_override) {
    aux.alpha_prime = wall_override->first;
    aux.beta_prime = wall_override->second;
    if (!(aux.alpha_prime < aux.alpha && aux.beta < aux.beta_prime))
      throw Error("build_auxiliary: walls (" + fmt(aux.alpha_prime) + ", " +
                  fmt(aux.beta_prime) + ") do not enclose the envelope extent [" +
                  fmt(aux.alpha) + ", " + fmt(aux.beta) + "]");
  } else {
    const double m = 0.5 * max_radius;
    aux.alpha_prime = aux.alpha - m;
    aux.beta_prime = aux.beta + m;
  }
  aux.lambda = aux.beta_prime - aux.alpha_prime;
  aux.t_lambda = Moebius::from_entries(1.0, aux.lambda, 0.0, 1.0);

  aux.presentation_W.name = base.name + "-aux";
  aux.presentation_W.epsilon = base.epsilon;
  aux.presentation_W.word_cutoff = base.word_cutoff;
  aux.presentation_W.seed = base.seed;
  int synth = 0;
  for (const auto& s : aux.relevant) {
    const Moebius g = s.generator;
    bool covered = false;
    for (const auto& gen : aux.presentation_W.generators)
      if (gen.mat.approx_equal(g, base.epsilon) ||
          gen.mat.inverse().approx_equal(g, base.epsilon))
        covered = true;
    if (!covered)
      aux.presentation_W.generators.push_back(
          {label_for(base, g, ++synth), g});
  }
  aux.presentation_W.generators.push_back({"t", aux.t_lambda});
  return aux;
}

Report verify_auxiliary(const AuxiliaryGroup& aux, int N, int samples) {
  Report rep;
  rep.title = "auxiliary group verification";
  const double eps = aux.base.epsilon;
  const WordBall ball = enumerate_ball(aux.presentation_W, N);

  // (i) Only powers of t fix infinity.
  {
    auto& chk = rep.check("stabilizer_of_infinity");
    for (const auto& el : ball.elements()) {
      if (el.word.empty()) continue;
      if (std::abs(el.mat.c) >= eps) continue;
      const double ratio = el.mat.a / el.mat.d;   // boundary action slope
      const double shift = el.mat.b / el.mat.d;   // boundary action offset
      const double steps = shift / aux.lambda;
      const double viol = std::max(std::abs(ratio - 1.0),
                                   std::abs(steps - std::round(steps)));
      chk.observe(viol, eps, word_str(aux.presentation_W, el.word));
    }
    if (chk.checked == 0) chk.note("no infinity-fixing elements in ball");
  }

  // (ii) Envelope sides meeting the open strip carry exactly the base
  // relevant spheres; the strip side set is stable under cutoff reduction.
  // (The unrestricted relevant set of the extended group grows with every
  // cutoff as more wall-translates enter the ball, so stability only makes
  // sense inside the strip window.)
  auto strip_set = [&](const WordBall& b) {
    std::vector<IsometricSphere> out;
    const auto spheres = ball_spheres(aux.presentation_W, b);
    if (spheres.empty()) return out;
    const FordDomain env = upper_envelope(spheres, eps);
    for (const auto& side : env.sides) {
      if (side.right.x <= aux.alpha_prime + eps) continue;
      if (side.left.x >= aux.beta_prime - eps) continue;
      bool seen = false;
      for (const auto& s : out)
        if (s.same_circle(side.sphere, eps)) seen = true;
      if (!seen) out.push_back(side.sphere);
    }
    return out;
  };
  const std::vector<IsometricSphere> strip_sides = strip_set(ball);
  {
    auto& chk = rep.check("rel_preserved");
    chk.checked = static_cast<long>(strip_sides.size());
    for (const auto& s : strip_sides) {
      bool in_rel = false;
      for (const auto& r : aux.relevant)
        if (r.same_circle(s, eps)) in_rel = true;
      if (!in_rel)
        chk.fail(1.0, "extra strip sphere center=" + fmt(s.center) +
                          " radius=" + fmt(s.radius));
    }
    for (const auto& r : aux.relevant) {
      bool found = false;
      for (const auto& s : strip_sides)
        if (r.same_circle(s, eps)) found = true;
      if (!found)
        chk.fail(1.0, "missing relevant sphere center=" + fmt(r.center));
    }

    auto& stab = rep.check("rel_stability");
    ++stab.checked;
    bool stable = N > 1;
    if (stable) {
      const auto prev = strip_set(enumerate_ball(aux.presentation_W, N - 1));
      stable = prev.size() == strip_sides.size();
      for (const auto& s : strip_sides) {
        bool found = false;
        for (const auto& p : prev)
          if (p.same_circle(s, eps)) found = true;
        if (!found) stable = false;
      }
    }
    if (!stable)
      stab.fail(1.0, "strip side set not confirmed stable at cutoff " +
                         std::to_string(N));
  }

  // (iii) Sampled agreement of the strip-restricted common exterior of the
  // extended ball's spheres with the base domain.
  {
    auto& chk = rep.check("ford_type");
    const auto spheres_W = ball_spheres(aux.presentation_W, ball);
    std::vector<IsometricSphere> base_rel = aux.relevant;

    double max_radius = 0.0;
    for (const auto& s : base_rel) max_radius = std::max(max_radius, s.radius);
    std::mt19937_64 rng(aux.base.seed + 7);
    std::uniform_real_distribution<double> ux(aux.alpha_prime, aux.beta_prime);
    std::uniform_real_distribution<double> uy(1e-3, 2.0 * max_radius);
    int done = 0, attempts = 0;
    while (done < samples && attempts < 1000 * samples) {
      ++attempts;
      const HPoint z{ux(rng), uy(rng)};
      const double m_base = FordDomain::exterior_margin(base_rel, z);
      const double m_ext = FordDomain::exterior_margin(spheres_W, z);
      if (std::abs(m_base) < 1e-6 || std::abs(m_ext) < 1e-6) continue;  // boundary band
      ++done;
      ++chk.checked;
      if ((m_base > 0) != (m_ext > 0)) {
        std::ostringstream os;
        os << "(" << z.x << ", " << z.y << ") margins " << m_base << " vs "
           << m_ext;
        chk.fail(std::abs(m_base - m_ext), os.str());
      }
    }
    if (done < samples)
      chk.note("only " + std::to_string(done) + " samples outside the boundary band");
  }

  // (iv) Summit interiority for the sides meeting the strip.
  {
    auto& chk = rep.check("condition_A");
    for (const auto& side : aux.domain_W.sides) {
      const double lo = std::max(side.left.x, aux.alpha_prime);
      const double hi = std::min(side.right.x, aux.beta_prime);
      const double margin = std::min(side.sphere.center - lo, hi - side.sphere.center);
      ++chk.checked;
      if (margin <= eps)
        chk.fail(std::abs(margin) + eps,
                 "summit x=" + fmt(side.sphere.center) + " margin=" + fmt(margin));
    }
  }
  return rep;
}

}  // namespace zb
