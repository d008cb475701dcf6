#include "zb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "zb/spec_io.hpp"

namespace zb {

namespace {

constexpr double kCanvasWidth = 900.0;
constexpr int kShadeSamples = 600;

// World-to-canvas transform for the closed upper half-plane.  SVG's y axis
// points down, so height h maps to top - h * scale.
struct Frame {
  double x0 = -1.0, x1 = 1.0;  // world extent
  double top = 1.0;            // world height of the canvas top edge
  double scale = 1.0;
  double band = 26.0;  // label band below the axis, in canvas units

  double X(double x) const { return (x - x0) * scale; }
  double Y(double h) const { return (top - h) * scale; }
  double width() const { return (x1 - x0) * scale; }
  double height() const { return top * scale + band; }
};

std::string fmt(double v) {
  char buf[48];
  // Flush negative zero so mirrored geometry renders symmetrically.
  if (v == 0.0) v = 0.0;
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string subscript(int n) {
  static const char* digits[10] = {"₀", "₁", "₂", "₃",
                                   "₄", "₅", "₆", "₇",
                                   "₈", "₉"};
  std::string out;
  for (char c : std::to_string(n)) out += digits[c - '0'];
  return out;
}

Frame frame_for(double lo, double hi, double max_h) {
  Frame f;
  if (!(hi > lo)) {
    lo = -1.0;
    hi = 1.0;
  }
  const double pad = std::max(0.08 * (hi - lo), 0.25);
  f.x0 = lo - pad;
  f.x1 = hi + pad;
  f.top = std::max(max_h * 1.25, 0.2 * (f.x1 - f.x0));
  f.scale = kCanvasWidth / (f.x1 - f.x0);
  return f;
}

double max_sphere_height(const FordDomain& domain) {
  double h = 0.0;
  for (const EnvelopeSide& s : domain.sides) h = std::max(h, s.sphere.radius);
  return h;
}

void open_svg(std::string& out, const Frame& f) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt(f.width()) + "\" height=\"" + fmt(f.height()) +
         "\" viewBox=\"0 0 " + fmt(f.width()) + " " + fmt(f.height()) +
         "\" font-family=\"sans-serif\" font-size=\"13\">\n";
}

// Region on or above every sphere, shaded between the envelope and the canvas
// top over [lo, hi].  The envelope is sampled at fixed resolution; sampling
// density only affects the polygon, not which region is shaded.
void shade_region(std::string& out, const Frame& f, const FordDomain& domain,
                  double lo, double hi, const char* css_class) {
  out += "<path class=\"";
  out += css_class;
  out += "\" fill=\"#e8eef7\" stroke=\"none\" d=\"M" + fmt(f.X(lo)) + "," +
         fmt(f.Y(f.top));
  out += " L" + fmt(f.X(lo)) + "," + fmt(f.Y(domain.height(lo)));
  for (int i = 1; i <= kShadeSamples; ++i) {
    const double x = lo + (hi - lo) * i / kShadeSamples;
    out += " L" + fmt(f.X(x)) + "," + fmt(f.Y(domain.height(x)));
  }
  out += " L" + fmt(f.X(hi)) + "," + fmt(f.Y(f.top)) + " Z\"/>\n";
}

void draw_axis(std::string& out, const Frame& f) {
  out += "<line class=\"axis\" x1=\"0\" y1=\"" + fmt(f.Y(0)) + "\" x2=\"" +
         fmt(f.width()) + "\" y2=\"" + fmt(f.Y(0)) +
         "\" stroke=\"#111827\" stroke-width=\"1.5\"/>\n";
}

void draw_arcs(std::string& out, const Frame& f, const FordDomain& domain) {
  for (const EnvelopeSide& s : domain.sides) {
    const double r = s.sphere.radius * f.scale;
    // Left-to-right over the top of the circle is clockwise on the canvas.
    out += "<path class=\"sphere-arc\" fill=\"none\" stroke=\"#1f2937\" "
           "stroke-width=\"1.8\" d=\"M" +
           fmt(f.X(s.left.x)) + "," + fmt(f.Y(s.left.y)) + " A" + fmt(r) +
           "," + fmt(r) + " 0 0 1 " + fmt(f.X(s.right.x)) + "," +
           fmt(f.Y(s.right.y)) + "\"/>\n";
  }
}

}  // namespace

std::string domain_svg_text(const FordDomain& domain) {
  const Frame f =
      frame_for(domain.alpha, domain.beta, max_sphere_height(domain));
  std::string out;
  open_svg(out, f);
  if (!domain.sides.empty()) shade_region(out, f, domain, f.x0, f.x1, "region-K");
  draw_axis(out, f);
  draw_arcs(out, f, domain);
  out += "</svg>\n";
  return out;
}

std::string branch_svg_text(const BranchSystem& sys,
                            const AuxiliaryGroup& aux) {
  double lo = aux.alpha_prime, hi = aux.beta_prime;
  for (const Branch& b : sys.branches) {
    lo = std::min(lo, b.x);
    hi = std::max(hi, b.x);
  }
  const Frame f = frame_for(lo, hi, max_sphere_height(aux.domain_W));
  std::string out;
  open_svg(out, f);

  // Layer 1: the part of the common exterior between the strip walls.
  shade_region(out, f, aux.domain_W, aux.alpha_prime, aux.beta_prime,
               "region-W");
  draw_axis(out, f);
  draw_arcs(out, f, aux.domain_W);
  for (double wall : {aux.alpha_prime, aux.beta_prime})
    out += "<line class=\"strip-wall\" x1=\"" + fmt(f.X(wall)) + "\" y1=\"" +
           fmt(f.Y(0)) + "\" x2=\"" + fmt(f.X(wall)) + "\" y2=\"" +
           fmt(f.Y(f.top)) + "\" stroke=\"#6b7280\" stroke-width=\"1\" "
           "stroke-dasharray=\"7,4\"/>\n";

  // Layer 2: one base line per distinct base point, left to right.
  std::vector<double> xs;
  for (const Branch& b : sys.branches) xs.push_back(b.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double u, double v) { return std::abs(u - v) < 1e-9; }),
           xs.end());
  for (double x : xs)
    out += "<line class=\"branch-base\" x1=\"" + fmt(f.X(x)) + "\" y1=\"" +
           fmt(f.Y(0)) + "\" x2=\"" + fmt(f.X(x)) + "\" y2=\"" +
           fmt(f.Y(f.top)) + "\" stroke=\"#111827\" stroke-width=\"1.6\"/>\n";

  // Layer 3: facing stripes and labels in index order.  The stripe sits on
  // the side of the base line the branch opens toward.
  const double stripe_w = 8.0;
  for (const Branch& b : sys.branches) {
    const bool right = b.facing == Facing::Right;
    const double edge = f.X(b.x);
    out += "<rect class=\"facing-stripe\" x=\"" +
           fmt(right ? edge : edge - stripe_w) + "\" y=\"" + fmt(f.Y(f.top)) +
           "\" width=\"" + fmt(stripe_w) + "\" height=\"" +
           fmt(f.Y(0) - f.Y(f.top)) + "\" fill=\"" +
           (right ? "#d97706" : "#2563eb") + "\" opacity=\"0.18\"/>\n";
    // Stagger labels below the axis so neighbours stay legible.
    const double ly = f.Y(0) + 14.0 + 11.0 * ((b.index - 1) % 2);
    out += "<text class=\"branch-label\" x=\"" +
           fmt(edge + (right ? 3.0 : -3.0)) + "\" y=\"" + fmt(ly) +
           "\" text-anchor=\"" + (right ? "start" : "end") +
           "\" fill=\"#111827\">C" + subscript(b.index) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

void render_domain_svg(const FordDomain& domain, const std::string& path) {
  write_file_atomic(path, domain_svg_text(domain));
}

void render_branch_svg(const BranchSystem& sys, const AuxiliaryGroup& aux,
                       const std::string& path) {
  write_file_atomic(path, branch_svg_text(sys, aux));
}

}  // namespace zb
