#include "zb/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>

#include "json.hpp"
#include "zb/svg.hpp"
#include "zb/transfer.hpp"
#include "zb/zeta.hpp"

namespace zb {

using nlohmann::ordered_json;

namespace {

const char* kStageNames[] = {"ford", "aux", "branches", "verify", "zeta",
                             "scan"};

int stage_rank(Stage s) { return static_cast<int>(s); }

std::string g17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json check_json(const CheckResult& c) {
  return ordered_json{{"passed", c.passed},
                      {"max_violation", c.max_violation},
                      {"checked", c.checked},
                      {"failures", c.failures},
                      {"notes", c.notes}};
}

ordered_json report_json_obj(const Report& r) {
  ordered_json out = ordered_json::object();
  for (const auto& [name, cr] : r.checks) out[name] = check_json(cr);
  return out;
}

ordered_json complex_json(std::complex<double> z) {
  return ordered_json::array({z.real(), z.imag()});
}

ordered_json matrix_json(const Moebius& g) {
  return ordered_json::array({g.a, g.b, g.c, g.d});
}

// Mutable state threaded through the stage chain.
struct Run {
  const GroupSpec& spec;
  const PipelineOptions& opt;
  GroupPresentation pres;  // cutoff-adjusted copy
  ordered_json stages = ordered_json::object();
  Report master;
  std::vector<std::string> artifacts;

  std::optional<WordBall> base_ball;
  std::optional<RelevantSet> rel;
  std::optional<FordDomain> domain;
  std::optional<AuxiliaryGroup> aux;
  std::optional<WordBall> wball;
  std::optional<BranchSystem> sys;
  std::optional<BranchSystem> pruned;

  Run(const GroupSpec& s, const PipelineOptions& o) : spec(s), opt(o) {
    pres = spec.presentation;
    if (opt.cutoff > 0) pres.word_cutoff = opt.cutoff;
  }

  void add(const std::string& stage, const Report& rep) {
    stages[stage]["checks"] = report_json_obj(rep);
    master.merge(rep, stage + ".");
  }

  void emit(const std::string& name, const std::string& content) {
    const std::string path =
        (std::filesystem::path(opt.out_dir) / name).string();
    write_file_atomic(path, content);
    artifacts.push_back(path);
  }
};

void stage_ford(Run& r) {
  r.base_ball = enumerate_ball(r.pres, r.pres.word_cutoff);
  r.rel = relevant_set(r.pres, *r.base_ball);
  r.domain = upper_envelope(r.rel->spheres, r.pres.epsilon);

  Report rep;
  CheckResult& stable = rep.check("relevant_set_stable");
  stable.observe(r.rel->stable ? 0.0 : 1.0, 0.5,
                 r.rel->stable ? "" : "relevant set changed at cutoff - 1");
  rep.merge(check_condition_A(*r.domain));
  rep.merge(check_side_pairing(*r.domain));

  const auto cycles = vertex_cycles(*r.domain);
  CheckResult& heights = rep.check("vertex_cycle_heights");
  CheckResult& angles = rep.check("vertex_cycle_angle_sums");
  ordered_json jcycles = ordered_json::array();
  for (const VertexCycle& c : cycles) {
    heights.observe(c.height_discrepancy, 1e-9);
    const double err =
        c.omega > 0 ? std::abs(c.angle_sum - 2.0 * std::numbers::pi / c.omega)
                    : 1.0;
    angles.observe(err, 1e-6,
                   c.omega > 0 ? "" : "angle sum is not a divisor of 2*pi");
    jcycles.push_back(ordered_json{{"length", c.vertices.size()},
                                   {"angle_sum", c.angle_sum},
                                   {"omega", c.omega},
                                   {"height_discrepancy",
                                    c.height_discrepancy}});
  }
  rep.merge(spotcheck_fundamental(*r.domain, r.pres, *r.base_ball, 200));

  ordered_json sides = ordered_json::array();
  for (const EnvelopeSide& s : r.domain->sides)
    sides.push_back(ordered_json{{"center", s.sphere.center},
                                 {"radius", s.sphere.radius},
                                 {"arc_left", ordered_json{s.left.x, s.left.y}},
                                 {"arc_right",
                                  ordered_json{s.right.x, s.right.y}}});
  r.stages["ford"] = ordered_json{{"ball_elements", r.base_ball->elements().size()},
                                  {"alpha", r.domain->alpha},
                                  {"beta", r.domain->beta},
                                  {"sides", std::move(sides)},
                                  {"vertex_cycles", std::move(jcycles)}};
  r.add("ford", rep);
  r.emit("domain.svg", domain_svg_text(*r.domain));
}

void stage_aux(Run& r) {
  r.aux = build_auxiliary(r.pres, r.pres.word_cutoff, r.spec.aux_walls);
  // The four extended-group checks are cutoff-stable; a radius-4 ball keeps
  // the stabilizer sweep affordable for three-generator extensions.
  const int n = std::min(r.pres.word_cutoff, 4);
  Report rep = verify_auxiliary(*r.aux, n, 200);

  ordered_json rel = ordered_json::array();
  for (const IsometricSphere& s : r.aux->relevant)
    rel.push_back(ordered_json{{"center", s.center}, {"radius", s.radius}});
  r.stages["aux"] = ordered_json{{"alpha", r.aux->alpha},
                                 {"beta", r.aux->beta},
                                 {"alpha_prime", r.aux->alpha_prime},
                                 {"beta_prime", r.aux->beta_prime},
                                 {"lambda", r.aux->lambda},
                                 {"translation", matrix_json(r.aux->t_lambda)},
                                 {"relevant_spheres", std::move(rel)},
                                 {"verified_cutoff", n}};
  r.add("aux", rep);
}

void stage_branches(Run& r) {
  r.wball = enumerate_ball(r.aux->presentation_W, r.pres.word_cutoff);
  BranchSystem sys =
      r.spec.branch_system
          ? instantiate_branch_system(*r.spec.branch_system,
                                      r.aux->presentation_W)
          : build_branch_system(*r.aux);
  if (sys.transitions.empty())
    sys = compute_transitions(sys, *r.wball, r.opt.grid);
  r.sys = std::move(sys);

  Report rep;
  CheckResult& found = rep.check("transitions_found");
  found.observe(r.sys->transitions.empty() ? 1.0 : 0.0, 0.5,
                r.sys->transitions.empty() ? "no transition was observed" : "");
  CheckResult& cover = rep.check("shooting_coverage");
  cover.checked = static_cast<long>(r.sys->coverage.size());
  if (r.sys->unresolved_count > 0)
    cover.note("unresolved samples: " + std::to_string(r.sys->unresolved_count));

  ordered_json coverage = ordered_json::object();
  for (const auto& [idx, frac] : r.sys->coverage)
    coverage[std::to_string(idx)] = frac;
  ordered_json branches = ordered_json::array();
  for (const Branch& b : r.sys->branches)
    branches.push_back(ordered_json{{"index", b.index},
                                    {"x", b.x},
                                    {"facing", facing_name(b.facing)}});
  ordered_json trans = ordered_json::object();
  for (const auto& [jk, gs] : r.sys->transitions) {
    char key[48];
    std::snprintf(key, sizeof key, "%d,%d", jk.first, jk.second);
    trans[key] = gs.size();
  }
  r.stages["branches"] =
      ordered_json{{"w_ball_elements", r.wball->elements().size()},
                   {"branches", std::move(branches)},
                   {"transition_cardinalities", std::move(trans)},
                   {"coverage", std::move(coverage)},
                   {"user_supplied", r.sys->user_supplied},
                   {"unresolved", r.sys->unresolved_count},
                   {"discarded", r.sys->discarded_count}};
  r.add("branches", rep);
  r.emit("branches.svg", branch_svg_text(*r.sys, *r.aux));
}

void stage_verify(Run& r) {
  const auto classes_w =
      primitive_hyperbolic_classes(r.aux->presentation_W, *r.wball, 8.0);
  Report rep = verify_branch_properties(*r.sys, *r.wball, classes_w, 16);

  const auto classes_base = primitive_hyperbolic_classes(
      r.pres, *r.base_ball, r.opt.class_length_cap);
  r.pruned = prune_to_active(*r.sys, classes_base);
  Report descent = check_group_descent(*r.pruned, r.pres, r.pres.word_cutoff);
  rep.merge(descent, "descent_");

  ordered_json active = ordered_json::array();
  for (const Branch& b : r.pruned->branches) active.push_back(b.index);
  r.stages["verify"] = ordered_json{
      {"section_classes", classes_w.size()},
      {"pruning_classes", classes_base.size()},
      {"active", std::move(active)},
      {"active_transition_keys", r.pruned->transitions.size()}};
  r.add("verify", rep);
}

void stage_zeta(Run& r) {
  const auto charts = build_charts(*r.pruned);
  const CheckResult expansion = check_contraction(*r.pruned, charts);
  const ZetaComparison cmp =
      compare_det_vs_zeta(*r.pruned, r.pres, r.opt.s_values, r.opt.order,
                          r.opt.class_length_cap, r.opt.zeta_depth);

  Report rep;
  CheckResult& finite = rep.check("values_finite");
  std::string csv =
      "re_s,im_s,det_re,det_im,zeta_re,zeta_im,rel_err,tail_bound\n";
  ordered_json rows = ordered_json::array();
  for (const ZetaComparisonRow& row : cmp.rows) {
    const bool good = std::isfinite(row.det.real()) &&
                      std::isfinite(row.det.imag()) &&
                      std::isfinite(row.zeta.real()) &&
                      std::isfinite(row.zeta.imag());
    finite.observe(good ? 0.0 : 1.0, 0.5,
                   good ? "" : "non-finite value at s = " + g17(row.s.real()));
    csv += g17(row.s.real()) + "," + g17(row.s.imag()) + "," +
           g17(row.det.real()) + "," + g17(row.det.imag()) + "," +
           g17(row.zeta.real()) + "," + g17(row.zeta.imag()) + "," +
           g17(row.rel_err) + "," + g17(row.tail_bound) + "\n";
    rows.push_back(ordered_json{{"s", complex_json(row.s)},
                                {"det", complex_json(row.det)},
                                {"zeta", complex_json(row.zeta)},
                                {"abs_err", row.abs_err},
                                {"rel_err", row.rel_err},
                                {"tail_bound", row.tail_bound}});
  }

  ordered_json jcharts = ordered_json::array();
  for (const ChartedInterval& c : charts)
    jcharts.push_back(
        ordered_json{{"branch", c.branch}, {"lo", c.lo}, {"hi", c.hi}});
  r.stages["zeta"] = ordered_json{
      {"order", cmp.order},
      {"depth", cmp.depth},
      {"class_length_cap", cmp.class_length_cap},
      {"classes_used", cmp.classes.size()},
      {"shell_classes", cmp.shell.size()},
      {"orientation_merged", cmp.orientation_merged},
      {"squaring_detected", cmp.squaring_detected},
      {"convention_note", cmp.note},
      {"charts", std::move(jcharts)},
      // One-step expansion of transition maps on their charts; identity
      // chains make this positive without affecting the determinant.
      {"max_chart_expansion", expansion.max_violation},
      {"rows", std::move(rows)}};
  r.add("zeta", rep);
  r.emit("zeta.csv", csv);
}

void stage_scan(Run& r) {
  const ResonanceScanResult scan =
      resonance_scan(*r.pruned, r.opt.scan_lo, r.opt.scan_hi, r.opt.scan_re,
                     r.opt.scan_im, r.opt.order);
  Report rep;
  CheckResult& complete = rep.check("lattice_complete");
  // Polishing adds evaluations on top of the lattice, so this is a floor.
  const long expected =
      static_cast<long>(r.opt.scan_re) * static_cast<long>(r.opt.scan_im);
  complete.observe(scan.grid_evaluations >= expected ? 0.0 : 1.0, 0.5,
                   "grid evaluations " + std::to_string(scan.grid_evaluations));

  ordered_json roots = ordered_json::array();
  for (const ResonanceCandidate& c : scan.roots)
    roots.push_back(ordered_json{{"s", complex_json(c.s)},
                                 {"residual", c.residual},
                                 {"iterations", c.iterations}});
  r.stages["scan"] = ordered_json{{"window_lo", complex_json(r.opt.scan_lo)},
                                  {"window_hi", complex_json(r.opt.scan_hi)},
                                  {"lattice", ordered_json{r.opt.scan_re,
                                                           r.opt.scan_im}},
                                  {"grid_evaluations", scan.grid_evaluations},
                                  {"roots", std::move(roots)},
                                  {"stalled", scan.failures.size()}};
  r.add("scan", rep);
}

}  // namespace

Stage stage_from_name(const std::string& name) {
  for (int i = 0; i < 6; ++i)
    if (name == kStageNames[i]) return static_cast<Stage>(i);
  throw ParseError("unknown stage '" + name +
                   "' (expected ford|aux|branches|verify|zeta|scan)");
}

std::string stage_name(Stage s) { return kStageNames[stage_rank(s)]; }

PipelineResult run_pipeline(const GroupSpec& spec, const PipelineOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  Run r(spec, opt);

  using StageFn = void (*)(Run&);
  static constexpr StageFn fns[] = {stage_ford,   stage_aux,  stage_branches,
                                    stage_verify, stage_zeta, stage_scan};
  for (int i = 0; i <= stage_rank(opt.stage); ++i) {
    try {
      fns[i](r);
    } catch (const Error& e) {
      throw Error(std::string(kStageNames[i]) + " stage: " + e.what());
    }
  }

  PipelineResult out;
  out.report = std::move(r.master);
  out.ok = out.report.all_passed(opt.waived);
  out.exit_code = out.ok ? 0 : 1;

  ordered_json j;
  ordered_json gens = ordered_json::array();
  for (const Generator& g : spec.presentation.generators)
    gens.push_back(
        ordered_json{{"label", g.label}, {"matrix", matrix_json(g.mat)}});
  j["spec"] = ordered_json{{"name", spec.presentation.name},
                           {"generators", std::move(gens)},
                           {"epsilon", spec.presentation.epsilon},
                           {"word_cutoff", r.pres.word_cutoff},
                           {"seed", spec.presentation.seed}};
  ordered_json svals = ordered_json::array();
  for (std::complex<double> s : opt.s_values) svals.push_back(complex_json(s));
  j["options"] = ordered_json{
      {"stage", stage_name(opt.stage)},
      {"order", opt.order},
      {"grid", opt.grid},
      {"s", std::move(svals)},
      {"class_length_cap", opt.class_length_cap},
      {"depth", opt.zeta_depth},
      {"waived", std::vector<std::string>(opt.waived.begin(), opt.waived.end())}};
  j["stages"] = std::move(r.stages);

  std::vector<std::string> failed;
  for (const auto& [name, cr] : out.report.checks)
    if (!cr.passed && !opt.waived.count(name)) failed.push_back(name);
  j["summary"] = ordered_json{{"passed", out.ok}, {"failed_checks", failed}};

  out.report_json = j.dump(2) + "\n";
  const std::string report_path =
      (std::filesystem::path(opt.out_dir) / "report.json").string();
  write_file_atomic(report_path, out.report_json);
  r.artifacts.push_back(report_path);
  out.artifacts = std::move(r.artifacts);
  return out;
}

}  // namespace zb
