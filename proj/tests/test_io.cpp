#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "zb/pipeline.hpp"
#include "zb/svg.hpp"

using namespace zb;
namespace fs = std::filesystem;

namespace {

const double kRt2 = std::sqrt(2.0);

fs::path tmp_dir() {
  const fs::path p = fs::temp_directory_path() / "zb_io_tests";
  fs::create_directories(p);
  return p;
}

std::string fixture(const char* name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

GroupSpec parse_text(const std::string& text) {
  return parse_group_spec_text(text, "inline");
}

long count_of(const std::string& text, const std::string& needle) {
  long n = 0;
  for (std::size_t at = text.find(needle); at != std::string::npos;
       at = text.find(needle, at + needle.size()))
    ++n;
  return n;
}

GroupPresentation hecke_free() {
  GroupPresentation p;
  p.name = "hecke-free-lambda2";
  p.generators = {{"h", Moebius::from_entries(3, 1, 1, 3)},
                  {"s", Moebius::from_entries(0, -1, 1, 0)}};
  p.word_cutoff = 6;
  return p;
}

GroupPresentation cyclic_l2() {
  GroupPresentation p;
  p.name = "cyclic-lambda2";
  p.generators = {{"h", Moebius::from_entries(3, 1, 1, 3)}};
  p.word_cutoff = 6;
  return p;
}

}  // namespace

TEST_CASE("group spec files load with determinant normalization") {
  const GroupSpec spec = parse_group_spec(fixture("hecke-free-lambda2.json"));
  CHECK(spec.presentation.name == "hecke-free-lambda2");
  REQUIRE(spec.presentation.generators.size() == 2);
  CHECK(spec.presentation.generators[0].label == "h");
  CHECK(spec.presentation.generators[1].label == "s");
  // [3,1,1,3] has determinant 8; loading scales it to the unit-determinant
  // representative, identical to the factory normalization.
  CHECK(spec.presentation.generators[0].mat.approx_equal(
      Moebius::from_entries(3, 1, 1, 3)));
  CHECK(spec.presentation.epsilon == doctest::Approx(1e-9));
  CHECK(spec.presentation.word_cutoff == 6);
  CHECK(spec.presentation.seed == 1);
  REQUIRE(spec.aux_walls.has_value());
  CHECK(spec.aux_walls->first ==
        doctest::Approx(-(3.0 + 3.0 * kRt2)).epsilon(1e-12));
  CHECK(spec.aux_walls->second ==
        doctest::Approx(3.0 + 3.0 * kRt2).epsilon(1e-12));
  CHECK_FALSE(spec.branch_system.has_value());

  // Optional fields fall back to presentation defaults.
  const GroupSpec bare = parse_text(
      R"({"name": "x", "generators": [{"label": "g", "matrix": [6, 2, 2, 6]}]})");
  CHECK(bare.presentation.generators[0].mat.approx_equal(
      Moebius::from_entries(3, 1, 1, 3)));
  CHECK(bare.presentation.word_cutoff == 8);
  CHECK(bare.presentation.seed == 1);
  CHECK_FALSE(bare.aux_walls.has_value());
}

TEST_CASE("group spec rejection paths") {
  CHECK_THROWS_AS(parse_text("{"), ParseError);
  CHECK_THROWS_AS(parse_text(R"({"generators": []})"), ParseError);
  CHECK_THROWS_AS(parse_text(R"({"name": "x", "generators": []})"), ParseError);
  CHECK_THROWS_AS(parse_text(R"({"name": "x"})"), ParseError);
  // Orientation-reversing and singular matrices cannot normalize.
  CHECK_THROWS_AS(
      parse_text(
          R"({"name": "x", "generators": [{"label": "g", "matrix": [0, 1, 1, 0]}]})"),
      BadDeterminant);
  CHECK_THROWS_AS(
      parse_text(
          R"({"name": "x", "generators": [{"label": "g", "matrix": [1, 1, 1, 1]}]})"),
      BadDeterminant);
  // [2,0,0,2] normalizes to the identity, which generates nothing.
  CHECK_THROWS_AS(
      parse_text(
          R"({"name": "x", "generators": [{"label": "g", "matrix": [2, 0, 0, 2]}]})"),
      ParseError);
  CHECK_THROWS_AS(
      parse_text(R"({"name": "x", "generators": [
        {"label": "g", "matrix": [3, 1, 1, 3]},
        {"label": "g", "matrix": [0, -1, 1, 0]}]})"),
      ParseError);
  CHECK_THROWS_AS(
      parse_text(
          R"({"name": "x", "generators": [{"label": "g", "matrix": [3, 1, 1]}]})"),
      ParseError);
  CHECK_THROWS_AS(
      parse_text(R"({"name": "x", "word_cutoff": 0,
                     "generators": [{"label": "g", "matrix": [3, 1, 1, 3]}]})"),
      ParseError);
  CHECK_THROWS_AS(
      parse_text(R"({"name": "x", "auxiliary": {"alpha_prime": 2.0, "beta_prime": -2.0},
                     "generators": [{"label": "g", "matrix": [3, 1, 1, 3]}]})"),
      ParseError);
  CHECK_THROWS_AS(parse_group_spec("/nonexistent/zb-spec.json"), IoError);
}

TEST_CASE("branch system files round trip through verification") {
  const GroupPresentation cyc = cyclic_l2();
  const AuxiliaryGroup aux = build_auxiliary(cyc, 6);
  const WordBall wball = enumerate_ball(aux.presentation_W, 6);
  const BranchSystem sys =
      compute_transitions(build_branch_system(aux), wball, 32);
  const auto classes_base =
      primitive_hyperbolic_classes(cyc, enumerate_ball(cyc, 6), 3.0);
  const BranchSystem pruned = prune_to_active(sys, classes_base);
  REQUIRE_FALSE(pruned.transitions.empty());

  const std::string path = (tmp_dir() / "cyclic-branches.json").string();
  save_branch_system(pruned, path);
  const BranchSystemSpec loaded = load_branch_system(path);
  CHECK(loaded.group_ref == aux.presentation_W.name);
  REQUIRE(loaded.branches.size() == pruned.branches.size());

  const BranchSystem copy =
      instantiate_branch_system(loaded, aux.presentation_W);
  CHECK(copy.user_supplied);
  REQUIRE(copy.branches.size() == pruned.branches.size());
  for (std::size_t i = 0; i < copy.branches.size(); ++i) {
    CHECK(copy.branches[i].x ==
          doctest::Approx(pruned.branches[i].x).epsilon(1e-12));
    CHECK(copy.branches[i].facing == pruned.branches[i].facing);
  }
  REQUIRE(copy.transitions.size() == pruned.transitions.size());
  // Saved keys are positional; walk both maps in branch order.
  auto it = copy.transitions.begin();
  long elements = 0;
  for (const auto& [jk, gs] : pruned.transitions) {
    REQUIRE(it->second.size() == gs.size());
    for (std::size_t i = 0; i < gs.size(); ++i)
      CHECK(it->second[i].approx_equal(gs[i], 1e-9));
    elements += static_cast<long>(gs.size());
    ++it;
  }
  CHECK(elements > 0);

  // The defining-property verdicts are insensitive to the renumbering.
  const auto classes_w =
      primitive_hyperbolic_classes(aux.presentation_W, wball, 8.0);
  const Report before = verify_branch_properties(pruned, wball, classes_w, 16);
  const Report after = verify_branch_properties(copy, wball, classes_w, 16);
  CHECK(before.summary() == after.summary());
  CHECK(before.all_passed());

  CHECK_THROWS_AS(instantiate_branch_system(loaded, cyc), ParseError);
  BranchSystemSpec broken = loaded;
  broken.group_ref.clear();
  broken.transitions[{97, 98}] = {Moebius::identity()};
  CHECK_THROWS_AS(instantiate_branch_system(broken, aux.presentation_W),
                  ParseError);
}

TEST_CASE("svg renderings carry the advertised structure") {
  const GroupPresentation hp = hecke_free();
  const WordBall ball = enumerate_ball(hp, 4);
  const FordDomain dom = upper_envelope(relevant_set(hp, ball).spheres);
  REQUIRE(dom.sides.size() == 3);

  const std::string svg = domain_svg_text(dom);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count_of(svg, "sphere-arc") == 3);
  CHECK(count_of(svg, "class=\"axis\"") == 1);
  CHECK(count_of(svg, "region-K") == 1);
  CHECK(svg == domain_svg_text(dom));

  const FordDomain empty;
  const std::string bare = domain_svg_text(empty);
  CHECK(count_of(bare, "sphere-arc") == 0);
  CHECK(count_of(bare, "region-K") == 0);
  CHECK(count_of(bare, "class=\"axis\"") == 1);

  const double wall = 3.0 + 3.0 * kRt2;
  const AuxiliaryGroup aux =
      build_auxiliary(hp, 4, std::make_pair(-wall, wall));
  const BranchSystem sys = build_branch_system(aux);
  REQUIRE(sys.branches.size() == 11);
  const std::string branches = branch_svg_text(sys, aux);
  CHECK(count_of(branches, "branch-base") == 7);
  CHECK(count_of(branches, "facing-stripe") == 11);
  CHECK(count_of(branches, "branch-label") == 11);
  CHECK(count_of(branches, "strip-wall") == 2);
  CHECK(branches.find("C₁<") != std::string::npos);
  CHECK(branches.find("C₁₁<") != std::string::npos);
  CHECK(branches == branch_svg_text(sys, aux));

  const std::string out = (tmp_dir() / "domain.svg").string();
  render_domain_svg(dom, out);
  CHECK(fs::file_size(out) > 1000);
}

TEST_CASE("pipeline emits deterministic artifacts and status") {
  const GroupSpec spec = parse_group_spec(fixture("cyclic-lambda2.json"));
  PipelineOptions opt;
  opt.stage = Stage::Zeta;
  opt.out_dir = (tmp_dir() / "runA").string();
  const PipelineResult r1 = run_pipeline(spec, opt);
  CHECK(r1.ok);
  CHECK(r1.exit_code == 0);
  CHECK(r1.report.all_passed());
  for (const char* name : {"report.json", "domain.svg", "branches.svg",
                           "zeta.csv"})
    CHECK(fs::exists(fs::path(opt.out_dir) / name));

  std::ifstream csv(fs::path(opt.out_dir) / "zeta.csv");
  std::string header, row, extra;
  REQUIRE(std::getline(csv, header));
  CHECK(header ==
        "re_s,im_s,det_re,det_im,zeta_re,zeta_im,rel_err,tail_bound");
  REQUIRE(std::getline(csv, row));
  CHECK_FALSE(std::getline(csv, extra));
  double re_s, im_s, det_re, det_im, zeta_re, zeta_im, rel, tail;
  REQUIRE(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &re_s,
                      &im_s, &det_re, &det_im, &zeta_re, &zeta_im, &rel,
                      &tail) == 8);
  CHECK(re_s == 2.0);
  CHECK(det_re == doctest::Approx(zeta_re).epsilon(1e-4));
  CHECK(rel < 1e-3);
  CHECK(tail >= 0.0);

  opt.out_dir = (tmp_dir() / "runB").string();
  const PipelineResult r2 = run_pipeline(spec, opt);
  CHECK(r1.report_json == r2.report_json);

  // Waiving an unrelated check leaves a passing run passing.
  opt.waived = {"zeta.values_finite"};
  opt.out_dir = (tmp_dir() / "runC").string();
  CHECK(run_pipeline(spec, opt).ok);
}

TEST_CASE("pipeline runs the full stage chain on request") {
  const GroupSpec spec = parse_group_spec(fixture("cyclic-lambda2.json"));
  PipelineOptions opt;
  opt.stage = Stage::Scan;
  opt.scan_re = 5;
  opt.scan_im = 3;
  opt.order = 10;
  opt.out_dir = (tmp_dir() / "runScan").string();
  const PipelineResult res = run_pipeline(spec, opt);
  CHECK(res.ok);
  for (const char* check : {"ford.summit_in_arc_interior", "aux.stabilizer_of_infinity",
                            "branches.transitions_found", "verify.b5_product_structure",
                            "zeta.values_finite", "scan.lattice_complete"})
    CHECK(res.report.checks.count(check) == 1);
  CHECK(res.report_json.find("\"grid_evaluations\"") != std::string::npos);
}

TEST_CASE("command line entry point") {
  const std::string out = (tmp_dir() / "cli").string();
  const std::string good = std::string(ZB_BIN) + " run " +
                           fixture("cyclic-lambda2.json") +
                           " --stage ford --out " + out + " >/dev/null 2>&1";
  const int rc_good = std::system(good.c_str());
  REQUIRE(rc_good != -1);
  CHECK(WEXITSTATUS(rc_good) == 0);
  CHECK(fs::exists(fs::path(out) / "domain.svg"));
  CHECK(fs::exists(fs::path(out) / "report.json"));

  const int rc_bad = std::system(
      (std::string(ZB_BIN) + " run /nonexistent/spec.json >/dev/null 2>&1")
          .c_str());
  REQUIRE(rc_bad != -1);
  CHECK(WEXITSTATUS(rc_bad) == 2);

  const int rc_stage = std::system((std::string(ZB_BIN) + " run " +
                                    fixture("cyclic-lambda2.json") +
                                    " --stage bogus >/dev/null 2>&1")
                                       .c_str());
  REQUIRE(rc_stage != -1);
  CHECK(WEXITSTATUS(rc_stage) == 2);
}
