#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zb/pipeline.hpp"

namespace {

std::complex<double> parse_s(const std::string& text) {
  std::size_t pos = 0;
  const double re = std::stod(text, &pos);
  if (pos == text.size()) return {re, 0.0};
  if (text[pos] != ',') throw zb::ParseError("bad --s value '" + text + "'");
  std::size_t pos2 = 0;
  const std::string rest = text.substr(pos + 1);
  const double im = std::stod(rest, &pos2);
  if (pos2 != rest.size()) throw zb::ParseError("bad --s value '" + text + "'");
  return {re, im};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Ford domains, geodesic-flow cross sections, and transfer-operator "
      "zeta comparisons for matrix-presented Fuchsian groups"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand(
      "run", "Run pipeline stages on a group spec and emit artifacts");
  std::string spec_path;
  run->add_option("spec", spec_path, "group spec JSON file")->required();
  std::string stage = "zeta";
  run->add_option("--stage", stage,
                  "last stage to run: ford|aux|branches|verify|zeta|scan")
      ->capture_default_str();
  std::vector<std::string> s_values;
  run->add_option("--s", s_values,
                  "evaluation point RE or RE,IM (repeatable; default 2.0)");
  int order = 16;
  run->add_option("--order", order, "collocation order")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  int cutoff = 0;
  run->add_option("--cutoff", cutoff,
                  "word-ball radius override (default: from the spec)")
      ->check(CLI::PositiveNumber);
  int grid = 32;
  run->add_option("--grid", grid, "shooting samples per interval side")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  std::string out_dir = ".";
  run->add_option("--out", out_dir, "artifact directory")
      ->capture_default_str();
  std::vector<std::string> waive;
  run->add_option("--waive", waive, "check names to waive (comma separated)")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    zb::GroupSpec spec = zb::parse_group_spec(spec_path);
    zb::PipelineOptions opt;
    opt.stage = zb::stage_from_name(stage);
    if (!s_values.empty()) {
      opt.s_values.clear();
      for (const std::string& s : s_values) opt.s_values.push_back(parse_s(s));
    }
    opt.order = order;
    opt.cutoff = cutoff;
    opt.grid = grid;
    opt.out_dir = out_dir;
    opt.waived.insert(waive.begin(), waive.end());

    const zb::PipelineResult res = zb::run_pipeline(spec, opt);
    std::fputs(res.report.summary().c_str(), stdout);
    for (const std::string& path : res.artifacts)
      std::printf("wrote %s\n", path.c_str());
    std::printf("%s\n", res.ok ? "all checks passed" : "CHECKS FAILED");
    return res.exit_code;
  } catch (const zb::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
