#pragma once

#include <complex>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "zb/report.hpp"
#include "zb/spec_io.hpp"

namespace zb {

// Pipeline stages in dependency order.  Requesting a stage runs every earlier
// one first, so `Scan` is a full run.
enum class Stage { Ford, Aux, Branches, Verify, Zeta, Scan };

Stage stage_from_name(const std::string& name);  // throws ParseError
std::string stage_name(Stage s);

struct PipelineOptions {
  Stage stage = Stage::Zeta;
  std::vector<std::complex<double>> s_values = {{2.0, 0.0}};
  int order = 16;           // collocation order for determinant evaluations
  int cutoff = 0;           // word-ball radius; 0 = presentation's own
  int grid = 32;            // transition-shooting samples per interval side
  std::string out_dir = ".";
  std::set<std::string> waived;  // fully qualified check names, e.g. "verify.b2..."

  double class_length_cap = 6.0;  // L_max for the zeta comparison
  int zeta_depth = 40;            // K in the k-product

  // Resonance-scan rectangle and lattice.
  std::complex<double> scan_lo{-0.5, -1.0};
  std::complex<double> scan_hi{2.5, 1.0};
  int scan_re = 13, scan_im = 9;
};

struct PipelineResult {
  Report report;            // every named check, prefixed by stage
  std::string report_json;  // exact bytes written to report.json
  std::vector<std::string> artifacts;  // paths written, in emission order
  bool ok = false;          // all checks passed or waived
  int exit_code = 1;
};

// Runs the requested stage chain on a parsed spec, writing artifacts into
// opt.out_dir: report.json always, domain.svg from the ford stage, branches.svg
// from the branches stage, zeta.csv from the zeta stage.  Artifact writes are
// atomic, and report bytes depend only on the spec and options.  Module errors
// are rethrown with the failing stage named.
PipelineResult run_pipeline(const GroupSpec& spec, const PipelineOptions& opt);

}  // namespace zb
