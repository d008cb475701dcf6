#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zb/branch.hpp"

namespace zb {

struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(m) {}
};

// Declarative branch system as stored on disk: base points with facings plus
// an optional transition map.  Branch indices are positional (1-based file
// order); matrices are row-major [a, b, c, d] and tolerance-normalized on
// load.
struct BranchSpec {
  double x = 0.0;
  Facing facing = Facing::Right;
};

struct BranchSystemSpec {
  std::vector<BranchSpec> branches;
  std::map<std::pair<int, int>, std::vector<Moebius>> transitions;
  std::string group_ref;
};

// Parsed group-spec document: the validated presentation plus optional
// construction overrides carried alongside it.
struct GroupSpec {
  GroupPresentation presentation;
  // Strip wall override (alpha', beta') for the extended-group construction.
  std::optional<std::pair<double, double>> aux_walls;
  // Inline user-supplied branch system; bypasses heuristic construction.
  std::optional<BranchSystemSpec> branch_system;
};

// Reads and validates a group-spec JSON document:
//   {"name": ..., "generators": [{"label": ..., "matrix": [a,b,c,d]}, ...],
//    "epsilon": ..., "word_cutoff": ..., "seed": ...,
//    "auxiliary": {"alpha_prime": ..., "beta_prime": ...},
//    "branch_system": {...}}
// Generator matrices are renormalized to determinant one (scaling by the
// inverse square root of a positive determinant); a non-positive determinant
// raises BadDeterminant with the offending entries, and a generator that
// renormalizes to the identity is rejected.  Labels must be unique and
// non-empty.  Throws IoError when the file cannot be read and ParseError on
// malformed or missing content.
GroupSpec parse_group_spec(const std::string& path);
GroupSpec parse_group_spec_text(const std::string& text,
                                const std::string& origin);

// Branch-system file round trip (same JSON shape as the inline
// `branch_system` object).  Saving records the carrying group's name as
// `group_ref`; loading is epsilon-tolerant on matrix entries.
std::string branch_system_text(const BranchSystem& sys);
void save_branch_system(const BranchSystem& sys, const std::string& path);
BranchSystemSpec parse_branch_system_text(const std::string& text,
                                          const std::string& origin);
BranchSystemSpec load_branch_system(const std::string& path);

// Materializes a stored system over its carrying group (the strip-extended
// presentation).  Throws ParseError when `group_ref` names a different group
// or a transition key references a missing branch index.
BranchSystem instantiate_branch_system(const BranchSystemSpec& spec,
                                       const GroupPresentation& group);

// Whole-file IO used for every artifact: content is written to a sibling
// temporary and renamed into place so readers never observe partial output.
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace zb
