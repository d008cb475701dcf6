#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace zb {

// Outcome of one named verification check.  Violations are data, not
// exceptions: a failed check is recorded and the caller decides whether it is
// fatal (possibly after waivers).
struct CheckResult {
  bool passed = true;
  double max_violation = 0.0;
  long checked = 0;
  long failures = 0;
  std::vector<std::string> notes;  // witnesses / diagnostics, bounded

  void fail(double violation, const std::string& witness = {});
  void observe(double violation, double tol, const std::string& witness = {});
  void note(const std::string& s);
};

struct Report {
  std::string title;
  std::map<std::string, CheckResult> checks;  // ordered, deterministic

  CheckResult& check(const std::string& name) { return checks[name]; }
  bool all_passed(const std::set<std::string>& waived = {}) const;
  // One "name: PASS/FAIL (max violation ...)" line per check.
  std::string summary() const;
  void merge(const Report& other, const std::string& prefix = {});
};

}  // namespace zb
