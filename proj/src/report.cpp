#include "zb/report.hpp"

#include <algorithm>
#include <cstdio>

namespace zb {

namespace {
constexpr std::size_t kMaxNotes = 12;
}

void CheckResult::fail(double violation, const std::string& witness) {
  passed = false;
  ++failures;
  max_violation = std::max(max_violation, violation);
  if (!witness.empty() && notes.size() < kMaxNotes) notes.push_back(witness);
}

void CheckResult::observe(double violation, double tol,
                          const std::string& witness) {
  ++checked;
  max_violation = std::max(max_violation, violation);
  if (violation >= tol) {
    passed = false;
    ++failures;
    if (!witness.empty() && notes.size() < kMaxNotes) notes.push_back(witness);
  }
}

void CheckResult::note(const std::string& s) {
  if (notes.size() < kMaxNotes) notes.push_back(s);
}

bool Report::all_passed(const std::set<std::string>& waived) const {
  for (const auto& [name, res] : checks) {
    if (!res.passed && !waived.count(name)) return false;
  }
  return true;
}

std::string Report::summary() const {
  std::string out;
  for (const auto& [name, res] : checks) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-32s %s  max_violation=%.3e  checked=%ld\n",
                  name.c_str(), res.passed ? "PASS" : "FAIL", res.max_violation,
                  res.checked);
    out += buf;
  }
  return out;
}

void Report::merge(const Report& other, const std::string& prefix) {
  for (const auto& [name, res] : other.checks) checks[prefix + name] = res;
}

}  // namespace zb
