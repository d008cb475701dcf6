#include "zb/spec_io.hpp"

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace zb {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& origin, const std::string& what) {
  throw ParseError(origin + ": " + what);
}

const ordered_json& require(const ordered_json& j, const char* key,
                            const std::string& origin) {
  auto it = j.find(key);
  if (it == j.end()) bad(origin, std::string("missing field '") + key + "'");
  return *it;
}

double number(const ordered_json& j, const std::string& origin,
              const std::string& what) {
  if (!j.is_number()) bad(origin, what + " must be a number");
  return j.get<double>();
}

std::string entries_str(const std::array<double, 4>& m) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "[%g, %g, %g, %g]", m[0], m[1], m[2], m[3]);
  return buf;
}

std::array<double, 4> matrix_entries(const ordered_json& j,
                                     const std::string& origin,
                                     const std::string& what) {
  if (!j.is_array() || j.size() != 4)
    bad(origin, what + " must be an array of four reals");
  std::array<double, 4> m{};
  for (int i = 0; i < 4; ++i) m[i] = number(j[i], origin, what + " entry");
  return m;
}

// Determinant-one normalization with entry context: a non-positive
// determinant is orientation-reversing or singular and cannot name a group
// element; a positive one is scaled away.
Moebius load_matrix(const std::array<double, 4>& m, double eps,
                    const std::string& origin, const std::string& what) {
  const double det = m[0] * m[3] - m[1] * m[2];
  if (!(det > eps))
    throw BadDeterminant(origin + ": " + what + " " + entries_str(m) +
                         " has determinant " + std::to_string(det));
  return Moebius::from_entries(m[0], m[1], m[2], m[3], eps);
}

Facing facing_from_string(const std::string& s, const std::string& origin) {
  if (s == "right") return Facing::Right;
  if (s == "left") return Facing::Left;
  bad(origin, "facing must be \"left\" or \"right\", got \"" + s + "\"");
}

BranchSystemSpec parse_branch_system_json(const ordered_json& j,
                                          const std::string& origin) {
  if (!j.is_object()) bad(origin, "branch system must be an object");
  BranchSystemSpec out;
  const ordered_json& branches = require(j, "branches", origin);
  if (!branches.is_array() || branches.empty())
    bad(origin, "'branches' must be a non-empty array");
  for (const auto& b : branches) {
    if (!b.is_object()) bad(origin, "branch entries must be objects");
    BranchSpec bs;
    bs.x = number(require(b, "x", origin), origin, "branch 'x'");
    const ordered_json& f = require(b, "facing", origin);
    if (!f.is_string()) bad(origin, "branch 'facing' must be a string");
    bs.facing = facing_from_string(f.get<std::string>(), origin);
    out.branches.push_back(bs);
  }
  if (auto it = j.find("transitions"); it != j.end()) {
    if (!it->is_object()) bad(origin, "'transitions' must be an object");
    for (const auto& [key, val] : it->items()) {
      int jj = 0, kk = 0;
      char tail = 0;
      if (std::sscanf(key.c_str(), "%d,%d%c", &jj, &kk, &tail) != 2)
        bad(origin, "transition key '" + key + "' is not \"j,k\"");
      if (!val.is_array())
        bad(origin, "transitions['" + key + "'] must be an array of matrices");
      std::vector<Moebius>& gs = out.transitions[{jj, kk}];
      for (const auto& m : val)
        gs.push_back(load_matrix(matrix_entries(m, origin, "transition matrix"),
                                 kEps, origin, "transition element"));
    }
  }
  if (auto it = j.find("group_ref"); it != j.end()) {
    if (!it->is_string()) bad(origin, "'group_ref' must be a string");
    out.group_ref = it->get<std::string>();
  }
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path + ": " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path);
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp + ": " + std::strerror(errno));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed on " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot move " + tmp + " into place: " + std::strerror(errno));
}

GroupSpec parse_group_spec_text(const std::string& text,
                                const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    bad(origin, e.what());
  }
  if (!j.is_object()) bad(origin, "top level must be an object");

  GroupSpec spec;
  GroupPresentation& pres = spec.presentation;
  const ordered_json& name = require(j, "name", origin);
  if (!name.is_string()) bad(origin, "'name' must be a string");
  pres.name = name.get<std::string>();

  if (auto it = j.find("epsilon"); it != j.end()) {
    pres.epsilon = number(*it, origin, "'epsilon'");
    if (!(pres.epsilon > 0.0)) bad(origin, "'epsilon' must be positive");
  }
  if (auto it = j.find("word_cutoff"); it != j.end()) {
    if (!it->is_number_integer()) bad(origin, "'word_cutoff' must be an integer");
    pres.word_cutoff = it->get<int>();
    if (pres.word_cutoff < 1) bad(origin, "'word_cutoff' must be at least 1");
  }
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) bad(origin, "'seed' must be a non-negative integer");
    pres.seed = it->get<std::uint64_t>();
  }

  const ordered_json& gens = require(j, "generators", origin);
  if (!gens.is_array() || gens.empty())
    bad(origin, "'generators' must be a non-empty array");
  for (const auto& g : gens) {
    if (!g.is_object()) bad(origin, "generator entries must be objects");
    Generator gen;
    const ordered_json& label = require(g, "label", origin);
    if (!label.is_string() || label.get<std::string>().empty())
      bad(origin, "generator 'label' must be a non-empty string");
    gen.label = label.get<std::string>();
    for (const auto& other : pres.generators)
      if (other.label == gen.label)
        bad(origin, "duplicate generator label '" + gen.label + "'");
    gen.mat = load_matrix(
        matrix_entries(require(g, "matrix", origin), origin, "generator matrix"),
        pres.epsilon, origin, "generator '" + gen.label + "'");
    if (gen.mat.is_identity(pres.epsilon))
      bad(origin, "generator '" + gen.label + "' is the identity");
    pres.generators.push_back(gen);
  }

  if (auto it = j.find("auxiliary"); it != j.end()) {
    if (!it->is_object()) bad(origin, "'auxiliary' must be an object");
    const double ap =
        number(require(*it, "alpha_prime", origin), origin, "'alpha_prime'");
    const double bp =
        number(require(*it, "beta_prime", origin), origin, "'beta_prime'");
    if (!(ap < bp)) bad(origin, "'alpha_prime' must be below 'beta_prime'");
    spec.aux_walls = std::make_pair(ap, bp);
  }

  if (auto it = j.find("branch_system"); it != j.end())
    spec.branch_system = parse_branch_system_json(*it, origin);
  return spec;
}

GroupSpec parse_group_spec(const std::string& path) {
  return parse_group_spec_text(read_file(path), path);
}

std::string branch_system_text(const BranchSystem& sys) {
  ordered_json j;
  j["branches"] = ordered_json::array();
  // The file format is positional, so transition keys are remapped from the
  // in-memory indices (non-contiguous after pruning) to 1-based file order.
  std::map<int, int> pos;
  for (const Branch& b : sys.branches) {
    pos[b.index] = static_cast<int>(j["branches"].size()) + 1;
    j["branches"].push_back(
        {{"x", b.x}, {"facing", facing_name(b.facing)}});
  }
  std::map<std::pair<int, int>, const std::vector<Moebius>*> remapped;
  for (const auto& [jk, gs] : sys.transitions)
    remapped[{pos.at(jk.first), pos.at(jk.second)}] = &gs;
  ordered_json trans = ordered_json::object();
  for (const auto& [jk, gs] : remapped) {
    char key[48];
    std::snprintf(key, sizeof key, "%d,%d", jk.first, jk.second);
    ordered_json list = ordered_json::array();
    for (const Moebius& g : *gs)
      list.push_back(ordered_json::array({g.a, g.b, g.c, g.d}));
    trans[key] = std::move(list);
  }
  j["transitions"] = std::move(trans);
  j["group_ref"] = sys.group.name;
  return j.dump(2) + "\n";
}

void save_branch_system(const BranchSystem& sys, const std::string& path) {
  write_file_atomic(path, branch_system_text(sys));
}

BranchSystemSpec parse_branch_system_text(const std::string& text,
                                          const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    bad(origin, e.what());
  }
  return parse_branch_system_json(j, origin);
}

BranchSystemSpec load_branch_system(const std::string& path) {
  return parse_branch_system_text(read_file(path), path);
}

BranchSystem instantiate_branch_system(const BranchSystemSpec& spec,
                                       const GroupPresentation& group) {
  if (!spec.group_ref.empty() && spec.group_ref != group.name)
    throw ParseError("branch system references group '" + spec.group_ref +
                     "', not '" + group.name + "'");
  BranchSystem sys;
  sys.group = group;
  sys.user_supplied = true;
  // File order is index order: branch j of the file is branch j of the
  // published numbering, and transition keys refer to those indices.
  int index = 0;
  for (const BranchSpec& b : spec.branches)
    sys.branches.push_back(make_branch(++index, b.x, b.facing));
  for (const auto& [jk, gs] : spec.transitions) {
    if (!sys.find(jk.first) || !sys.find(jk.second))
      throw ParseError("transition key references missing branch index " +
                       std::to_string(sys.find(jk.first) ? jk.second
                                                         : jk.first));
    sys.transitions[jk] = gs;
  }
  return sys;
}

}  // namespace zb
