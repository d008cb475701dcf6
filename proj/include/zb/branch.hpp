#pragma once

#include <map>
#include <optional>
#include <utility>

#include "zb/auxiliary.hpp"

namespace zb {

struct EmptyActiveSet : Error {
  explicit EmptyActiveSet(const std::string& m) : Error(m) {}
};

enum class Facing { Left, Right };

std::string facing_name(Facing f);

// Branch of the cross section: unit tangent vectors based on the vertical
// geodesic (x, infinity) and pointing into the facing half-plane.  I is the
// boundary arc of the facing half-plane (the forward-endpoint set), J the arc
// of the opposite one (the backward-endpoint set).
struct Branch {
  int index = 0;  // published 1-based index
  double x = 0.0;
  Facing facing = Facing::Right;
  BoundaryInterval I, J;
};

Branch make_branch(int index, double x, Facing facing);

struct BranchSystem {
  GroupPresentation group;  // extended (strip) group carrying the transitions
  std::vector<Branch> branches;
  // (j, k) -> transition elements g with g.I_k inside I_j; first returns from
  // branch j land on the g-translate of branch k.
  std::map<std::pair<int, int>, std::vector<Moebius>> transitions;
  bool user_supplied = false;

  // Diagnostics from compute_transitions.
  std::map<int, double> coverage;  // fraction of shot samples resolved
  long unresolved_count = 0;
  long discarded_count = 0;  // ambiguous shots dropped after jitter retries
  std::vector<std::string> unresolved_notes;

  const Branch* find(int index) const;
};

struct CandidatePoint {
  double x = 0.0;
  bool faces_right = false;
  bool faces_left = false;
};

// Base-point candidates: strip walls and real envelope-arc endpoints carry
// both facings, sphere centers face right; all values normalized into the
// strip by wall translations and deduplicated.
std::vector<CandidatePoint> candidate_base_points(const AuxiliaryGroup& aux);

// Branch list from the candidates.  Right-facing branches get indices
// 1..m in ascending x, left-facing ones m+1..M in descending x.
BranchSystem build_branch_system(const AuxiliaryGroup& aux);

// Finite boundary points known to lie in the limit set of the ball's group:
// fixed points of hyperbolic elements, and the orbit of infinity when a
// parabolic fixes it (those orbit points are not hit by recurrent geodesics
// and are kept separate).
struct LimitPointSample {
  std::vector<double> hyperbolic;       // sorted, deduplicated
  std::vector<double> parabolic_orbit;  // sorted, deduplicated
  bool infinity_is_limit = false;
};

LimitPointSample enumerate_limit_points(const GroupPresentation& pres,
                                        const WordBall& ball);

struct FirstReturn {
  double t_plus = 0.0;  // flow time from the base crossing, > 0
  Moebius g_plus;
  int k_plus = 0;  // branch index
};

// Deduplicated translate lines g.base(C_k) over a ball, with an interval
// stabbing tree for crossing queries.  Shared by the shooting and the
// verification passes.
class TranslateIndex {
 public:
  TranslateIndex(const BranchSystem& sys, const WordBall& ball);

  // First crossing of the geodesic (y -> x) with a facing-matched translate
  // strictly after its crossing of branch j's base line.  nullopt when no
  // matched crossing exists in the index (cutoff too small or the geodesic
  // escapes); *ambiguous is set when two matched crossings tie and the sample
  // carries no reliable transition.
  std::optional<FirstReturn> first_return(int j, double x, double y,
                                          bool* ambiguous = nullptr) const;

  // All crossings of the oriented geodesic with facing-matched translates at
  // parameters in (t_lo, t_hi); used by the segment checks.
  struct Crossing {
    double t;
    int k;
    int owner_ball_index;
  };
  std::vector<Crossing> crossings_between(const Geodesic& gamma, double t_lo,
                                          double t_hi) const;

  // Any facing-matched translate crossed by the oriented geodesic.
  bool hits_branch_union(const Geodesic& gamma) const;

  struct Line {
    double u, w;  // x-extent; w is +infinity for vertical lines
    Geodesic geo;
    struct Owner {
      int k;
      int ball_index;
      BoundaryInterval arc;  // image of I_k, counterclockwise
    };
    std::vector<Owner> owners;  // priority order: shortest word first
  };
  const std::vector<Line>& lines() const { return lines_; }

 private:
  void stab(double p, std::vector<int>& out) const;

  const BranchSystem& sys_;
  const WordBall& ball_;
  std::vector<Line> lines_;
  std::vector<int> base_line_;  // branch vector position -> line id
  // Centered interval tree over lines_.
  struct Node {
    double center;
    std::vector<int> by_u;  // lines containing center, ascending u
    std::vector<int> by_w;  // same lines, descending w
    int left = -1, right = -1;
  };
  std::vector<Node> nodes_;
  int root_ = -1;
  int build(std::vector<int>& idx);
};

// Shoots a deterministic sample family per branch (nested subsamples of the
// enumerated hyperbolic limit points in I_j and J_j, `grid` per side) and
// returns the system with the observed transition map and coverage
// statistics.  Samples with no matched crossing are counted as unresolved;
// ambiguous ties are re-shot with a deterministic jitter and then dropped.
BranchSystem compute_transitions(const BranchSystem& sys, const WordBall& ball,
                                 int grid);

// One named check per defining property of a branch family, all quantified
// at the ball cutoff; failures carry witnesses and are never thrown.
Report verify_branch_properties(const BranchSystem& sys, const WordBall& ball,
                                const std::vector<ConjClass>& classes,
                                int samples);

// Keeps exactly the branches crossed by an enumerated class axis (either
// orientation), restricting transitions to the kept indices.
BranchSystem prune_to_active(const BranchSystem& sys,
                             const std::vector<ConjClass>& classes);

// Descent to the base group: transition elements must be base-group members
// (semi-decided over the N-ball; unknowns are warnings), and two translates
// of active forward arcs must cover every enumerated base limit point.
Report check_group_descent(const BranchSystem& pruned,
                           const GroupPresentation& base, int N);

}  // namespace zb
