#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zb/moebius.hpp"

namespace zb {

struct BallTooLarge : Error {
  explicit BallTooLarge(const std::string& m) : Error(m) {}
};
struct EmptyInput : Error {
  explicit EmptyInput(const std::string& m) : Error(m) {}
};

struct Generator {
  std::string label;
  Moebius mat;
};

struct GroupPresentation {
  std::string name;
  std::vector<Generator> generators;
  double epsilon = kEps;
  int word_cutoff = 8;
  std::uint64_t seed = 1;
};

// Group word over the presentation's alphabet: tokens +(i+1) for generator i,
// -(i+1) for its inverse, applied left to right.
using Word = std::vector<int>;

std::string word_str(const GroupPresentation& pres, const Word& w);
Moebius word_matrix(const GroupPresentation& pres, const Word& w);

Word free_reduce(const Word& w);
// Strips conjugating prefix/suffix pairs; result is cyclically reduced.
Word cyclic_reduce(const Word& w);
bool rotation_equal(const Word& w1, const Word& w2);
// True iff w is v^k for some proper subword v and k >= 2.
bool word_is_power(const Word& w);

struct BallElement {
  Moebius mat;
  Word word;  // shortest word found (ties broken lexicographically)
};

// All distinct group elements reachable by words of length <= cutoff, with
// elements deduplicated at the presentation's epsilon.  Elements are sorted by
// (word length, lexicographic token order), identity first.
class WordBall {
 public:
  const std::vector<BallElement>& elements() const { return elems_; }
  int cutoff() const { return cutoff_; }
  double epsilon() const { return eps_; }

  // Index of an eps-equal element, or -1.
  int find(const Moebius& g) const;

 private:
  friend WordBall enumerate_ball(const GroupPresentation&, int, std::size_t);
  void insert(const Moebius& g, const Word& w);

  std::vector<BallElement> elems_;
  std::map<std::array<std::int64_t, 4>, int> index_;
  int cutoff_ = 0;
  double eps_ = kEps;
};

// Breadth-first enumeration; throws BallTooLarge past `cap` elements and
// EmptyInput when the presentation has no generators.
WordBall enumerate_ball(const GroupPresentation& pres, int cutoff,
                        std::size_t cap = 500000);

// Semi-decision membership: definite yes with a witness word, or unknown.
struct Membership {
  bool yes = false;
  Word witness;
};
Membership contains_up_to(const GroupPresentation& pres, const WordBall& ball,
                          const Moebius& g);

// Conjugacy class of a hyperbolic element, carried by a cyclically reduced
// representative.
struct ConjClass {
  Moebius rep;
  Word cyclic_word;
  double trace = 0.0;   // canonical-representative trace of rep
  double length = 0.0;  // translation length
  bool primitive = true;
  BoundaryPoint attracting, repelling;
};

// Hyperbolic conjugacy classes represented in the ball with translation
// length <= L_max, conjugacy-deduplicated (rotation equality of cyclic words,
// then explicit conjugator search over the ball).  Sorted by (length, trace,
// word).  Imprimitive classes are dropped unless requested.
std::vector<ConjClass> primitive_hyperbolic_classes(
    const GroupPresentation& pres, const WordBall& ball, double L_max,
    bool include_imprimitive = false);

}  // namespace zb
