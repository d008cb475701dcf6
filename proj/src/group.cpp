#include "zb/group.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <utility>

namespace zb {

namespace {

// Token ordering: generator 0, its inverse, generator 1, ...
int token_rank(int t) {
  const int i = std::abs(t) - 1;
  return 2 * i + (t < 0 ? 1 : 0);
}

bool word_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int ra = token_rank(a[i]), rb = token_rank(b[i]);
    if (ra != rb) return ra < rb;
  }
  return false;
}

}  // namespace

std::string word_str(const GroupPresentation& pres, const Word& w) {
  if (w.empty()) return "id";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += pres.generators[std::abs(w[i]) - 1].label;
    if (w[i] < 0) out += "^-1";
  }
  return out;
}

Moebius word_matrix(const GroupPresentation& pres, const Word& w) {
  Moebius g;
  for (int t : w) {
    const Moebius& m = pres.generators[std::abs(t) - 1].mat;
    g = compose(g, t > 0 ? m : m.inverse());
  }
  return g;
}

Word free_reduce(const Word& w) {
  Word out;
  for (int t : w) {
    if (!out.empty() && out.back() == -t)
      out.pop_back();
    else
      out.push_back(t);
  }
  return out;
}

Word cyclic_reduce(const Word& w) {
  Word r = free_reduce(w);
  while (r.size() >= 2 && r.front() == -r.back()) {
    r.erase(r.begin());
    r.pop_back();
  }
  return r;
}

bool rotation_equal(const Word& w1, const Word& w2) {
  const std::size_t n = w1.size();
  if (n != w2.size()) return false;
  if (n == 0) return true;
  for (std::size_t s = 0; s < n; ++s) {
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (w1[(s + i) % n] != w2[i]) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

bool word_is_power(const Word& w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p <= n / 2; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (std::size_t i = p; i < n; ++i) {
      if (w[i] != w[i - p]) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

int WordBall::find(const Moebius& g) const {
  const auto q = g.quantized(eps_);
  std::array<std::int64_t, 4> key{};
  // A matrix eps-equal to a stored one quantizes into an adjacent cell at
  // worst, so probing the 3^4 neighborhood is exhaustive.
  for (int da = -1; da <= 1; ++da)
    for (int db = -1; db <= 1; ++db)
      for (int dc = -1; dc <= 1; ++dc)
        for (int dd = -1; dd <= 1; ++dd) {
          key = {q[0] + da, q[1] + db, q[2] + dc, q[3] + dd};
          auto it = index_.find(key);
          if (it != index_.end() && elems_[it->second].mat.approx_equal(g, eps_))
            return it->second;
        }
  return -1;
}

void WordBall::insert(const Moebius& g, const Word& w) {
  if (find(g) >= 0) return;
  const int idx = static_cast<int>(elems_.size());
  elems_.push_back(BallElement{g, w});
  index_.emplace(g.quantized(eps_), idx);
}

WordBall enumerate_ball(const GroupPresentation& pres, int cutoff,
                        std::size_t cap) {
  if (pres.generators.empty())
    throw EmptyInput("presentation '" + pres.name + "' has no generators");
  WordBall ball;
  ball.cutoff_ = cutoff;
  ball.eps_ = pres.epsilon;
  ball.insert(Moebius::identity(), {});
  std::size_t level_begin = 0;
  for (int len = 1; len <= cutoff; ++len) {
    const std::size_t level_end = ball.elems_.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      // Copy: insert() may reallocate the element vector.
      const BallElement base = ball.elems_[i];
      for (std::size_t gi = 0; gi < pres.generators.size(); ++gi) {
        for (int sign = +1; sign >= -1; sign -= 2) {
          const int tok = sign * static_cast<int>(gi + 1);
          if (!base.word.empty() && base.word.back() == -tok) continue;
          const Moebius& m = pres.generators[gi].mat;
          const Moebius next = compose(base.mat, sign > 0 ? m : m.inverse());
          Word w = base.word;
          w.push_back(tok);
          ball.insert(next, w);
          if (ball.elems_.size() > cap)
            throw BallTooLarge("word ball exceeds cap of " + std::to_string(cap));
        }
      }
    }
    level_begin = level_end;
  }
  return ball;
}

Membership contains_up_to(const GroupPresentation& pres, const WordBall& ball,
                          const Moebius& g) {
  (void)pres;
  const int idx = ball.find(g);
  if (idx < 0) return Membership{};
  return Membership{true, ball.elements()[idx].word};
}

namespace {

bool conjugate_in_ball(const WordBall& ball, const Moebius& r1,
                       const Moebius& r2, double eps) {
  for (const BallElement& e : ball.elements()) {
    const Moebius conj = compose(compose(e.mat, r1), e.mat.inverse());
    if (conj.approx_equal(r2, eps)) return true;
  }
  return false;
}

Moebius moebius_pow(const Moebius& g, int k) {
  Moebius p;
  for (int i = 0; i < k; ++i) p = compose(p, g);
  return p;
}

}  // namespace

std::vector<ConjClass> primitive_hyperbolic_classes(
    const GroupPresentation& pres, const WordBall& ball, double L_max,
    bool include_imprimitive) {
  const double eps = pres.epsilon;
  struct Cand {
    Moebius mat;
    Word word;
    double len;
  };
  std::vector<Cand> cands;
  for (const BallElement& e : ball.elements()) {
    if (e.word.empty()) continue;
    if (classify(e.mat, eps).kind != ElementKind::Hyperbolic) continue;
    Word cyc = cyclic_reduce(e.word);
    Moebius rep = cyc.empty() ? e.mat : word_matrix(pres, cyc);
    // Relations can make the cyclically reduced word non-hyperbolic even
    // though the original element is (it then represents a conjugate only in
    // the free group).  Fall back to the element itself.
    if (classify(rep, eps).kind != ElementKind::Hyperbolic) {
      rep = e.mat;
      cyc = free_reduce(e.word);
    }
    const double len = translation_length(rep, eps);
    if (len > L_max + eps) continue;
    cands.push_back(Cand{rep, cyc, len});
  }

  // Conjugates often share the cyclically reduced representative; collapsing
  // exact (matrix, word) duplicates first keeps the pairwise merge quadratic
  // in distinct candidates without changing its outcome.
  {
    std::set<std::pair<std::array<std::int64_t, 4>, Word>> seen;
    std::vector<Cand> unique;
    for (Cand& c : cands)
      if (seen.insert({c.mat.quantized(eps), c.word}).second)
        unique.push_back(std::move(c));
    cands = std::move(unique);
  }

  // Union-find over candidates; same class iff rotation-equal cyclic words or
  // an explicit ball conjugator maps one representative to the other.
  std::vector<int> parent(cands.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> root = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  const double trace_tol = 1e-6;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    for (std::size_t j = i + 1; j < cands.size(); ++j) {
      if (root(static_cast<int>(i)) == root(static_cast<int>(j))) continue;
      if (std::abs(std::abs(cands[i].mat.trace()) -
                   std::abs(cands[j].mat.trace())) > trace_tol)
        continue;
      bool same = rotation_equal(cands[i].word, cands[j].word);
      if (!same) same = conjugate_in_ball(ball, cands[i].mat, cands[j].mat, eps);
      if (same) parent[root(static_cast<int>(j))] = root(static_cast<int>(i));
    }
  }

  // Pick the (shortest, lexicographically least) member per class.
  std::map<int, int> best;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const int r = root(static_cast<int>(i));
    auto it = best.find(r);
    if (it == best.end() || word_less(cands[i].word, cands[it->second].word))
      best[r] = static_cast<int>(i);
  }

  std::vector<ConjClass> classes;
  for (const auto& [r, idx] : best) {
    const Cand& c = cands[idx];
    ConjClass cc;
    cc.rep = c.mat;
    cc.cyclic_word = c.word;
    cc.trace = c.mat.trace();
    cc.length = c.len;
    cc.primitive = !word_is_power(c.word);
    const FixedPointSet fp = fixed_points(c.mat, eps);
    cc.attracting = fp.attracting;
    cc.repelling = fp.repelling;
    classes.push_back(std::move(cc));
  }
  std::sort(classes.begin(), classes.end(),
            [](const ConjClass& x, const ConjClass& y) {
              if (std::abs(x.length - y.length) > 1e-12)
                return x.length < y.length;
              if (std::abs(x.trace - y.trace) > 1e-12) return x.trace < y.trace;
              return word_less(x.cyclic_word, y.cyclic_word);
            });

  // Backstop primitivity test: a class whose axis and length match an integer
  // multiple of a shorter class (up to ball conjugacy) is a power in disguise.
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!classes[i].primitive) continue;
    for (std::size_t j = 0; j < i; ++j) {
      const double ratio = classes[i].length / classes[j].length;
      const int k = static_cast<int>(std::lround(ratio));
      if (k < 2 || std::abs(ratio - k) > 1e-6) continue;
      const Moebius pk = moebius_pow(classes[j].rep, k);
      if (pk.approx_equal(classes[i].rep, eps) ||
          conjugate_in_ball(ball, pk, classes[i].rep, eps)) {
        classes[i].primitive = false;
        break;
      }
    }
  }

  if (!include_imprimitive) {
    classes.erase(std::remove_if(classes.begin(), classes.end(),
                                 [](const ConjClass& c) { return !c.primitive; }),
                  classes.end());
  }
  return classes;
}

}  // namespace zb
