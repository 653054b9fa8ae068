#pragma once

// Independent reference implementations used to cross-check the library.
// They only read the raw generator specs and never touch the memo caches.

#include <deque>
#include <unordered_set>
#include <vector>

#include "ssg/permutation.hpp"
#include "ssg/recursion_system.hpp"

namespace oracle {

inline std::vector<int> act_word(const ssg::RecursionSystem& sys, const ssg::Word& w,
                                 std::vector<int> path);

inline std::vector<int> act_letter(const ssg::RecursionSystem& sys, ssg::Letter l,
                                   const std::vector<int>& path) {
  if (path.empty()) return path;
  const auto& g = sys.generator(ssg::generator_of(l));
  std::vector<int> rest(path.begin() + 1, path.end());
  std::vector<int> out;
  if (l > 0) {
    out.push_back(g.perm[path[0]]);
    rest = act_word(sys, g.sections[static_cast<std::size_t>(path[0])], rest);
  } else {
    int pre = 0;
    while (g.perm[pre] != path[0]) ++pre;
    out.push_back(pre);
    rest = act_word(sys, g.sections[static_cast<std::size_t>(pre)].inverse(), rest);
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

inline std::vector<int> act_word(const ssg::RecursionSystem& sys, const ssg::Word& w,
                                 std::vector<int> path) {
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
    path = act_letter(sys, *it, path);
  }
  return path;
}

inline ssg::Permutation leaf_perm(const ssg::RecursionSystem& sys, const ssg::Word& w,
                                  int level) {
  const int d = sys.degree();
  std::size_t n = 1;
  for (int j = 0; j < level; ++j) n *= static_cast<std::size_t>(d);
  std::vector<ssg::Point> img(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = ssg::Vertex::from_index(i, d, static_cast<std::size_t>(level));
    auto out = act_word(sys, w, v.path);
    img[i] = static_cast<ssg::Point>(ssg::Vertex(out).index(d));
  }
  return ssg::Permutation(std::move(img));
}

// Number of elements of <gens>, by breadth-first closure. Returns 0 if the
// closure exceeds `limit`.
inline std::size_t closure_order(std::size_t degree, const std::vector<ssg::Permutation>& gens,
                                 std::size_t limit = 2'000'000) {
  std::unordered_set<ssg::Permutation, ssg::PermutationHash> seen;
  std::deque<ssg::Permutation> queue;
  auto id = ssg::Permutation::identity(degree);
  seen.insert(id);
  queue.push_back(id);
  while (!queue.empty()) {
    auto p = std::move(queue.front());
    queue.pop_front();
    for (const auto& g : gens) {
      auto q = g * p;
      if (seen.insert(q).second) {
        if (seen.size() > limit) return 0;
        queue.push_back(std::move(q));
      }
    }
  }
  return seen.size();
}

inline std::unordered_set<ssg::Permutation, ssg::PermutationHash> closure_set(
    std::size_t degree, const std::vector<ssg::Permutation>& gens) {
  std::unordered_set<ssg::Permutation, ssg::PermutationHash> seen;
  std::deque<ssg::Permutation> queue;
  auto id = ssg::Permutation::identity(degree);
  seen.insert(id);
  queue.push_back(id);
  while (!queue.empty()) {
    auto p = std::move(queue.front());
    queue.pop_front();
    for (const auto& g : gens) {
      auto q = g * p;
      if (seen.insert(q).second) queue.push_back(std::move(q));
    }
  }
  return seen;
}

}  // namespace oracle
