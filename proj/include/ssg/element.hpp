#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ssg/permutation.hpp"
#include "ssg/recursion_system.hpp"
#include "ssg/word.hpp"

namespace ssg {

// A tree automorphism given as a free-reduced word over a recursion system.
// Sections are computed lazily through the system's decomposition memo.
class Element {
 public:
  Element() = default;
  Element(RecursionSystem::Ptr system, Word word);

  static Element identity(RecursionSystem::Ptr system);
  static Element generator(RecursionSystem::Ptr system, std::size_t i);
  // Throws when `name` is not a generator of the system.
  static Element generator(RecursionSystem::Ptr system, std::string_view name);
  static Element parse(RecursionSystem::Ptr system, std::string_view text);

  const RecursionSystem::Ptr& system() const noexcept { return system_; }
  const Word& word() const noexcept { return word_; }
  // True for the empty word only; use equal() for semantic triviality.
  bool is_empty_word() const noexcept { return word_.empty(); }

  // The same element viewed in an extension of its system.
  Element lifted(const RecursionSystem::Ptr& target) const;

  RootPerm root_perm() const;
  Element section(int x) const;
  Element section(const Vertex& v) const;
  Vertex act(const Vertex& v) const;
  Permutation leaf_perm(int level) const;

  Element inverse() const;
  Element pow(long long e) const;
  // Elements of different systems are multiplied in the larger system when
  // one extends the other; unrelated systems throw.
  friend Element operator*(const Element& g, const Element& h);

  std::string to_string() const;

 private:
  RecursionSystem::Ptr system_;
  Word word_;
};

Element multiply(const Element& g, const Element& h);
Element invert(const Element& g);

// Root permutations of all sections above level `depth`:
// labels[j][i] is the label at the i-th vertex (big-endian) of level j.
struct Portrait {
  int degree = 2;
  int depth = 0;
  std::vector<std::vector<RootPerm>> labels;

  const RootPerm& at(const Vertex& v) const {
    return labels.at(v.level()).at(v.index(degree));
  }
  friend bool operator==(const Portrait&, const Portrait&) = default;
};

Portrait portrait(const Element& g, int depth);
// Leaf action at level portrait.depth described by a portrait.
Permutation to_leaf_perm(const Portrait& portrait);
// Inverse of to_leaf_perm. Throws unless `leaf` preserves the tree structure
// on the d^depth leaves.
Portrait portrait_from_leaf_perm(const Permutation& leaf, int degree, int depth);

struct EqualResult {
  enum class Kind { Equal, Distinct, Unknown };
  Kind kind = Kind::Unknown;
  // For Distinct: g(v) == h(v) but the sections at v have different root
  // permutations, so the leaf actions differ at level |v| + 1.
  Vertex witness;
  // Number of distinct section words examined.
  std::size_t explored = 0;
};

inline constexpr std::size_t kDefaultEqualBudget = 10'000;

// Decides g == h by closing the set of sections of g h^-1 under taking
// sections; Equal is returned only when that set is closed and every member
// has trivial root permutation.
EqualResult equal(const Element& g, const Element& h,
                  std::size_t budget = kDefaultEqualBudget);

struct SectionClosure {
  // Breadth-first discovery order, starting with the inputs; includes the
  // empty word whenever some section is trivial as a word.
  std::vector<Word> words;
  bool overflow = false;
};

SectionClosure section_closure(const RecursionSystem& system,
                               const std::vector<Word>& words, std::size_t budget);

struct LawReport {
  std::size_t checks = 0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

// Randomized checks of (gh)(v) = g(h(v)), (gh)|_v = g|_{h(v)} h|_v,
// (g^-1)|_v = (g|_{g^-1(v)})^-1 and of leaf actions, on random words of
// length up to max_length and vertices of level up to depth.
LawReport check_recursion_laws(const RecursionSystem::Ptr& system, std::uint64_t seed,
                               std::size_t samples, int depth = 4, std::size_t max_length = 8);

}  // namespace ssg
