#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <unordered_map>
#include <utility>
#include <optional>
#include <string>
#include <vector>

#include "ssg/catalog.hpp"
#include "ssg/element.hpp"
#include "ssg/perm_group.hpp"

namespace ssg {

// G_n: the image of a self-similar group on the d^n leaves of level n.
struct LevelQuotient {
  SelfSimilarGroup group;
  int level = 0;
  std::shared_ptr<const PermGroup> perm_group;
  std::vector<Permutation> generator_images;

  std::size_t degree() const { return perm_group->degree(); }
  const BigInt& order() const { return perm_group->order(); }
};

Permutation leaf_perm(const Element& g, int n);
LevelQuotient level_quotient(const SelfSimilarGroup& g, int n);

std::size_t leaf_count(int degree, int level);
// Leaf of level n -> index of its ancestor at level m <= n.
std::vector<std::uint32_t> ancestor_map(int degree, int n, int m);
// Image of a level-n group in the action on level m <= n.
PermGroup project(const PermGroup& g, int degree, int n, int m);

// Image of stab(m) in G_n.
SubgroupHandle stab_image(const LevelQuotient& q, int m);

// Pointwise stabilizer of the leaves outside the subtree at v. This contains
// the image of rist(v) but may be larger.
SubgroupHandle rigid_stab_finite(const LevelQuotient& q, const Vertex& v);

// Image of the claimed branching subgroup in G_n; nullopt when the group
// carries no branching data.
std::optional<SubgroupHandle> branching_subgroup_image(const LevelQuotient& q);

struct SchreierWords {
  std::vector<Word> words;
  // False when some generator would exceed the length budget and was
  // dropped; the list then generates a subgroup of stab(m) only.
  bool complete = true;
  std::size_t coset_count = 0;
};

// Schreier generators of stab(m) over a transversal of shortest words for
// the cosets, i.e. the elements of G_m.
SchreierWords schreier_level_stabilizer_words(const SelfSimilarGroup& g, int m,
                                              std::size_t length_budget = 64);

// Level-n images of words over the group's system.
std::vector<Permutation> word_images(const SelfSimilarGroup& g, const std::vector<Word>& words,
                                     int n);

// A small generating set for <gens> obtained by dropping generators that
// already lie in the group generated by the earlier ones.
std::vector<Permutation> reduce_generators(std::size_t degree,
                                           const std::vector<Permutation>& gens);

struct StabCertificate {
  enum class Verdict {
    Equal,
    Unequal,     // witness lies in exactly one side
    NotInGroup,  // a right-hand generator lies outside G_L
  };
  std::string lemma;
  int m = 0;
  int n = 0;
  int level = 0;
  Verdict verdict = Verdict::Equal;
  std::vector<Permutation> lhs_generators;
  std::vector<Permutation> rhs_generators;
  BigInt lhs_order = 1;
  BigInt rhs_order = 1;
  std::optional<Permutation> witness;
  std::string witness_note;
};

std::string to_string(StabCertificate::Verdict v);

// Re-checks a certificate from its stored generators (and, for
// NotInGroup, the group's level image).
bool recheck(const StabCertificate& cert, const SelfSimilarGroup& g);

// stab(m+n) == X^n * stab(m) in G_L, with the right side generated by the
// embeddings of Schreier generators of stab(m) at every level-n vertex.
Outcome<StabCertificate> verify_branching_lemma(const SelfSimilarGroup& g, int m, int n,
                                                int level, std::size_t length_budget = 64);

// stab_G(k) == stab_P(k) in G_L for P = <X^n * G, Q_n> and k = n + m.
Outcome<StabCertificate> verify_samestabs(const SelfSimilarGroup& g, int n, int m, int level);

// sum over level-i vertices v of the sigma-exponent of g|_v, mod p. Throws
// when some section at level i does not act as a power of sigma.
int sigma_signature(const Element& g, int i, int p);

// Rank over F_p of the generator rows (psi_0(s), ..., psi_n(s)), for
// n = 0..n_max.
std::vector<int> psi_rank_profile(const std::vector<Element>& generators, int p, int n_max);
std::vector<int> psi_rank_profile(const SelfSimilarGroup& g, int n_max);

struct KLevelCheck {
  int m = 0;
  int level = 0;
  bool holds = false;
  // A generator of stab(m)'s image outside K's image.
  std::optional<Permutation> witness;
};

// Tests stab_image(G_L, m) <= image of K in G_L. Holding is evidence at
// level L only.
KLevelCheck check_stab_in_k(const LevelQuotient& q, int m);
std::vector<KLevelCheck> find_stab_in_K_level(const SelfSimilarGroup& g,
                                              const std::vector<int>& m_candidates, int level);

struct StabLevelDiscovery {
  std::optional<int> m;
  std::vector<KLevelCheck> checks;
};

// Smallest m in 1..max_m whose containment holds at levels m+1..m+extra.
StabLevelDiscovery discover_stab_level(const SelfSimilarGroup& g, int max_m = 6, int extra = 3);

struct Transitivity {
  bool pass = true;
  int first_failure = 0;  // level, when !pass
};

// Size of <gens> by breadth-first closure; nullopt beyond `limit` elements.
std::optional<std::size_t> closure_order(std::size_t degree, const std::vector<Permutation>& gens,
                                         std::size_t limit);

struct OrderRow {
  int level = 0;
  BigInt chain_order = 1;
  std::optional<std::size_t> closure_order;  // when |G_n| <= the closure limit
  bool agree = true;
};

// |G_n| from the stabilizer chain, cross-checked by closure when small.
std::vector<OrderRow> order_table(const SelfSimilarGroup& g, const std::vector<int>& levels,
                                  std::size_t closure_limit = 1'000'000);

// Membership in G_l for large l, given stab(m+1) = X*stab(m): x lies in G_l
// iff its level-(m+1) image has a lift r in G_{m+1} and every first-level
// section of r^-1 x lies in G_{l-1}. Levels up to `base_level` use a chain.
class BranchMembership {
 public:
  BranchMembership(SelfSimilarGroup g, int m, std::size_t chain_degree = 1024,
                   std::size_t table_limit = 200'000);

  const SelfSimilarGroup& group() const noexcept { return group_; }
  int m() const noexcept { return m_; }
  int base_level() const noexcept { return base_; }
  bool contains(const Permutation& x, int level);

 private:
  const Permutation& lift(std::size_t idx, int level);
  const PermGroup& chain(int level);

  SelfSimilarGroup group_;
  int m_ = 0;
  int base_ = 0;
  std::unordered_map<Permutation, std::size_t, PermutationHash> table_;
  std::vector<std::pair<std::size_t, std::size_t>> parent_;  // (parent, generator)
  std::map<int, std::unordered_map<std::size_t, Permutation>> lifts_;
  std::map<int, LevelQuotient> chains_;
};

Transitivity level_transitivity(const SelfSimilarGroup& g, int n_max);
bool is_transitive(std::span<const Permutation> gens, std::size_t degree);

}  // namespace ssg
