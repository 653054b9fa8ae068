#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "ssg/bigint.hpp"
#include "ssg/errors.hpp"
#include "ssg/permutation.hpp"

namespace ssg {

// A finite permutation group backed by a stabilizer chain.
//
// The chain is built eagerly by a deterministic incremental Schreier-Sims
// run: base points are the optional `initial_base` followed by the smallest
// point moved by each new residue. Once constructed the object is immutable,
// so concurrent queries are safe.
class PermGroup {
 public:
  PermGroup() = default;
  PermGroup(std::size_t degree, std::vector<Permutation> generators,
            std::vector<Point> initial_base = {});

  static PermGroup trivial(std::size_t degree,
                           std::vector<Point> initial_base = {}) {
    return PermGroup(degree, {}, std::move(initial_base));
  }

  std::size_t degree() const noexcept { return degree_; }
  // Non-identity input generators, deduplicated, in input order.
  const std::vector<Permutation>& generators() const noexcept { return gens_; }
  const BigInt& order() const noexcept { return order_; }
  bool is_trivial() const noexcept { return order_ == 1; }

  bool contains(const Permutation& p) const;
  // True iff every generator of `h` lies in this group.
  bool contains(const PermGroup& h) const;
  // Equality as sets of permutations.
  bool same_as(const PermGroup& other) const;

  // Closure with extra generators; the chain is extended, not rebuilt.
  PermGroup with_generators(std::span<const Permutation> extra) const;

  // Residue of sifting `p` through levels [start, chain_length()) and the
  // first level at which the residue's base image left the orbit (or
  // chain_length() on success).
  std::pair<Permutation, std::size_t> strip(const Permutation& p,
                                            std::size_t start = 0) const;

  std::size_t chain_length() const noexcept { return levels_.size(); }
  std::vector<Point> base() const;
  Point base_point(std::size_t level) const { return levels_.at(level).base; }
  std::span<const Point> orbit(std::size_t level) const {
    return levels_.at(level).orbit;
  }
  bool orbit_contains(std::size_t level, Point x) const {
    return levels_.at(level).pos[x] >= 0;
  }
  // u with u(base_point(level)) == x; x must lie in the level orbit.
  Permutation transversal(std::size_t level, Point x) const;
  // Strong generators of the pointwise stabilizer of the first `level` base
  // points (level == chain_length() gives the trivial group).
  std::vector<Permutation> stabilizer_generators(std::size_t level) const;

  // All elements, by products of transversals. Throws if order() > limit.
  std::vector<Permutation> elements(std::size_t limit) const;
  void for_each_element(const std::function<void(const Permutation&)>& f) const;

 private:
  struct Level {
    Point base = 0;
    std::vector<std::uint32_t> gens;  // indices into strong_
    std::vector<Point> orbit;
    std::vector<std::int32_t> pos;  // point -> orbit index, -1 if absent
    std::vector<Permutation> uinv;  // inverse transversal, parallel to orbit
    std::vector<std::int32_t> parent_gen;
    std::vector<Point> parent;
    std::vector<std::uint32_t> done;  // generators already paired per point
  };

  void push_level(Point base);
  void add_generator(const Permutation& g);
  void add_strong(Permutation r, std::size_t from_level, std::size_t to_level);
  void extend_orbit(std::size_t level, std::size_t first_new_gen);
  void complete(std::size_t start_level);
  void recompute_order();

  std::size_t degree_ = 0;
  std::vector<Permutation> gens_;
  std::vector<Permutation> strong_;
  std::vector<Permutation> strong_inv_;
  std::vector<Level> levels_;
  BigInt order_ = 1;
};

// Group given by generators with a certified order; `index` checks
// containment first and throws when H is not a subgroup of G.
BigInt index(const PermGroup& h, const PermGroup& g);

// The element of the left coset g*S whose images of S's base points are
// lexicographically smallest; equal for g and g' iff g*S == g'*S.
Permutation canonical_coset_rep(const PermGroup& s, const Permutation& g);

// A subgroup of a fixed ambient group. Construction verifies that every
// generator lies in the ambient group.
class SubgroupHandle {
 public:
  SubgroupHandle(std::shared_ptr<const PermGroup> ambient, PermGroup group);
  SubgroupHandle(std::shared_ptr<const PermGroup> ambient,
                 std::vector<Permutation> generators);
  static SubgroupHandle whole(std::shared_ptr<const PermGroup> ambient);

  const PermGroup& ambient() const noexcept { return *ambient_; }
  const std::shared_ptr<const PermGroup>& ambient_ptr() const noexcept {
    return ambient_;
  }
  const PermGroup& group() const noexcept { return group_; }
  const BigInt& order() const noexcept { return group_.order(); }
  bool contains(const Permutation& p) const { return group_.contains(p); }
  const std::vector<Permutation>& generators() const noexcept {
    return group_.generators();
  }

 private:
  std::shared_ptr<const PermGroup> ambient_;
  PermGroup group_;
};

// Budgets for the search-based operations.
struct SearchOptions {
  // Intersections where the smaller group has at most this many elements
  // are computed by filtering its element list.
  BigInt element_filter_limit = BigInt(1) << 20;
  // Maximum number of search-tree nodes before giving up.
  std::size_t node_budget = 20'000'000;
  // Normalizer search refuses larger degrees.
  std::size_t normalizer_degree_bound = 64;
};

PermGroup build_chain(std::size_t degree, std::vector<Permutation> generators);

// Kernel of the induced action of G on the blocks described by `block_of`
// (leaf -> block id, ids 0..B-1). Throws if some generator does not map
// blocks to blocks.
SubgroupHandle kernel_of_refinement(std::shared_ptr<const PermGroup> g,
                                    std::span<const std::uint32_t> block_of);

// Image of G in Sym(blocks).
PermGroup block_action(const PermGroup& g, std::span<const std::uint32_t> block_of);

Outcome<SubgroupHandle> intersection(const SubgroupHandle& a,
                                     const SubgroupHandle& b,
                                     const SearchOptions& opts = {});

SubgroupHandle pointwise_stabilizer(std::shared_ptr<const PermGroup> g,
                                    std::span<const Point> points);

Outcome<SubgroupHandle> normalizer(std::shared_ptr<const PermGroup> g,
                                   const PermGroup& h,
                                   const SearchOptions& opts = {});

PermGroup normal_closure(const PermGroup& g, std::span<const Permutation> gens);
PermGroup derived_subgroup(const PermGroup& g);

struct IndexPSubgroups {
  std::vector<SubgroupHandle> subgroups;
  // Rank of G / G^p[G,G] over the field with p elements.
  std::size_t rank = 0;
  // False for odd p: only normal index-p subgroups are listed.
  bool complete = true;
};

// Index-p subgroups containing G^p[G,G], i.e. kernels of epimorphisms onto
// the cyclic group of order p. For p = 2 this is every index-2 subgroup.
IndexPSubgroups index_p_subgroups(std::shared_ptr<const PermGroup> g,
                                  unsigned p);

// Generic subgroup search over the stabilizer chain of `g`.
//
// `member` decides membership in the wanted subgroup S <= g; `prune(level,
// partial)` may return false when no element of S agrees with `partial` on
// the first level+1 base points. The result is exact when `member` really
// describes a subgroup.
Outcome<PermGroup> subgroup_search(
    const PermGroup& g, const std::function<bool(const Permutation&)>& member,
    const std::function<bool(std::size_t, const Permutation&)>& prune,
    std::size_t node_budget);

}  // namespace ssg
