#include <doctest.h>

#include <memory>
#include <random>

#include "oracles.hpp"
#include "ssg/catalog.hpp"
#include "ssg/perm_group.hpp"

using namespace ssg;

namespace {

std::vector<Permutation> level_gens(const SelfSimilarGroup& g, int n) {
  std::vector<Permutation> out;
  for (const auto& e : g.generator_elements()) out.push_back(e.leaf_perm(n));
  return out;
}

std::vector<std::uint32_t> ancestor_blocks(int d, int n, int m) {
  std::size_t leaves = 1, below = 1;
  for (int j = 0; j < n; ++j) leaves *= static_cast<std::size_t>(d);
  for (int j = 0; j < n - m; ++j) below *= static_cast<std::size_t>(d);
  std::vector<std::uint32_t> out(leaves);
  for (std::size_t i = 0; i < leaves; ++i) out[i] = static_cast<std::uint32_t>(i / below);
  return out;
}

// Dihedral group of order 2n on n points.
PermGroup dihedral_group(std::size_t n) {
  std::vector<Point> rot(n), refl(n);
  for (std::size_t i = 0; i < n; ++i) {
    rot[i] = static_cast<Point>((i + 1) % n);
    refl[i] = static_cast<Point>((n - i) % n);
  }
  return PermGroup(n, {Permutation(rot), Permutation(refl)});
}

}  // namespace

TEST_CASE("orders") {
  CHECK(PermGroup(2, {Permutation::from_cycles(2, {{0, 1}})}).order() == 2);
  CHECK(PermGroup(5, {}).order() == 1);
  auto g = builtin("grigorchuk");
  auto g3 = PermGroup(8, level_gens(g, 3));
  CHECK(g3.order() == 128);
  CHECK(g3.order() == oracle::closure_order(8, level_gens(g, 3)));
  CHECK(g3.contains(Element::generator(g.system, "b").leaf_perm(3)));
  CHECK(index(PermGroup(2, {}), PermGroup(2, {Permutation::from_cycles(2, {{0, 1}})})) == 2);
  CHECK_THROWS(index(PermGroup(8, level_gens(g, 3)), PermGroup(8, {})));
}

TEST_CASE("chain order matches closure on random groups") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    std::size_t n = 3 + rng() % 6;
    std::vector<Permutation> gens;
    for (int k = 0; k < 2; ++k) {
      std::vector<Point> img(n);
      for (std::size_t i = 0; i < n; ++i) img[i] = static_cast<Point>(i);
      std::shuffle(img.begin(), img.end(), rng);
      gens.emplace_back(img);
    }
    PermGroup g(n, gens);
    CHECK(g.order() == oracle::closure_order(n, gens));
    auto all = oracle::closure_set(n, gens);
    for (const auto& p : all) CHECK(g.contains(p));
  }
}

TEST_CASE("kernels of refinement") {
  auto g = builtin("grigorchuk");
  auto g3 = std::make_shared<const PermGroup>(8, level_gens(g, 3));
  auto k0 = kernel_of_refinement(g3, ancestor_blocks(2, 3, 0));
  CHECK(k0.order() == 128);
  auto k3 = kernel_of_refinement(g3, ancestor_blocks(2, 3, 3));
  CHECK(k3.order() == 1);
  auto k1 = kernel_of_refinement(g3, ancestor_blocks(2, 3, 1));
  CHECK(k1.order() == 64);
  auto k2 = kernel_of_refinement(g3, ancestor_blocks(2, 3, 2));
  CHECK(k2.order() == 16);
  for (int m = 0; m <= 3; ++m) {
    auto blocks = ancestor_blocks(2, 3, m);
    auto image = block_action(*g3, blocks);
    CHECK(kernel_of_refinement(g3, blocks).order() * image.order() == 128);
  }
}

TEST_CASE("intersections") {
  auto d8 = std::make_shared<const PermGroup>(dihedral_group(8));
  CHECK(d8->order() == 16);
  auto whole = SubgroupHandle::whole(d8);
  auto self = intersection(whole, whole);
  REQUIRE(!is_inconclusive(self));
  CHECK(std::get<SubgroupHandle>(self).order() == 16);

  auto subs = index_p_subgroups(d8, 2);
  REQUIRE(subs.subgroups.size() == 3);
  auto ab = intersection(subs.subgroups[0], subs.subgroups[1]);
  REQUIRE(!is_inconclusive(ab));
  CHECK(std::get<SubgroupHandle>(ab).order() == 4);

  SubgroupHandle triv(d8, std::vector<Permutation>{});
  auto t = intersection(whole, triv);
  CHECK(std::get<SubgroupHandle>(t).order() == 1);

  // Backtrack path: force it with a zero element-filter limit.
  SearchOptions opts;
  opts.element_filter_limit = 0;
  auto g = builtin("grigorchuk");
  auto g4 = std::make_shared<const PermGroup>(16, level_gens(g, 4));
  auto k = kernel_of_refinement(g4, ancestor_blocks(2, 4, 2));
  std::vector<Permutation> bgens;
  for (const auto& e : g.generator_elements()) {
    if (e.to_string() != "a") bgens.push_back(e.leaf_perm(4));
  }
  SubgroupHandle b(g4, bgens);
  auto viaback = intersection(k, b, opts);
  auto viafilter = intersection(k, b);
  REQUIRE(!is_inconclusive(viaback));
  REQUIRE(!is_inconclusive(viafilter));
  CHECK(std::get<SubgroupHandle>(viaback).group().same_as(
      std::get<SubgroupHandle>(viafilter).group()));
  auto kset = oracle::closure_set(16, k.generators());
  std::size_t common = 0;
  for (const auto& p : kset) common += b.contains(p);
  CHECK(std::get<SubgroupHandle>(viaback).order() == common);
}

TEST_CASE("pointwise stabilizers") {
  auto g = builtin("grigorchuk");
  auto g3 = std::make_shared<const PermGroup>(8, level_gens(g, 3));
  CHECK(pointwise_stabilizer(g3, std::vector<Point>{}).order() == 128);
  std::vector<Point> all{0, 1, 2, 3, 4, 5, 6, 7};
  CHECK(pointwise_stabilizer(g3, all).order() == 1);
  std::vector<Point> outside{4, 5, 6, 7};
  auto rist = pointwise_stabilizer(g3, outside);
  std::size_t brute = 0;
  for (const auto& p : oracle::closure_set(8, level_gens(g, 3))) {
    bool fixes = true;
    for (Point x : outside) fixes = fixes && p[x] == x;
    brute += fixes;
  }
  CHECK(rist.order() == brute);
  auto stab1 = kernel_of_refinement(g3, ancestor_blocks(2, 3, 1));
  CHECK(stab1.order() % (rist.order() * rist.order()) == 0);
}

TEST_CASE("normalizers") {
  auto s4 = std::make_shared<const PermGroup>(
      4, std::vector<Permutation>{Permutation::from_cycles(4, {{0, 1, 2, 3}}),
                                  Permutation::from_cycles(4, {{0, 1}})});
  CHECK(s4->order() == 24);
  PermGroup syl(4, {Permutation::from_cycles(4, {{0, 1, 2, 3}}),
                    Permutation::from_cycles(4, {{0, 2}})});
  CHECK(syl.order() == 8);
  auto n = normalizer(s4, syl);
  REQUIRE(!is_inconclusive(n));
  CHECK(std::get<SubgroupHandle>(n).order() == 8);
  auto nn = normalizer(s4, *s4);
  CHECK(std::get<SubgroupHandle>(nn).order() == 24);
  auto nt = normalizer(s4, PermGroup(4, {}));
  CHECK(std::get<SubgroupHandle>(nt).order() == 24);

  // Brute force on a bigger example.
  auto g = builtin("grigorchuk");
  auto g3 = std::make_shared<const PermGroup>(8, level_gens(g, 3));
  PermGroup h(8, {Element::generator(g.system, "a").leaf_perm(3),
                  Element::generator(g.system, "d").leaf_perm(3)});
  auto nh = normalizer(g3, h);
  REQUIRE(!is_inconclusive(nh));
  std::size_t brute = 0;
  for (const auto& p : oracle::closure_set(8, level_gens(g, 3))) {
    bool ok = true;
    for (const auto& x : h.generators()) ok = ok && h.contains(x.conjugated_by(p));
    brute += ok;
  }
  CHECK(std::get<SubgroupHandle>(nh).order() == brute);

  SearchOptions small;
  small.normalizer_degree_bound = 4;
  CHECK(is_inconclusive(normalizer(g3, h, small)));
}

TEST_CASE("index-p subgroups") {
  auto d8 = std::make_shared<const PermGroup>(dihedral_group(8));
  auto s = index_p_subgroups(d8, 2);
  CHECK(s.subgroups.size() == 3);
  CHECK(s.rank == 2);
  for (const auto& h : s.subgroups) CHECK(h.order() == 8);

  auto c5 = std::make_shared<const PermGroup>(
      5, std::vector<Permutation>{Permutation::from_cycles(5, {{0, 1, 2, 3, 4}})});
  auto s5 = index_p_subgroups(c5, 5);
  CHECK(s5.subgroups.size() == 1);
  CHECK(s5.subgroups[0].order() == 1);
  CHECK(!s5.complete);

  auto a5 = std::make_shared<const PermGroup>(
      5, std::vector<Permutation>{Permutation::from_cycles(5, {{0, 1, 2}}),
                                  Permutation::from_cycles(5, {{0, 1, 2, 3, 4}})});
  CHECK(a5->order() == 60);
  CHECK(index_p_subgroups(a5, 2).subgroups.empty());

  // Brute force for a 2-group: every index-2 subgroup contains all squares.
  auto g = builtin("grigorchuk");
  auto g3 = std::make_shared<const PermGroup>(8, level_gens(g, 3));
  auto idx = index_p_subgroups(g3, 2);
  CHECK(idx.subgroups.size() == 7);
  for (const auto& h : idx.subgroups) CHECK(h.order() == 64);
}

TEST_CASE("subgroup orders divide the iterated wreath product") {
  auto g = builtin("gupta_sidki");
  for (int n = 1; n <= 3; ++n) {
    PermGroup q(static_cast<std::size_t>(std::pow(3, n)), level_gens(g, n));
    BigInt bound = 1;
    long long e = (static_cast<long long>(std::pow(3, n)) - 1) / 2;
    for (long long i = 0; i < e; ++i) bound *= 3;
    CHECK(bound % q.order() == 0);
  }
}
