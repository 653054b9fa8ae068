#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ssg/commensurability.hpp"

using namespace ssg;

namespace {

std::size_t intersection_size(const std::unordered_set<Permutation, PermutationHash>& a,
                              const std::unordered_set<Permutation, PermutationHash>& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.count(x);
  return n;
}

Permutation tau_perm(int level) {
  auto am = builtin("adding_machine");
  return am.system->leaf_perm(am.generators[0], level);
}

}  // namespace

TEST_CASE("com_index on dihedral subgroups") {
  auto g = builtin("dihedral");
  auto q = level_quotient(g, 3);
  REQUIRE(q.order() == 16);
  auto whole = SubgroupHandle::whole(q.perm_group);
  auto subs = index_p_subgroups(q.perm_group, 2);
  REQUIRE(subs.subgroups.size() == 3);

  auto same = com_index(whole, whole, 3);
  REQUIRE(std::holds_alternative<CommCertificate>(same));
  CHECK(std::get<CommCertificate>(same).com_index == 1);

  auto contained = com_index(subs.subgroups[0], whole, 3);
  REQUIRE(std::holds_alternative<CommCertificate>(contained));
  CHECK(std::get<CommCertificate>(contained).com_index == 2);

  const auto& a = subs.subgroups[0];
  const auto& b = subs.subgroups[1];
  auto res = com_index(a, b, 3);
  REQUIRE(std::holds_alternative<CommCertificate>(res));
  const auto& cert = std::get<CommCertificate>(res);
  auto sa = oracle::closure_set(8, a.generators());
  auto sb = oracle::closure_set(8, b.generators());
  const std::size_t both = intersection_size(sa, sb);
  CHECK(both == 4);
  CHECK(cert.intersection_order == both);
  CHECK(cert.com_index == (sa.size() / both) * (sb.size() / both));
  CHECK(cert.com_index == 4);
  CHECK(recheck(cert));

  auto rev = com_index(b, a, 3);
  CHECK(std::get<CommCertificate>(rev).com_index == cert.com_index);
}

TEST_CASE("find_gamma_outside") {
  auto g = builtin("grigorchuk");
  QuotientCache cache(g);
  auto res = find_gamma_outside(cache, 1);
  REQUIRE(std::holds_alternative<GammaCandidate>(res));
  const auto& c = std::get<GammaCandidate>(res);
  CHECK(c.depth == 1);
  CHECK(std::any_of(c.tuple.begin(), c.tuple.end(), [](const Word& w) { return !w.empty(); }));
  CHECK(recheck(c, cache));
  const std::size_t deg = leaf_count(2, c.level);
  auto gl = oracle::closure_set(deg, level_quotient(g, c.level).generator_images);
  CHECK(gl.count(c.element.leaf_perm(c.level)) == 0);

  auto a = Element(g.system, Word({letter_of(0)}));
  auto gamma = x_star({a, Element::identity(g.system)}, 1);
  auto g4 = oracle::closure_set(16, level_quotient(g, 4).generator_images);
  CHECK(g4.count(gamma.leaf_perm(4)) == 0);
  CHECK_FALSE(level_quotient(g, 4).perm_group->contains(gamma.leaf_perm(4)));
}

TEST_CASE("adding machine: x_star(tau, 1) is not a power of tau") {
  auto am = builtin("adding_machine");
  auto tau = Element(am.system, Word({letter_of(0)}));
  auto gamma = x_star({tau, Element::identity(am.system)}, 1);
  const auto t4 = tau_perm(4);
  const auto x = gamma.leaf_perm(4);
  bool power = false;
  for (int e = 0; e < 16; ++e) power = power || t4.pow(e) == x;
  CHECK_FALSE(power);
  CHECK_FALSE(level_quotient(am, 4).perm_group->contains(x));
}

TEST_CASE("recursive membership agrees with stabilizer chains") {
  struct Case {
    const char* name;
    int m;
    int level;
  };
  for (const Case& cs : {Case{"grigorchuk", 3, 8}, Case{"gupta_sidki", 2, 5},
                         Case{"twisted_twin", 3, 8}}) {
    auto g = builtin(cs.name);
    BranchMembership bm(g, cs.m, 8);
    auto q = level_quotient(g, cs.level);
    const std::size_t deg = q.degree();
    const std::size_t d = static_cast<std::size_t>(g.degree());
    std::mt19937 rng(7);
    int inside = 0;
    for (int t = 0; t < 60; ++t) {
      Permutation x = Permutation::identity(deg);
      for (int i = 0; i < 25; ++i) x = q.generator_images[rng() % q.generator_images.size()] * x;
      if (t % 2 == 1) {
        std::vector<Point> img(x.images().begin(), x.images().end());
        const std::size_t a = (rng() % (deg / d)) * d;
        std::swap(img[a], img[a + 1]);
        x = Permutation(std::move(img));
      }
      const bool expected = q.perm_group->contains(x);
      inside += expected;
      CHECK(bm.contains(x, cs.level) == expected);
    }
    CHECK(inside >= 30);
    CHECK(inside < 60);
  }
}

TEST_CASE("tower: empty and short towers") {
  auto g = builtin("grigorchuk");
  TowerOptions opts;
  opts.count = 0;
  auto empty = build_extension_tower(g, opts);
  CHECK(empty.entries.empty());
  CHECK(empty.complete(0));

  auto gs = builtin("gupta_sidki");
  opts.count = 3;
  auto t = build_extension_tower(gs, opts);
  REQUIRE(t.complete(3));
  int prev = 0;
  for (const auto& e : t.entries) {
    CHECK(e.passed());
    CHECK(e.n > prev);
    prev = e.n;
    for (const auto& ic : e.index_checks) {
      CHECK(ic.index == 3);
      CHECK(ic.com_index == 3);
      if (ic.certificate) CHECK(ic.certificate->com_index == 3);
    }
  }
  CHECK(recheck(t, gs).ok);
}

TEST_CASE("tower: first Grigorchuk entry against closures") {
  auto g = builtin("grigorchuk");
  TowerOptions opts;
  opts.count = 2;
  auto t = build_extension_tower(g, opts);
  REQUIRE(t.complete(2));
  for (const auto& e : t.entries) {
    CHECK(e.passed());
    if (leaf_count(2, e.n) > 128) continue;
    const std::size_t deg = leaf_count(2, e.n);
    auto q = level_quotient(g, e.n);
    std::vector<Permutation> inputs = q.generator_images;
    inputs.push_back(e.gamma_perm(g, e.n));
    const Permutation h = e.h.evaluate(inputs);
    std::vector<Permutation> ext = q.generator_images;
    ext.push_back(h);
    const std::size_t base = oracle::closure_order(deg, q.generator_images);
    const std::size_t big = oracle::closure_order(deg, ext);
    CHECK(big == 2 * base);
    auto prev = oracle::closure_set(leaf_count(2, e.previous_n),
                                    level_quotient(g, e.previous_n).generator_images);
    if (e.previous_n > 0) {
      std::vector<Permutation> low = level_quotient(g, e.previous_n).generator_images;
      low.push_back(e.gamma_perm(g, e.previous_n));
      CHECK(prev.count(e.h.evaluate(low)) == 1);
    }
  }
  auto tampered = t;
  tampered.entries[1].n += 1;
  CHECK_FALSE(recheck(tampered, g).ok);
}

TEST_CASE("tower: k = 2") {
  auto g = builtin("gupta_sidki");
  TowerOptions opts;
  opts.k = 2;
  opts.count = 2;
  auto t = build_extension_tower(g, opts);
  REQUIRE(t.complete(2));
  CHECK(t.best_effort);
  CHECK(t.h_index == 3);
  for (const auto& e : t.entries) {
    CHECK(e.passed());
    CHECK(e.expected_com_index == 9);
  }
  CHECK(recheck(t, g).ok);
}

TEST_CASE("adding machine family") {
  auto rep = adding_machine_family({0, 1}, 4);
  REQUIRE(rep.members.size() == 2);
  CHECK(rep.passed());
  CHECK(rep.a_order == 16);
  auto sys = adding_machine_with_involution();
  const auto t4 = sys.system->leaf_perm(sys.generators[0], 4);
  for (const auto& m : rep.members) {
    CHECK(m.order_two);
    CHECK(m.inverts_tau);
    CHECK(m.group_order == 32);
    CHECK(oracle::closure_order(16, {t4, m.involution}) == 32);
    CHECK((m.involution * m.involution).is_identity());
    CHECK(m.involution * t4 * m.involution == t4.inverse());
  }
  CHECK(rep.members[0].involution != rep.members[1].involution);
  CHECK(rep.pairwise_distinct);

  auto wide = adding_machine_family({0, 1, 3, 5, 7, 9, 11, 13}, 10);
  CHECK(wide.members.size() == 8);
  CHECK(wide.passed());
}

TEST_CASE("dihedral checks") {
  for (int n = 2; n <= 5; ++n) {
    auto rep = dihedral_checks(n);
    CHECK(rep.passed());
    CHECK(rep.order == (BigInt(1) << (n + 1)));
    auto q = level_quotient(builtin("dihedral"), n);
    const std::size_t deg = q.degree();
    auto all = oracle::closure_set(deg, q.generator_images);
    std::vector<Permutation> squares;
    for (const auto& x : all) squares.push_back(x * x);
    // Frattini subgroup of a 2-group: generated by the squares.
    const std::size_t frattini = oracle::closure_order(deg, squares);
    std::size_t rank = 0;
    for (std::size_t r = all.size() / frattini; r > 1; r /= 2) ++rank;
    CHECK(rep.index_two_subgroups == (std::size_t{1} << rank) - 1);
    CHECK(rep.index_two_subgroups == 3);
  }
  auto one = dihedral_checks(1);
  CHECK(one.order == 2);
  CHECK(one.index_two_subgroups == 1);
}

TEST_CASE("conjugate_level_transitive") {
  auto am = builtin("adding_machine");
  auto tau = Element(am.system, Word({letter_of(0)}));
  auto c = conjugate_level_transitive(tau, tau.inverse(), 4);
  REQUIRE(c.has_value());
  CHECK(*c * tau.leaf_perm(4) * c->inverse() == tau.inverse().leaf_perm(4));
  auto self = conjugate_level_transitive(tau, tau, 5);
  REQUIRE(self.has_value());
  CHECK(*self * tau.leaf_perm(5) * self->inverse() == tau.leaf_perm(5));
  CHECK_FALSE(conjugate_level_transitive(tau, Element::identity(am.system), 4).has_value());
}
