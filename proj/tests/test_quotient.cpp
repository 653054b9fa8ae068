#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ssg/quotient.hpp"

using namespace ssg;

TEST_CASE("level quotients") {
  auto g = builtin("grigorchuk");
  CHECK(level_quotient(g, 1).order() == 2);
  CHECK(level_quotient(g, 2).order() == 8);
  CHECK(level_quotient(g, 3).order() == 128);
  auto tau = builtin("adding_machine");
  auto q3 = level_quotient(tau, 3);
  CHECK(q3.order() == 8);
  CHECK(q3.generator_images[0].order() == 8);
  CHECK(leaf_perm(Element::identity(g.system), 4).is_identity());
}

TEST_CASE("projections are the lower quotients") {
  for (const auto& name : {"grigorchuk", "gupta_sidki", "twisted_twin", "dihedral"}) {
    auto g = builtin(name);
    const int top = g.degree() == 2 ? 5 : 3;
    for (int n = 1; n <= top; ++n) {
      auto qn = level_quotient(g, n);
      for (int m = 0; m < n; ++m) {
        auto qm = level_quotient(g, m);
        auto proj = project(*qn.perm_group, g.degree(), n, m);
        CHECK(proj.same_as(*qm.perm_group));
        CHECK(qn.order() == qm.order() * stab_image(qn, m).order());
      }
    }
  }
}

TEST_CASE("stabilizer images") {
  auto g = builtin("grigorchuk");
  auto q3 = level_quotient(g, 3);
  CHECK(stab_image(q3, 3).order() == 1);
  CHECK(stab_image(q3, 0).order() == 128);
  CHECK(stab_image(q3, 2).order() == 16);
}

TEST_CASE("Schreier words for level stabilizers") {
  auto g = builtin("grigorchuk");
  auto s0 = schreier_level_stabilizer_words(g, 0);
  CHECK(s0.words == g.generator_words());

  auto tau = builtin("adding_machine");
  auto s1 = schreier_level_stabilizer_words(tau, 1);
  REQUIRE(s1.words.size() == 1);
  CHECK(tau.system->format_word(s1.words[0]) == "tau^2");

  auto g1 = schreier_level_stabilizer_words(g, 1);
  auto has = [&](const char* w) {
    auto word = g.system->parse_word(w);
    return std::find(g1.words.begin(), g1.words.end(), word) != g1.words.end();
  };
  CHECK(has("b"));
  CHECK(has("c"));
  CHECK(has("d"));
  auto q2 = level_quotient(g, 2);
  PermGroup img(4, word_images(g, g1.words, 2));
  CHECK(index(img, *q2.perm_group) == 2);

  for (const auto& name : {"grigorchuk", "gupta_sidki", "twisted_twin"}) {
    auto grp = builtin(name);
    for (int m = 0; m <= 2; ++m) {
      auto sw = schreier_level_stabilizer_words(grp, m);
      CHECK(sw.complete);
      for (int level = m; level <= (grp.degree() == 2 ? 5 : 4); ++level) {
        auto q = level_quotient(grp, level);
        PermGroup gen(q.degree(), word_images(grp, sw.words, level));
        CHECK(gen.same_as(stab_image(q, m).group()));
      }
    }
  }
}

TEST_CASE("finite rigid stabilizers") {
  auto g = builtin("grigorchuk");
  auto q4 = level_quotient(g, 4);
  CHECK(rigid_stab_finite(q4, Vertex{}).order() == q4.order());
  auto leaf = rigid_stab_finite(q4, Vertex::parse("1111", 2));
  CHECK(leaf.order() == 1);
  // (abab) = ((ab)^2 ... ) words of K supported on the left subtree:
  // x_star([k, 1], 1) for k in K lies in the group.
  auto r1 = rigid_stab_finite(q4, Vertex::parse("1", 2));
  for (const auto& k : g.branch.words) {
    auto left = x_star_leaf_perm({g.system->leaf_perm(k, 3), Permutation::identity(8)}, 2, 1);
    CHECK(q4.perm_group->contains(left));
    CHECK(r1.contains(left));
  }
}

TEST_CASE("sigma signatures") {
  auto g = builtin("grigorchuk");
  auto a = Element::generator(g.system, "a");
  auto b = Element::generator(g.system, "b");
  CHECK(sigma_signature(a, 0, 2) == 1);
  CHECK(sigma_signature(Element::identity(g.system), 3, 2) == 0);
  CHECK(sigma_signature(b, 1, 2) == 1);
  CHECK(sigma_signature(b, 0, 2) == 0);

  std::mt19937_64 rng(23);
  for (const auto& name : {"grigorchuk", "gupta_sidki"}) {
    auto grp = builtin(name);
    const int p = grp.degree();
    for (int t = 0; t < 200; ++t) {
      Word wx, wy;
      for (int k = 0; k < 6; ++k) {
        wx.letters.push_back(letter_of(rng() % grp.system->size(), rng() % 2));
        wy.letters.push_back(letter_of(rng() % grp.system->size(), rng() % 2));
      }
      Element x(grp.system, wx), y(grp.system, wy);
      int i = static_cast<int>(rng() % 5);
      CHECK(sigma_signature(x * y, i, p) == (sigma_signature(x, i, p) + sigma_signature(y, i, p)) % p);
    }
  }
  auto sys = parse_system(R"({"alphabet_size": 3, "generators": [
    {"name": "t", "perm": [2, 1, 3], "sections": ["e", "e", "e"]}]})");
  CHECK_THROWS(sigma_signature(Element::generator(sys, 0), 0, 3));
}

TEST_CASE("psi rank profiles") {
  auto g = builtin("grigorchuk");
  auto ranks = psi_rank_profile(g, 8);
  CHECK(ranks.size() == 9);
  CHECK(ranks[0] <= 1);
  for (int r : ranks) CHECK(r <= 4);
  for (int n = 0; n <= 6; ++n) {
    auto rotors = q_n_generators(2, n + 1);
    CHECK(psi_rank_profile(rotors, 2, n).back() == n + 1);
  }
}

TEST_CASE("stab(m) inside K") {
  auto g = builtin("grigorchuk");
  auto checks = find_stab_in_K_level(g, {0}, 4);
  CHECK(!checks[0].holds);
  CHECK(checks[0].witness.has_value());

  auto whole = g;
  whole.branch.kind = BranchData::Kind::Generated;
  whole.branch.words = g.generator_words();
  for (const auto& c : find_stab_in_K_level(whole, {0, 1, 2}, 4)) CHECK(c.holds);

  auto found = discover_stab_level(g);
  REQUIRE(found.m.has_value());
  CHECK(*found.m == 3);
}

TEST_CASE("level transitivity") {
  CHECK(level_transitivity(builtin("adding_machine"), 8).pass);
  CHECK(level_transitivity(builtin("grigorchuk"), 6).pass);
  auto trivial = custom_group(parse_system(R"({"alphabet_size": 2, "generators": [
    {"name": "z", "perm": [1, 2], "sections": ["z", "z"]}]})"));
  auto t = level_transitivity(trivial, 3);
  CHECK(!t.pass);
  CHECK(t.first_failure == 1);
}

TEST_CASE("branching lemma") {
  auto g = builtin("grigorchuk");
  for (int n : {0, 1, 2}) {
    auto r = verify_branching_lemma(g, 3, n, 3 + n + 1);
    REQUIRE(!is_inconclusive(r));
    auto cert = std::get<StabCertificate>(r);
    CHECK(cert.verdict == StabCertificate::Verdict::Equal);
    CHECK(recheck(cert, g));
  }
  // G_2 and G_3 are all of Aut(T_2(n)); level 4 is the first that can detect it.
  CHECK(std::get<StabCertificate>(verify_branching_lemma(g, 0, 1, 3)).verdict ==
        StabCertificate::Verdict::Equal);
  auto bad = verify_branching_lemma(g, 0, 1, 4);
  REQUIRE(!is_inconclusive(bad));
  auto cert = std::get<StabCertificate>(bad);
  CHECK(cert.verdict == StabCertificate::Verdict::NotInGroup);
  CHECK(recheck(cert, g));
}

TEST_CASE("same stabilizers") {
  auto g = builtin("grigorchuk");
  auto r = verify_samestabs(g, 1, 3, 5);
  REQUIRE(!is_inconclusive(r));
  CHECK(std::get<StabCertificate>(r).verdict == StabCertificate::Verdict::Equal);
  CHECK(recheck(std::get<StabCertificate>(r), g));
  auto r0 = verify_samestabs(g, 0, 2, 3);
  CHECK(std::get<StabCertificate>(r0).verdict == StabCertificate::Verdict::Equal);
  auto tau = verify_samestabs(builtin("adding_machine"), 1, 1, 3);
  CHECK(std::get<StabCertificate>(tau).verdict != StabCertificate::Verdict::Equal);
}
