// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance <path to ssg> <artifact directory>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ssg/catalog.hpp"
#include "ssg/commensurability.hpp"
#include "ssg/element.hpp"
#include "ssg/quotient.hpp"

using namespace ssg;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::vector<SelfSimilarGroup> catalog_groups() {
  std::vector<SelfSimilarGroup> out;
  for (const auto& e : catalog_entries()) {
    CatalogParams params;
    if (e.name == "gs_variant") params = {7, {1, 0, 3, 6}};
    if (e.name == "egs") params = {3, {1, 2}};
    out.push_back(builtin(e.name, params));
  }
  return out;
}

Result recursion_laws() {
  Result r;
  std::size_t checks = 0;
  for (const auto& g : catalog_groups()) {
    auto rep = check_recursion_laws(g.system, 2024, 150);
    checks += rep.checks;
    r.require(rep.passed(), g.name + ": " + (rep.failures.empty() ? "" : rep.failures.front()));
  }
  r.require(checks >= 1000, "fewer than 1000 checks");
  r.detail = std::to_string(checks) + " checks" + (r.detail.empty() ? "" : "; " + r.detail);
  return r;
}

Result oracle_equivalence() {
  Result r;
  constexpr std::size_t limit = 1'000'000;
  std::string covered;
  for (const auto& g : catalog_groups()) {
    int top = 0;
    for (int n = 1; n <= 12; ++n) {
      auto rows = order_table(g, {n}, limit);
      if (!rows[0].closure_order) break;
      r.require(rows[0].agree, g.name + " level " + std::to_string(n));
      top = n;
    }
    covered += (covered.empty() ? "" : ", ") + g.name + " n<=" + std::to_string(top);
    if (g.name == "grigorchuk") r.require(top >= 4, "grigorchuk below level 4");
    if (g.name == "gupta_sidki") r.require(top >= 3, "gupta_sidki below level 3");
    if (g.name == "adding_machine") r.require(top >= 12, "adding machine below level 12");
  }
  r.detail = covered + (r.detail.empty() ? "" : "; " + r.detail);
  return r;
}

Result grigorchuk_relations() {
  Result r;
  auto g = builtin("grigorchuk");
  auto el = [&](const std::string& s) { return Element::parse(g.system, s); };
  const auto one = Element::identity(g.system);
  const std::pair<std::string, std::string> relations[] = {
      {"b b", "e"}, {"c c", "e"}, {"d d", "e"}, {"b c", "d"}, {"c d", "b"}, {"d b", "c"}};
  for (const auto& [lhs, rhs] : relations) {
    auto a = el(lhs);
    auto b = rhs == "e" ? one : el(rhs);
    r.require(equal(a, b).kind == EqualResult::Kind::Equal, lhs + " = " + rhs + " not certified");
    r.require(oracle::leaf_perm(*g.system, a.word(), 10) == oracle::leaf_perm(*g.system, b.word(), 10),
              lhs + " = " + rhs + " leaf actions differ");
  }
  return r;
}

Result branching_lemma() {
  Result r;
  auto g = builtin("grigorchuk");
  auto m = discover_stab_level(g).m;
  r.require(m.has_value(), "no stab-in-K level");
  if (!m) return r;
  for (int n : {1, 2}) {
    auto out = verify_branching_lemma(g, *m, n, *m + n + 1);
    r.require(!is_inconclusive(out), "inconclusive at n=" + std::to_string(n));
    if (is_inconclusive(out)) continue;
    const auto& cert = std::get<StabCertificate>(out);
    r.require(cert.verdict == StabCertificate::Verdict::Equal, "not equal at n=" + std::to_string(n));
    r.require(recheck(cert, g), "recheck failed at n=" + std::to_string(n));
  }
  auto bad = verify_branching_lemma(g, 0, 1, 4);
  r.require(!is_inconclusive(bad), "m=0 inconclusive");
  if (!is_inconclusive(bad)) {
    const auto& cert = std::get<StabCertificate>(bad);
    r.require(cert.verdict != StabCertificate::Verdict::Equal && cert.witness.has_value(),
              "m=0 did not fail with a witness");
    r.require(recheck(cert, g), "m=0 recheck failed");
  }
  r.detail = "m=" + std::to_string(*m) + (r.detail.empty() ? "" : "; " + r.detail);
  return r;
}

Result same_stabilizers() {
  Result r;
  for (const char* name : {"grigorchuk", "gupta_sidki"}) {
    auto g = builtin(name);
    auto m = discover_stab_level(g).m;
    r.require(m.has_value(), std::string(name) + ": no stab-in-K level");
    if (!m) continue;
    auto out = verify_samestabs(g, 1, *m, *m + 2);
    r.require(!is_inconclusive(out), std::string(name) + ": inconclusive");
    if (is_inconclusive(out)) continue;
    const auto& cert = std::get<StabCertificate>(out);
    r.require(cert.verdict == StabCertificate::Verdict::Equal, std::string(name) + ": not equal");
    r.require(recheck(cert, g), std::string(name) + ": recheck failed");
    r.detail += (r.detail.empty() ? "" : ", ") + std::string(name) + " m=" + std::to_string(*m) +
                " L=" + std::to_string(cert.level);
  }
  return r;
}

Result not_layered() {
  Result r;
  auto g = builtin("grigorchuk");
  const auto ranks = psi_rank_profile(g, 8);
  for (int x : ranks) r.require(x <= 4, "rank above 4");
  int n0 = 8;
  while (n0 > 0 && ranks[static_cast<std::size_t>(n0 - 1)] == ranks.back()) --n0;
  r.require(n0 < 8, "profile not constant before n=8");
  for (int n = 0; n <= 8; ++n) {
    const int rank = psi_rank_profile(q_n_generators(2, n + 1), 2, n).back();
    r.require(rank == n + 1, "rotor rank " + std::to_string(rank) + " at n=" + std::to_string(n));
  }
  std::string profile;
  for (int x : ranks) profile += std::to_string(x);
  r.detail = "ranks " + profile + ", constant from n=" + std::to_string(n0) +
             (r.detail.empty() ? "" : "; " + r.detail);
  return r;
}

Result extension_tower() {
  Result r;
  for (const char* name : {"grigorchuk", "gupta_sidki"}) {
    auto g = builtin(name);
    TowerOptions opts;
    opts.count = 5;
    const Tower t = build_extension_tower(g, opts);
    r.require(t.entries.size() >= 5, std::string(name) + ": only " + std::to_string(t.entries.size()) + " entries");
    std::string levels;
    for (const auto& e : t.entries) {
      const std::string tag = std::string(name) + " entry " + std::to_string(e.index);
      r.require(!e.index_checks.empty(), tag + ": no certificate level");
      for (const auto& ic : e.index_checks) {
        r.require(ic.index == t.p, tag + ": index differs from p");
        r.require(ic.com_index == t.p, tag + ": comIndex differs from p");
      }
      r.require(e.consistent, tag + ": inconsistent at previous level");
      r.require(static_cast<int>(e.distinctness.size()) == e.index - 1, tag + ": distinctness missing");
      for (const auto& w : e.distinctness) r.require(w.outside, tag + ": not distinct");
      r.require(e.passed(), tag + ": failed");
      levels += (levels.empty() ? "" : ",") + std::to_string(e.n);
    }
    r.require(recheck(t, g).ok, std::string(name) + ": recheck failed");
    r.detail += (r.detail.empty() ? "" : "; ") + std::string(name) + " n=" + levels;
  }
  return r;
}

Result adding_machine() {
  Result r;
  auto rep = adding_machine_family({0, 1, 3, 5, 7, 9, 11, 13}, 10);
  r.require(rep.members.size() == 8, "expected 8 members");
  for (const auto& m : rep.members) {
    const std::string tag = "x=" + std::to_string(m.x);
    r.require(m.order_two, tag + ": order");
    r.require(m.inverts_tau, tag + ": conjugation");
    r.require(m.index_two, tag + ": index");
  }
  r.require(rep.pairwise_distinct, "not pairwise distinct");
  r.require(rep.passed(), "report failed");
  return r;
}

Result dihedral() {
  Result r;
  for (int n = 4; n <= 8; ++n) {
    auto rep = dihedral_checks(n);
    const std::string tag = "n=" + std::to_string(n);
    r.require(rep.order == BigInt(2) << n, tag + ": order");
    r.require(rep.dihedral, tag + ": not dihedral");
    r.require(rep.index_two_subgroups == 3, tag + ": index-2 count");
  }
  return r;
}

int run_command(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result determinism(const std::string& ssg, const std::filesystem::path& dir) {
  Result r;
  std::filesystem::create_directories(dir);
  struct Artifact {
    std::string file;
    std::string args;
    int expected_exit;
  };
  const std::vector<Artifact> artifacts = {
      {"branching_n1.json", "verify branching-lemma grigorchuk --n 1", 0},
      {"branching_n2.json", "verify branching-lemma grigorchuk --n 2", 0},
      {"branching_m0.json", "verify branching-lemma grigorchuk --m 0 --n 1 --level 4", 1},
      {"samestabs_grigorchuk.json", "verify samestabs grigorchuk --n 1", 0},
      {"samestabs_gupta_sidki.json", "verify samestabs gupta_sidki --p 3 --n 1", 0},
      {"psi_rank.json", "verify psi-rank grigorchuk --levels 0..8", 0},
      {"tower_grigorchuk.json", "tower grigorchuk --k 1 --count 5", 0},
      {"tower_gupta_sidki.json", "tower gupta_sidki --p 3 --k 1 --count 5", 0},
      {"tower_gupta_sidki.csv", "tower gupta_sidki --p 3 --k 1 --count 5 --format csv", 0},
      {"adding_machine.json", "adding-machine --n 10 --xs 0,1,3,5,7,9,11,13", 0},
      {"dihedral_4.json", "dihedral --n 4", 0},
      {"dihedral_8.csv", "dihedral --n 8 --format csv", 0},
  };
  for (const auto& a : artifacts) {
    const auto path = dir / a.file;
    const auto again = dir / (a.file + ".again");
    const int e1 = run_command(ssg + " " + a.args + " --out " + path.string());
    r.require(e1 == a.expected_exit, a.file + ": exit " + std::to_string(e1));
    // The second run writes elsewhere; rewrite its out path so the bytes compare.
    run_command(ssg + " " + a.args + " --out " + again.string());
    std::string first = slurp(path);
    std::string second = slurp(again);
    const std::string from = again.string();
    for (auto pos = second.find(from); pos != std::string::npos; pos = second.find(from)) {
      second.replace(pos, from.size(), path.string());
    }
    r.require(!first.empty() && first == second, a.file + ": not byte-identical");
    const int rep = run_command(ssg + " replay " + path.string());
    r.require(rep == 0, a.file + ": replay exit " + std::to_string(rep));
    std::filesystem::remove(again);
  }
  r.detail = std::to_string(artifacts.size()) + " artifacts in " + dir.string() +
             (r.detail.empty() ? "" : "; " + r.detail);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <ssg binary> <artifact dir>\n";
    return 3;
  }
  const std::string ssg = argv[1];
  const std::filesystem::path dir = argv[2];
  struct Criterion {
    int id;
    std::string name;
    double limit_seconds;
    std::function<Result()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "wreath recursion laws", 30, recursion_laws},
      {2, "chain orders match closure orders", 120, oracle_equivalence},
      {3, "Grigorchuk relations", 5, grigorchuk_relations},
      {4, "branching lemma", 300, branching_lemma},
      {5, "same stabilizers", 300, same_stabilizers},
      {6, "not layered", 300, not_layered},
      {7, "extension tower k=1", 600, extension_tower},
      {8, "adding machine family", 60, adding_machine},
      {9, "dihedral", 300, dihedral},
      {10, "determinism and replay", 900, [&] { return determinism(ssg, dir); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_seconds) r.require(false, "over the time limit");
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", secs, c.limit_seconds);
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << " (" << timing
              << ")" << (r.detail.empty() ? "" : ": " + r.detail) << std::endl;
    if (!r.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
