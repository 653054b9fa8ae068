#include "ssg/quotient.hpp"

#include <map>
#include <unordered_map>
#include <unordered_set>

#include "ssg/errors.hpp"

namespace ssg {

Permutation leaf_perm(const Element& g, int n) { return g.leaf_perm(n); }

LevelQuotient level_quotient(const SelfSimilarGroup& g, int n) {
  if (n < 0) throw Error("negative level");
  LevelQuotient q;
  q.group = g;
  q.level = n;
  for (std::size_t i : g.generators) q.generator_images.push_back(g.system->leaf_perm(i, n));
  q.perm_group = std::make_shared<const PermGroup>(leaf_count(g.degree(), n), q.generator_images);
  return q;
}

std::size_t leaf_count(int degree, int level) {
  std::size_t n = 1;
  for (int j = 0; j < level; ++j) n *= static_cast<std::size_t>(degree);
  return n;
}

std::vector<std::uint32_t> ancestor_map(int degree, int n, int m) {
  if (m < 0 || m > n) throw Error("ancestor level out of range");
  const std::size_t leaves = leaf_count(degree, n);
  const std::size_t below = leaf_count(degree, n - m);
  std::vector<std::uint32_t> out(leaves);
  for (std::size_t i = 0; i < leaves; ++i) out[i] = static_cast<std::uint32_t>(i / below);
  return out;
}

PermGroup project(const PermGroup& g, int degree, int n, int m) {
  return block_action(g, ancestor_map(degree, n, m));
}

SubgroupHandle stab_image(const LevelQuotient& q, int m) {
  return kernel_of_refinement(q.perm_group, ancestor_map(q.group.degree(), q.level, m));
}

SubgroupHandle rigid_stab_finite(const LevelQuotient& q, const Vertex& v) {
  if (v.level() > static_cast<std::size_t>(q.level)) throw Error("vertex below the quotient level");
  const int d = q.group.degree();
  const std::size_t below = leaf_count(d, q.level - static_cast<int>(v.level()));
  const std::size_t first = v.index(d) * below;
  std::vector<Point> outside;
  for (std::size_t i = 0; i < q.degree(); ++i) {
    if (i < first || i >= first + below) outside.push_back(static_cast<Point>(i));
  }
  return pointwise_stabilizer(q.perm_group, outside);
}

std::vector<Permutation> word_images(const SelfSimilarGroup& g, const std::vector<Word>& words,
                                     int n) {
  std::vector<Permutation> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(g.system->leaf_perm(w, n));
  return out;
}

std::optional<SubgroupHandle> branching_subgroup_image(const LevelQuotient& q) {
  const auto& b = q.group.branch;
  switch (b.kind) {
    case BranchData::Kind::None:
      return std::nullopt;
    case BranchData::Kind::Generated:
      return SubgroupHandle(q.perm_group, word_images(q.group, b.words, q.level));
    case BranchData::Kind::NormalClosure: {
      auto gens = word_images(q.group, b.words, q.level);
      return SubgroupHandle(q.perm_group, normal_closure(*q.perm_group, gens));
    }
    case BranchData::Kind::Commutator:
      return SubgroupHandle(q.perm_group, derived_subgroup(*q.perm_group));
  }
  return std::nullopt;
}

SchreierWords schreier_level_stabilizer_words(const SelfSimilarGroup& g, int m,
                                              std::size_t length_budget) {
  if (m < 0) throw Error("negative level");
  const std::size_t degree = leaf_count(g.degree(), m);
  std::vector<Permutation> gens;
  for (std::size_t i : g.generators) gens.push_back(g.system->leaf_perm(i, m));

  // Shortest-word transversal of G_m, discovered breadth first.
  std::unordered_map<Permutation, std::size_t, PermutationHash> index;
  std::vector<Permutation> elems;
  std::vector<Word> reps;
  elems.push_back(Permutation::identity(degree));
  reps.emplace_back();
  index.emplace(elems.front(), 0);
  for (std::size_t head = 0; head < elems.size(); ++head) {
    for (std::size_t s = 0; s < gens.size(); ++s) {
      Permutation q = gens[s] * elems[head];
      if (index.count(q) != 0) continue;
      Word w({letter_of(g.generators[s])});
      w.letters.insert(w.letters.end(), reps[head].letters.begin(), reps[head].letters.end());
      index.emplace(q, elems.size());
      elems.push_back(std::move(q));
      reps.push_back(std::move(w));
    }
  }

  SchreierWords out;
  out.coset_count = elems.size();
  std::unordered_set<Word, WordHash> seen;
  for (std::size_t c = 0; c < elems.size(); ++c) {
    for (std::size_t s = 0; s < gens.size(); ++s) {
      std::size_t target = index.at(gens[s] * elems[c]);
      Word w = reps[target].inverse() * Word({letter_of(g.generators[s])}) * reps[c];
      if (w.empty()) continue;
      if (w.size() > length_budget) {
        out.complete = false;
        continue;
      }
      if (seen.insert(w).second) out.words.push_back(std::move(w));
    }
  }
  return out;
}

std::vector<Permutation> reduce_generators(std::size_t degree,
                                           const std::vector<Permutation>& gens) {
  PermGroup acc(degree, {});
  std::vector<Permutation> kept;
  for (const auto& p : gens) {
    if (acc.contains(p)) continue;
    Permutation one[] = {p};
    acc = acc.with_generators(one);
    kept.push_back(p);
  }
  return kept;
}

std::string to_string(StabCertificate::Verdict v) {
  switch (v) {
    case StabCertificate::Verdict::Equal: return "equal";
    case StabCertificate::Verdict::Unequal: return "unequal";
    case StabCertificate::Verdict::NotInGroup: return "not_in_group";
  }
  return "unequal";
}

namespace {

Permutation embed_at(const Permutation& p, std::size_t vertex, std::size_t count) {
  const std::size_t block = p.degree();
  std::vector<Point> img(count * block);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<Point>(i);
  for (std::size_t r = 0; r < block; ++r) {
    img[vertex * block + r] = static_cast<Point>(vertex * block + p[static_cast<Point>(r)]);
  }
  return Permutation(std::move(img));
}

// Fills verdict/witness for the comparison of two subgroups of one ambient.
void compare_sides(StabCertificate& cert, const PermGroup& lhs, const PermGroup& rhs) {
  cert.lhs_order = lhs.order();
  cert.rhs_order = rhs.order();
  for (const auto& x : rhs.generators()) {
    if (!lhs.contains(x)) {
      cert.verdict = StabCertificate::Verdict::Unequal;
      cert.witness = x;
      cert.witness_note = "right-hand generator outside the left-hand side";
      return;
    }
  }
  for (const auto& x : lhs.generators()) {
    if (!rhs.contains(x)) {
      cert.verdict = StabCertificate::Verdict::Unequal;
      cert.witness = x;
      cert.witness_note = "left-hand generator outside the right-hand side";
      return;
    }
  }
  cert.verdict = StabCertificate::Verdict::Equal;
}

}  // namespace

Outcome<StabCertificate> verify_branching_lemma(const SelfSimilarGroup& g, int m, int n,
                                                int level, std::size_t length_budget) {
  if (m < 0 || n < 0 || level < m + n) throw Error("branching lemma needs level >= m + n");
  StabCertificate cert;
  cert.lemma = "branching-lemma";
  cert.m = m;
  cert.n = n;
  cert.level = level;

  auto q = level_quotient(g, level);
  auto lhs = stab_image(q, m + n);

  SchreierWords sw;
  std::size_t budget = length_budget;
  for (int attempt = 0; attempt < 3; ++attempt, budget *= 4) {
    sw = schreier_level_stabilizer_words(g, m, budget);
    if (sw.complete) break;
  }
  if (!sw.complete) {
    return Inconclusive{"schreier", "Schreier words exceed length budget " +
                                        std::to_string(budget / 4)};
  }
  const std::size_t count = leaf_count(g.degree(), n);
  auto images = word_images(g, sw.words, level - n);
  std::vector<Permutation> rhs_gens;
  for (std::size_t v = 0; v < count; ++v) {
    for (std::size_t w = 0; w < images.size(); ++w) {
      Permutation p = embed_at(images[w], v, count);
      if (p.is_identity()) continue;
      if (!q.perm_group->contains(p)) {
        cert.verdict = StabCertificate::Verdict::NotInGroup;
        cert.witness = p;
        cert.witness_note = "embedding of " + g.system->format_word(sw.words[w]) + " at vertex " +
                            Vertex::from_index(v, g.degree(), static_cast<std::size_t>(n))
                                .to_string(g.degree()) +
                            " lies outside G_L";
        cert.lhs_generators = reduce_generators(q.degree(), lhs.generators());
        cert.lhs_order = lhs.order();
        cert.rhs_generators = {p};
        return cert;
      }
      rhs_gens.push_back(std::move(p));
    }
  }
  PermGroup rhs(q.degree(), reduce_generators(q.degree(), rhs_gens));
  PermGroup lhs_small(q.degree(), reduce_generators(q.degree(), lhs.generators()));
  cert.lhs_generators = lhs_small.generators();
  cert.rhs_generators = rhs.generators();
  compare_sides(cert, lhs_small, rhs);
  return cert;
}

Outcome<StabCertificate> verify_samestabs(const SelfSimilarGroup& g, int n, int m, int level) {
  const int k = n + m;
  if (n < 0 || m < 0 || level < k) throw Error("samestabs needs level >= n + m");
  StabCertificate cert;
  cert.lemma = "samestabs";
  cert.m = m;
  cert.n = n;
  cert.level = level;

  auto q = level_quotient(g, level);
  const std::size_t count = leaf_count(g.degree(), n);
  std::vector<Permutation> pgens;
  for (std::size_t i : g.generators) {
    const Permutation& s = g.system->leaf_perm(i, level - n);
    for (std::size_t v = 0; v < count; ++v) pgens.push_back(embed_at(s, v, count));
  }
  if (n >= 1) {
    for (const auto& r : q_n_generators(g.degree(), n)) pgens.push_back(r.leaf_perm(level));
  }
  auto p = std::make_shared<const PermGroup>(q.degree(), pgens);
  for (const auto& x : q.generator_images) {
    if (!p->contains(x)) {
      cert.verdict = StabCertificate::Verdict::NotInGroup;
      cert.witness = x;
      cert.witness_note = "generator of G_L outside the semidirect product";
      return cert;
    }
  }
  auto blocks = ancestor_map(g.degree(), level, k);
  auto stab_p = kernel_of_refinement(p, blocks);
  auto stab_g = stab_image(q, k);
  PermGroup lhs(q.degree(), reduce_generators(q.degree(), stab_g.generators()));
  PermGroup rhs(q.degree(), reduce_generators(q.degree(), stab_p.generators()));
  cert.lhs_generators = lhs.generators();
  cert.rhs_generators = rhs.generators();
  compare_sides(cert, lhs, rhs);
  return cert;
}

bool recheck(const StabCertificate& cert, const SelfSimilarGroup& g) {
  const std::size_t degree = leaf_count(g.degree(), cert.level);
  PermGroup lhs(degree, cert.lhs_generators);
  PermGroup rhs(degree, cert.rhs_generators);
  if (cert.verdict == StabCertificate::Verdict::NotInGroup) {
    if (!cert.witness) return false;
    auto q = level_quotient(g, cert.level);
    return !q.perm_group->contains(*cert.witness);
  }
  if (lhs.order() != cert.lhs_order || rhs.order() != cert.rhs_order) return false;
  bool same = lhs.same_as(rhs);
  if (cert.verdict == StabCertificate::Verdict::Equal) return same;
  if (!cert.witness) return false;
  return !same && (lhs.contains(*cert.witness) != rhs.contains(*cert.witness));
}

int sigma_signature(const Element& g, int i, int p) {
  if (i < 0) throw Error("negative level");
  auto por = portrait(g, i + 1);
  long long sum = 0;
  for (const auto& label : por.labels.back()) {
    int e = label.sigma_exponent();
    if (e < 0) throw Error("section does not act as a power of sigma");
    sum += e;
  }
  return static_cast<int>(sum % p);
}

namespace {

long long mod_pow(long long b, long long e, long long p) {
  long long r = 1;
  b %= p;
  while (e > 0) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return r;
}

int rank_mod_p(std::vector<std::vector<long long>> rows, long long p) {
  int rank = 0;
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
    std::size_t pivot = static_cast<std::size_t>(rank);
    while (pivot < rows.size() && rows[pivot][c] % p == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[static_cast<std::size_t>(rank)]);
    auto& r = rows[static_cast<std::size_t>(rank)];
    long long inv = mod_pow(r[c], p - 2, p);
    for (auto& x : r) x = x * inv % p;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (k == static_cast<std::size_t>(rank) || rows[k][c] == 0) continue;
      long long f = rows[k][c];
      for (std::size_t j = 0; j < cols; ++j) rows[k][j] = ((rows[k][j] - f * r[j]) % p + p) % p;
    }
    ++rank;
  }
  return rank;
}

}  // namespace

std::vector<int> psi_rank_profile(const std::vector<Element>& generators, int p, int n_max) {
  if (!is_prime(p)) throw Error("psi ranks need a prime alphabet size");
  std::vector<std::vector<long long>> rows(generators.size());
  std::vector<int> ranks;
  for (int n = 0; n <= n_max; ++n) {
    for (std::size_t s = 0; s < generators.size(); ++s) {
      rows[s].push_back(sigma_signature(generators[s], n, p));
    }
    ranks.push_back(rank_mod_p(rows, p));
  }
  return ranks;
}

std::vector<int> psi_rank_profile(const SelfSimilarGroup& g, int n_max) {
  return psi_rank_profile(g.generator_elements(), g.degree(), n_max);
}

namespace {

KLevelCheck check_against(const LevelQuotient& q, int m, const PermGroup& k) {
  KLevelCheck out;
  out.m = m;
  out.level = q.level;
  auto stab = stab_image(q, m);
  for (const auto& x : stab.generators()) {
    if (!k.contains(x)) {
      out.holds = false;
      out.witness = x;
      return out;
    }
  }
  out.holds = true;
  return out;
}

}  // namespace

KLevelCheck check_stab_in_k(const LevelQuotient& q, int m) {
  auto k = branching_subgroup_image(q);
  if (!k) throw Error(q.group.name + " has no branching subgroup data");
  return check_against(q, m, k->group());
}

std::vector<KLevelCheck> find_stab_in_K_level(const SelfSimilarGroup& g,
                                              const std::vector<int>& m_candidates, int level) {
  auto q = level_quotient(g, level);
  auto k = branching_subgroup_image(q);
  if (!k) throw Error(g.name + " has no branching subgroup data");
  std::vector<KLevelCheck> out;
  for (int m : m_candidates) {
    if (m < 0 || m > level) throw Error("candidate m outside 0..level");
    out.push_back(check_against(q, m, k->group()));
  }
  return out;
}

StabLevelDiscovery discover_stab_level(const SelfSimilarGroup& g, int max_m, int extra) {
  StabLevelDiscovery out;
  std::map<int, std::pair<LevelQuotient, PermGroup>> cache;
  auto at = [&](int level) -> std::pair<LevelQuotient, PermGroup>& {
    auto it = cache.find(level);
    if (it == cache.end()) {
      auto q = level_quotient(g, level);
      auto k = branching_subgroup_image(q);
      if (!k) throw Error(g.name + " has no branching subgroup data");
      PermGroup kg = k->group();
      it = cache.emplace(level, std::make_pair(std::move(q), std::move(kg))).first;
    }
    return it->second;
  };
  for (int m = 1; m <= max_m; ++m) {
    bool all = true;
    for (int level = m + 1; level <= m + extra; ++level) {
      auto& [q, k] = at(level);
      auto c = check_against(q, m, k);
      out.checks.push_back(c);
      if (!c.holds) {
        all = false;
        break;
      }
    }
    if (all) {
      out.m = m;
      return out;
    }
  }
  return out;
}

bool is_transitive(std::span<const Permutation> gens, std::size_t degree) {
  std::vector<bool> seen(degree, false);
  std::vector<Point> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    Point x = stack.back();
    stack.pop_back();
    for (const auto& g : gens) {
      Point y = g[x];
      if (!seen[y]) {
        seen[y] = true;
        ++count;
        stack.push_back(y);
      }
    }
  }
  return count == degree;
}

Transitivity level_transitivity(const SelfSimilarGroup& g, int n_max) {
  Transitivity out;
  for (int n = 1; n <= n_max; ++n) {
    std::vector<Permutation> gens;
    for (std::size_t i : g.generators) gens.push_back(g.system->leaf_perm(i, n));
    if (!is_transitive(gens, leaf_count(g.degree(), n))) {
      out.pass = false;
      out.first_failure = n;
      return out;
    }
  }
  return out;
}

}  // namespace ssg

namespace ssg {

BranchMembership::BranchMembership(SelfSimilarGroup g, int m, std::size_t chain_degree,
                                   std::size_t table_limit)
    : group_(std::move(g)), m_(m) {
  if (m < 0) throw Error("negative level");
  const int top = m + 1;
  base_ = top;
  while (leaf_count(group_.degree(), base_ + 1) <= chain_degree) ++base_;
  const std::size_t degree = leaf_count(group_.degree(), top);
  std::vector<Permutation> elems{Permutation::identity(degree)};
  table_.emplace(elems[0], 0);
  parent_.emplace_back(0, 0);
  for (std::size_t i = 0; i < elems.size(); ++i) {
    for (std::size_t j = 0; j < group_.generators.size(); ++j) {
      Permutation next = group_.system->leaf_perm(group_.generators[j], top) * elems[i];
      if (table_.contains(next)) continue;
      if (elems.size() >= table_limit) throw Error("level image too large for the lift table");
      table_.emplace(next, elems.size());
      parent_.emplace_back(i, j);
      elems.push_back(std::move(next));
    }
  }
}

const PermGroup& BranchMembership::chain(int level) {
  auto it = chains_.find(level);
  if (it == chains_.end()) it = chains_.emplace(level, level_quotient(group_, level)).first;
  return *it->second.perm_group;
}

const Permutation& BranchMembership::lift(std::size_t idx, int level) {
  auto& cache = lifts_[level];
  if (auto it = cache.find(idx); it != cache.end()) return it->second;
  Permutation p = idx == 0 ? Permutation::identity(leaf_count(group_.degree(), level))
                           : group_.system->leaf_perm(group_.generators[parent_[idx].second], level) *
                                 lift(parent_[idx].first, level);
  return lifts_[level].emplace(idx, std::move(p)).first->second;
}

bool BranchMembership::contains(const Permutation& x, int level) {
  const int d = group_.degree();
  if (x.degree() != leaf_count(d, level)) throw Error("permutation degree does not match level");
  if (level <= base_) return chain(level).contains(x);
  const std::size_t block = leaf_count(d, level - m_ - 1);
  const std::size_t top = leaf_count(d, m_ + 1);
  std::vector<Point> proj(top);
  for (std::size_t i = 0; i < top; ++i) proj[i] = static_cast<Point>(x[static_cast<Point>(i * block)] / block);
  auto it = table_.find(Permutation(std::move(proj)));
  if (it == table_.end()) return false;
  const Permutation y = lift(it->second, level).inverse() * x;
  const std::size_t sub = leaf_count(d, level - 1);
  for (int i = 0; i < d; ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * sub;
    std::vector<Point> sec(sub);
    for (std::size_t j = 0; j < sub; ++j) sec[j] = static_cast<Point>(y[static_cast<Point>(off + j)] - off);
    if (!contains(Permutation(std::move(sec)), level - 1)) return false;
  }
  return true;
}

}  // namespace ssg

namespace ssg {

std::optional<std::size_t> closure_order(std::size_t degree, const std::vector<Permutation>& gens,
                                         std::size_t limit) {
  std::unordered_set<Permutation, PermutationHash> seen;
  std::vector<Permutation> queue{Permutation::identity(degree)};
  seen.insert(queue.front());
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (const auto& g : gens) {
      Permutation q = g * queue[head];
      if (!seen.insert(q).second) continue;
      if (seen.size() > limit) return std::nullopt;
      queue.push_back(std::move(q));
    }
  }
  return seen.size();
}

std::vector<OrderRow> order_table(const SelfSimilarGroup& g, const std::vector<int>& levels,
                                  std::size_t closure_limit) {
  std::vector<OrderRow> rows;
  for (int n : levels) {
    auto q = level_quotient(g, n);
    OrderRow r;
    r.level = n;
    r.chain_order = q.order();
    if (r.chain_order <= closure_limit) {
      r.closure_order = closure_order(q.degree(), q.generator_images, closure_limit);
      r.agree = r.closure_order && BigInt(*r.closure_order) == r.chain_order;
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ssg
