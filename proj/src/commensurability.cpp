#include "ssg/commensurability.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ssg/errors.hpp"

namespace ssg {

namespace {

bool is_prime_big(const BigInt& n) {
  if (n < 2 || n > BigInt(1) << 40) return false;
  return is_prime(static_cast<long long>(n));
}

void fill_orders(CommCertificate& c, const PermGroup& a, const PermGroup& b,
                 const PermGroup& i) {
  c.degree = a.degree();
  c.a_generators = a.generators();
  c.b_generators = b.generators();
  c.intersection_generators = i.generators();
  c.a_order = a.order();
  c.b_order = b.order();
  c.intersection_order = i.order();
  c.index_a = a.order() / i.order();
  c.index_b = b.order() / i.order();
  c.com_index = c.index_a * c.index_b;
}

std::vector<Permutation> images_at(const RecursionSystem& sys, const std::vector<Word>& words,
                                   int level) {
  std::vector<Permutation> out;
  out.reserve(words.size());
  for (const Word& w : words) out.push_back(sys.leaf_perm(w, level));
  return out;
}

}  // namespace

std::string to_string(CommCertificate::Argument a) {
  switch (a) {
    case CommCertificate::Argument::Contained: return "contained";
    case CommCertificate::Argument::PrimeIndex: return "prime-index";
    case CommCertificate::Argument::Search: return "search";
  }
  return "?";
}

Outcome<CommCertificate> com_index(const SubgroupHandle& a, const SubgroupHandle& b, int level,
                                   const SearchOptions& opts) {
  auto res = intersection(a, b, opts);
  if (auto* inc = std::get_if<Inconclusive>(&res)) return *inc;
  const auto& i = std::get<SubgroupHandle>(res);
  CommCertificate c;
  c.level = level;
  fill_orders(c, a.group(), b.group(), i.group());
  bool contained = b.group().contains(a.group()) || a.group().contains(b.group());
  c.argument = contained ? CommCertificate::Argument::Contained : CommCertificate::Argument::Search;
  return c;
}

CommCertificate com_index_over(const PermGroup& a, const PermGroup& b, const PermGroup& floor,
                               int level) {
  if (!a.contains(floor) || !b.contains(floor)) {
    throw Error("com_index_over: floor is not contained in both groups");
  }
  if (!is_prime_big(b.order() / floor.order())) {
    throw Error("com_index_over: floor does not have prime index");
  }
  CommCertificate c;
  c.level = level;
  std::optional<Permutation> outside;
  for (const auto& g : b.generators()) {
    if (!a.contains(g)) {
      outside = g;
      break;
    }
  }
  if (!outside) {
    fill_orders(c, a, b, b);
    c.argument = CommCertificate::Argument::Contained;
  } else {
    fill_orders(c, a, b, floor);
    c.argument = CommCertificate::Argument::PrimeIndex;
    c.witness = outside;
  }
  return c;
}

bool recheck(const CommCertificate& c, const SearchOptions& opts) {
  auto a = std::make_shared<const PermGroup>(c.degree, c.a_generators);
  auto b = std::make_shared<const PermGroup>(c.degree, c.b_generators);
  PermGroup i(c.degree, c.intersection_generators);
  if (a->order() != c.a_order || b->order() != c.b_order) return false;
  if (i.order() != c.intersection_order) return false;
  if (!a->contains(i) || !b->contains(i)) return false;
  switch (c.argument) {
    case CommCertificate::Argument::Contained:
      if (!(i.same_as(*a) && b->contains(*a)) && !(i.same_as(*b) && a->contains(*b))) {
        return false;
      }
      break;
    case CommCertificate::Argument::PrimeIndex:
      if (!is_prime_big(b->order() / i.order())) return false;
      if (!c.witness || !b->contains(*c.witness) || a->contains(*c.witness)) return false;
      break;
    case CommCertificate::Argument::Search: {
      PermGroup both(c.degree, c.a_generators);
      both = both.with_generators(c.b_generators);
      auto amb = std::make_shared<const PermGroup>(std::move(both));
      auto res = intersection(SubgroupHandle(amb, *a), SubgroupHandle(amb, *b), opts);
      if (is_inconclusive(res)) return false;
      if (!std::get<SubgroupHandle>(res).group().same_as(i)) return false;
      break;
    }
  }
  return c.index_a == c.a_order / c.intersection_order &&
         c.index_b == c.b_order / c.intersection_order && c.com_index == c.index_a * c.index_b;
}

const LevelQuotient& QuotientCache::at(int level) {
  auto it = cache_.find(level);
  if (it == cache_.end()) it = cache_.emplace(level, level_quotient(group_, level)).first;
  return it->second;
}

namespace {

// Level-`level` image of x_star(tuple block, r), where the block covers the
// d^r vertices below one vertex.
Permutation block_section_perm(const RecursionSystem& sys, const std::vector<Word>& block, int r,
                               int e) {
  return x_star_leaf_perm(images_at(sys, block, e), sys.degree(), r);
}

struct SectionWitness {
  Vertex vertex;
  int section_level = 0;
  int e = 0;
};

std::optional<SectionWitness> section_outside(QuotientCache& cache, const std::vector<Word>& tuple,
                                              int n, const GammaSearchOptions& opts) {
  const auto& g = cache.group();
  const int d = g.degree();
  for (int r = 1; r <= n; ++r) {
    const std::size_t width = leaf_count(d, r);
    const std::size_t vertices = tuple.size() / width;
    for (int e = 1; e <= opts.extra_levels; ++e) {
      if (leaf_count(d, r + e) > opts.max_degree) break;
      const PermGroup& gl = *cache.at(r + e).perm_group;
      for (std::size_t v = 0; v < vertices; ++v) {
        std::vector<Word> block(tuple.begin() + static_cast<std::ptrdiff_t>(v * width),
                                tuple.begin() + static_cast<std::ptrdiff_t>((v + 1) * width));
        if (std::all_of(block.begin(), block.end(), [](const Word& w) { return w.empty(); })) {
          continue;
        }
        if (!gl.contains(block_section_perm(*g.system, block, r, e))) {
          return SectionWitness{Vertex::from_index(v, d, static_cast<std::size_t>(n - r)), r + e, e};
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

namespace {

std::vector<Word> tuple_letters(const SelfSimilarGroup& g) {
  std::vector<Word> letters;
  for (std::size_t i : g.generators) {
    letters.emplace_back(std::vector<Letter>{letter_of(i)});
    letters.emplace_back(std::vector<Letter>{letter_of(i, true)});
  }
  return letters;
}

struct Enumeration {
  std::size_t tried = 0;
  bool stopped = false;
};

// Visits tuples in search order until `visit` returns true or the budget is
// spent: fewer non-identity entries first, then lexicographic with identity
// as the largest symbol.
Enumeration enumerate_tuples(std::size_t positions, const std::vector<Word>& letters,
                             std::size_t budget,
                             const std::function<bool(const std::vector<Word>&)>& visit) {
  Enumeration out;
  bool exhausted = false;
  std::vector<Word> tuple(positions);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t weight) {
    if (out.stopped || exhausted) return;
    if (weight == 0) {
      if (out.tried >= budget) {
        exhausted = true;
        return;
      }
      ++out.tried;
      out.stopped = visit(tuple);
      return;
    }
    if (positions - pos < weight) return;
    for (const Word& l : letters) {
      tuple[pos] = l;
      rec(pos + 1, weight - 1);
      if (out.stopped || exhausted) break;
    }
    tuple[pos] = Word{};
    if (!out.stopped && !exhausted) rec(pos + 1, weight);
  };
  for (std::size_t weight = 1; weight <= positions && !out.stopped && !exhausted; ++weight) {
    rec(0, weight);
  }
  return out;
}

void attach_element(GammaCandidate& c, const SelfSimilarGroup& g) {
  std::vector<Element> comps;
  for (const Word& w : c.tuple) comps.emplace_back(g.system, w);
  c.element = x_star(comps, c.depth);
}

}  // namespace

Outcome<GammaCandidate> find_gamma_outside(QuotientCache& cache, int n,
                                           const GammaSearchOptions& opts) {
  if (n < 1) throw Error("find_gamma_outside: depth must be at least 1");
  const auto& g = cache.group();
  std::optional<GammaCandidate> found;
  auto en = enumerate_tuples(leaf_count(g.degree(), n), tuple_letters(g), opts.budget,
                             [&](const std::vector<Word>& tuple) {
                               auto w = section_outside(cache, tuple, n, opts);
                               if (!w) return false;
                               GammaCandidate c;
                               c.tuple = tuple;
                               c.depth = n;
                               c.vertex = w->vertex;
                               c.section_level = w->section_level;
                               c.level = n + w->e;
                               found = std::move(c);
                               return true;
                             });
  if (!found) {
    return Inconclusive{"find_gamma_outside", "no certified tuple among " +
                                                  std::to_string(en.tried) +
                                                  " candidates at depth " + std::to_string(n)};
  }
  found->tried = en.tried;
  attach_element(*found, g);
  return *found;
}

bool recheck(const GammaCandidate& c, QuotientCache& cache) {
  const auto& g = cache.group();
  const int d = g.degree();
  const int r = c.depth - static_cast<int>(c.vertex.level());
  const int e = c.section_level - r;
  if (r < 1 || e < 1) return false;
  const std::size_t width = leaf_count(d, r);
  const std::size_t v = c.vertex.index(d);
  if ((v + 1) * width > c.tuple.size()) return false;
  std::vector<Word> block(c.tuple.begin() + static_cast<std::ptrdiff_t>(v * width),
                          c.tuple.begin() + static_cast<std::ptrdiff_t>((v + 1) * width));
  Permutation p = block_section_perm(*g.system, block, r, e);
  if (c.element.section(c.vertex).leaf_perm(c.section_level) != p) return false;
  return !cache.at(c.section_level).perm_group->contains(p);
}

Permutation StraightLineProgram::evaluate(const std::vector<Permutation>& input_perms) const {
  if (input_perms.size() != inputs) throw Error("program: wrong number of inputs");
  if (lines.empty()) throw Error("program: no lines");
  std::vector<Permutation> values;
  values.reserve(lines.size());
  const std::size_t degree = input_perms.empty() ? 1 : input_perms.front().degree();
  for (const auto& line : lines) {
    Permutation acc = Permutation::identity(degree);
    for (const auto& f : line) {
      if (f.ref >= inputs + values.size()) throw Error("program: forward reference");
      const Permutation& v = f.ref < inputs ? input_perms[f.ref] : values[f.ref - inputs];
      acc = acc * (f.exponent == 1 ? v : v.pow(f.exponent));
    }
    values.push_back(std::move(acc));
  }
  return values.back();
}

BigInt StraightLineProgram::expanded_length() const {
  std::vector<BigInt> len;
  for (const auto& line : lines) {
    BigInt total = 0;
    for (const auto& f : line) {
      BigInt l = f.ref < inputs ? BigInt(1) : len.at(f.ref - inputs);
      total += l * BigInt(f.exponent < 0 ? -f.exponent : f.exponent);
    }
    len.push_back(total);
  }
  return len.empty() ? BigInt(0) : len.back();
}

std::string StraightLineProgram::format(const std::vector<std::string>& input_names) const {
  std::string out;
  for (std::size_t j = 0; j < lines.size(); ++j) {
    if (j > 0) out += "; ";
    out += "y" + std::to_string(j + 1) + " =";
    if (lines[j].empty()) out += " e";
    for (const auto& f : lines[j]) {
      out += ' ';
      out += f.ref < inputs ? input_names.at(f.ref) : "y" + std::to_string(f.ref - inputs + 1);
      if (f.exponent != 1) out += "^" + std::to_string(f.exponent);
    }
  }
  return out;
}

std::string to_string(TowerEntry::Method m) {
  switch (m) {
    case TowerEntry::Method::Uniform:
      return "uniform";
    case TowerEntry::Method::Transversal:
      return "transversal";
    case TowerEntry::Method::Descent:
      return "descent";
  }
  return "";
}

Permutation TowerEntry::gamma_perm(const SelfSimilarGroup& g, int level) const {
  const int d = g.degree();
  if (level <= depth) return Permutation::identity(leaf_count(d, level));
  std::vector<Permutation> comps;
  if (uniform) {
    comps.assign(leaf_count(d, depth), g.system->leaf_perm(*uniform, level - depth));
  } else {
    comps = images_at(*g.system, tuple, level - depth);
  }
  return x_star_leaf_perm(comps, d, depth);
}

bool TowerEntry::passed() const {
  if (!consistent || index_checks.empty()) return false;
  for (const auto& ic : index_checks) {
    if (ic.index == 0 || ic.com_index != expected_com_index) return false;
    if (ic.certificate && ic.certificate->com_index != expected_com_index) return false;
  }
  if (static_cast<int>(distinctness.size()) != index - 1) return false;
  return std::all_of(distinctness.begin(), distinctness.end(),
                     [](const DistinctnessWitness& w) { return w.outside; });
}

namespace {

using Factor = StraightLineProgram::Factor;

struct CosetSearch {
  std::optional<std::vector<Factor>> factors;
  std::size_t explored = 0;
  std::size_t position = 0;
};

bool normalizes_with_pth_power_inside(const PermGroup& s, const Permutation& q, unsigned p) {
  if (!s.contains(q.pow(p))) return false;
  Permutation qi = q.inverse();
  for (const auto& g : s.generators()) {
    if (!s.contains(q * g * qi)) return false;
  }
  return true;
}

// Breadth-first transversal of S in <S, gens>, by left multiplication; the
// first representative r with r^p in S and r normalizing S is returned.
CosetSearch first_index_p_extension(const PermGroup& s, const std::vector<Permutation>& gens,
                                    unsigned p, std::size_t budget) {
  CosetSearch out;
  std::unordered_map<Permutation, std::size_t, PermutationHash> index;
  std::vector<Permutation> reps;
  std::vector<std::vector<Factor>> words;
  Permutation one = Permutation::identity(s.degree());
  index.emplace(canonical_coset_rep(s, one), 0);
  reps.push_back(one);
  words.emplace_back();
  for (std::size_t head = 0; head < reps.size(); ++head) {
    for (std::size_t k = 0; k < gens.size(); ++k) {
      Permutation q = gens[k] * reps[head];
      Permutation key = canonical_coset_rep(s, q);
      if (index.count(key) != 0) continue;
      if (reps.size() >= budget) {
        out.explored = reps.size();
        return out;
      }
      index.emplace(std::move(key), reps.size());
      std::vector<Factor> w{{k, 1}};
      w.insert(w.end(), words[head].begin(), words[head].end());
      reps.push_back(q);
      words.push_back(w);
      if (normalizes_with_pth_power_inside(s, q, p)) {
        out.factors = std::move(w);
        out.position = reps.size() - 1;
        out.explored = reps.size();
        return out;
      }
    }
  }
  out.explored = reps.size();
  return out;
}

// Starting from y = gamma, replace y by [y, s] = y^-1 s^-1 y s while some
// generator s of S gives a commutator outside S; the final y normalizes S.
// Then y is replaced by its largest p-power outside S.
StraightLineProgram commutator_descent(const PermGroup& s, const std::vector<Permutation>& gens,
                                       std::size_t gamma_input, unsigned p) {
  StraightLineProgram prog;
  prog.inputs = gens.size();
  Permutation y = gens[gamma_input];
  prog.lines.push_back({{gamma_input, 1}});
  const std::size_t s_count = gens.size() - 1;
  for (;;) {
    bool moved = false;
    for (std::size_t k = 0; k < s_count; ++k) {
      const Permutation& g = gens[k];
      Permutation c = y.inverse() * g.inverse() * y * g;
      if (s.contains(c)) continue;
      std::size_t cur = prog.inputs + prog.lines.size() - 1;
      prog.lines.push_back({{cur, -1}, {k, -1}, {cur, 1}, {k, 1}});
      y = std::move(c);
      moved = true;
      break;
    }
    if (!moved) break;
  }
  for (;;) {
    Permutation yp = y.pow(p);
    if (s.contains(yp)) break;
    std::size_t cur = prog.inputs + prog.lines.size() - 1;
    prog.lines.push_back({{cur, static_cast<long long>(p)}});
    y = std::move(yp);
  }
  return prog;
}

// Schreier generators of the preimage of `sub` (a subgroup of G_N) in G.
std::vector<Word> preimage_words(const SelfSimilarGroup& g, const PermGroup& sub, int level) {
  std::vector<Permutation> gens;
  std::vector<Word> gwords;
  for (std::size_t i : g.generators) {
    gens.push_back(g.system->leaf_perm(i, level));
    gwords.emplace_back(std::vector<Letter>{letter_of(i)});
  }
  std::unordered_map<Permutation, std::size_t, PermutationHash> index;
  std::vector<Permutation> reps{Permutation::identity(sub.degree())};
  std::vector<Word> words(1);
  index.emplace(canonical_coset_rep(sub, reps[0]), 0);
  for (std::size_t head = 0; head < reps.size(); ++head) {
    for (std::size_t k = 0; k < gens.size(); ++k) {
      Permutation q = gens[k] * reps[head];
      Permutation key = canonical_coset_rep(sub, q);
      if (index.count(key) != 0) continue;
      index.emplace(std::move(key), reps.size());
      reps.push_back(std::move(q));
      words.push_back(gwords[k] * words[head]);
    }
  }
  std::vector<Word> out;
  std::unordered_set<Word, WordHash> seen;
  for (std::size_t c = 0; c < reps.size(); ++c) {
    for (std::size_t k = 0; k < gens.size(); ++k) {
      std::size_t t = index.at(canonical_coset_rep(sub, gens[k] * reps[c]));
      Word w = (words[t].inverse() * gwords[k] * words[c]).reduced();
      if (w.empty()) continue;
      if (seen.insert(w).second) out.push_back(std::move(w));
    }
  }
  return out;
}

// Membership in the level images of G and H; H is G for k = 1 and the
// preimage of a subgroup of G_N otherwise.
struct TowerContext {
  const SelfSimilarGroup& g;
  const Tower& t;
  BranchMembership gamma_member;
  QuotientCache cache;
  std::optional<PermGroup> h_base;
  std::map<int, std::vector<Permutation>> h_gens;
  std::map<int, std::shared_ptr<const PermGroup>> h_chains;

  TowerContext(const SelfSimilarGroup& grp, const Tower& tower, const PermGroup* base)
      : g(grp), t(tower), gamma_member(grp, tower.stab_level, tower.chain_degree), cache(grp) {
    if (base) h_base = *base;
  }

  std::size_t degree(int level) const { return leaf_count(g.degree(), level); }
  bool small(int level) const { return degree(level) <= t.chain_degree; }

  const std::vector<Permutation>& h_generators(int level) {
    auto it = h_gens.find(level);
    if (it == h_gens.end()) it = h_gens.emplace(level, images_at(*g.system, t.h_words, level)).first;
    return it->second;
  }

  std::shared_ptr<const PermGroup> h_chain(int level) {
    if (t.k == 1) return cache.at(level).perm_group;
    auto it = h_chains.find(level);
    if (it == h_chains.end()) {
      auto grp = std::make_shared<const PermGroup>(degree(level), h_generators(level));
      it = h_chains.emplace(level, std::move(grp)).first;
    }
    return it->second;
  }

  bool in_gamma(const Permutation& x, int level) { return gamma_member.contains(x, level); }

  bool in_h(const Permutation& x, int level) {
    if (t.k == 1) return in_gamma(x, level);
    if (level < t.base_level) return h_chain(level)->contains(x);
    if (!in_gamma(x, level)) return false;
    const auto anc = ancestor_map(g.degree(), level, t.base_level);
    std::vector<Point> img(degree(t.base_level));
    for (std::size_t leaf = 0; leaf < x.degree(); ++leaf) {
      img[anc[leaf]] = static_cast<Point>(anc[x[static_cast<Point>(leaf)]]);
    }
    return h_base->contains(Permutation(std::move(img)));
  }

  std::vector<Permutation> inputs(const TowerEntry& e, int level) {
    std::vector<Permutation> in = h_generators(level);
    in.push_back(e.gamma_perm(g, level));
    return in;
  }

  Permutation h_perm(const TowerEntry& e, int level) { return e.h.evaluate(inputs(e, level)); }

  // h outside H, h normalizing H and h^p in H, at one level.
  LevelIndexCheck index_check(const Permutation& h, int level) {
    LevelIndexCheck ic;
    ic.level = level;
    ic.outside = !in_h(h, level);
    ic.power_inside = in_h(h.pow(t.p), level);
    ic.normalizes = true;
    const Permutation hi = h.inverse();
    for (const auto& s : h_generators(level)) {
      if (!in_h(h * s * hi, level)) {
        ic.normalizes = false;
        break;
      }
    }
    ic.h_in_gamma = in_gamma(h, level);
    if (ic.outside && ic.normalizes && ic.power_inside) {
      ic.index = t.p;
      // [G : G n H~][H~ : G n H~], with G n H~ = H~ when h lies in G and H otherwise.
      ic.com_index = ic.h_in_gamma ? BigInt(t.h_index / t.p) : BigInt(t.h_index * t.p);
    }
    if (small(level)) {
      const auto hl = h_chain(level);
      Permutation hp[] = {h};
      PermGroup ext = hl->with_generators(hp);
      if (ext.order() / hl->order() == t.p) {
        ic.certificate = com_index_over(*cache.at(level).perm_group, ext, *hl, level);
      }
    }
    return ic;
  }

  // x lies in <H, h> at a level where h normalizes H with index p.
  bool in_extension(const Permutation& x, const Permutation& h, int level) {
    Permutation y = x;
    const Permutation hi = h.inverse();
    for (unsigned a = 0; a < t.p; ++a) {
      if (in_h(y, level)) return true;
      y = hi * y;
    }
    return false;
  }
};

// Fills n, the index checks, consistency and distinctness of `e`. Returns
// false when h~ lies in H up to the working level.
bool evaluate_entry(TowerEntry& e, TowerContext& ctx, const std::vector<TowerEntry>& earlier) {
  e.n = 0;
  e.index_checks.clear();
  e.distinctness.clear();
  for (int level = e.depth + 1; level <= e.working_level; ++level) {
    if (!ctx.in_h(ctx.h_perm(e, level), level)) {
      e.n = level;
      break;
    }
  }
  if (e.n == 0) return false;
  e.consistent = ctx.in_h(ctx.h_perm(e, e.depth), e.depth);
  if (e.previous_n >= 1) {
    e.consistent = e.consistent && ctx.in_h(ctx.h_perm(e, e.previous_n), e.previous_n);
  }
  for (int level = e.n; level <= e.working_level; ++level) {
    e.index_checks.push_back(ctx.index_check(ctx.h_perm(e, level), level));
  }
  const Permutation h_n = ctx.h_perm(e, e.n);
  for (const auto& prev : earlier) {
    DistinctnessWitness w;
    w.against = prev.index;
    w.level = e.n;
    w.outside = !ctx.in_extension(ctx.h_perm(prev, e.n), h_n, e.n);
    e.distinctness.push_back(w);
  }
  return true;
}

// Reduced words over the generators and their inverses, by length and then
// lexicographically with letters ordered g1 < g1^-1 < g2 < ...
std::vector<Word> short_words(const SelfSimilarGroup& g, std::size_t max_length) {
  const auto letters = tuple_letters(g);
  std::vector<Word> out;
  std::vector<Word> layer{Word{}};
  for (std::size_t len = 1; len <= max_length; ++len) {
    std::vector<Word> next;
    for (const Word& w : layer) {
      for (const Word& l : letters) {
        if (!w.empty() && w.letters.back() == -l.letters.front()) continue;
        Word x = w * l;
        next.push_back(x);
        out.push_back(std::move(x));
      }
    }
    layer = std::move(next);
  }
  return out;
}

StraightLineProgram gamma_program(std::size_t h_inputs) {
  StraightLineProgram prog;
  prog.inputs = h_inputs + 1;
  prog.lines.push_back({{h_inputs, 1}});
  return prog;
}

}  // namespace

std::vector<std::string> tower_input_names(const Tower& t, const SelfSimilarGroup& g) {
  std::vector<std::string> names;
  if (t.k == 1) {
    names = g.generator_names();
  } else {
    for (const Word& w : t.h_words) names.push_back("(" + g.system->format_word(w) + ")");
  }
  names.push_back("gamma");
  return names;
}

std::string format_gamma(const TowerEntry& e, const SelfSimilarGroup& g) {
  auto word = [&](const Word& w) { return w.empty() ? std::string("1") : g.system->format_word(w); };
  std::string out = "X^" + std::to_string(e.depth) + "*(";
  if (e.uniform) {
    return out + word(*e.uniform) + ")^" + std::to_string(leaf_count(g.degree(), e.depth));
  }
  for (std::size_t i = 0; i < e.tuple.size(); ++i) {
    if (i) out += ", ";
    out += word(e.tuple[i]);
  }
  return out + ")";
}

Tower build_extension_tower(const SelfSimilarGroup& g, const TowerOptions& opts) {
  if (opts.k < 1) throw Error("tower: k must be at least 1");
  if (opts.count < 0) throw Error("tower: count must be non-negative");
  const int d = g.degree();
  if (!is_prime(d)) throw Error("tower: alphabet size must be prime");
  Tower tower;
  tower.k = opts.k;
  tower.p = static_cast<unsigned>(d);
  tower.chain_degree = opts.chain_degree;
  if (opts.count == 0) {
    tower.extra_levels = opts.extra_levels.value_or(0);
    return tower;
  }
  auto disc = discover_stab_level(g);
  if (!disc.m) throw Error("tower: no level m with stab(m) inside K was found");
  tower.stab_level = *disc.m;
  tower.extra_levels = opts.extra_levels.value_or(*disc.m);
  if (tower.extra_levels < 1) throw Error("tower: extra levels must be at least 1");

  const BigInt p = d;
  std::optional<PermGroup> h_base;
  // H = G for k = 1; otherwise the preimage of an index p^(k-1) subgroup of
  // G_N for the smallest N where one exists.
  if (opts.k == 1) {
    tower.h_words = g.generator_words();
  } else {
    tower.best_effort = true;
    QuotientCache cache(g);
    BigInt need = 1;
    for (int j = 1; j < opts.k; ++j) need *= p;
    int level = 1;
    while (cache.at(level).order() < need) {
      if (leaf_count(d, level + 1) > opts.chain_degree) {
        tower.diagnostics.push_back("no level within the chain limit has a subgroup of index " +
                                    to_string(need));
        return tower;
      }
      ++level;
    }
    std::shared_ptr<const PermGroup> cur = cache.at(level).perm_group;
    for (int j = 1; j < opts.k; ++j) {
      auto subs = index_p_subgroups(cur, tower.p);
      if (subs.subgroups.empty()) {
        tower.diagnostics.push_back("index-p subgroup chain ended at step " + std::to_string(j));
        return tower;
      }
      cur = std::make_shared<const PermGroup>(subs.subgroups.front().group());
    }
    tower.base_level = level;
    tower.h_words = preimage_words(g, *cur, level);
    tower.h_index = need;
    h_base = *cur;
  }
  TowerContext ctx(g, tower, h_base ? &*h_base : nullptr);
  const auto words = short_words(g, opts.uniform_length);

  int prev_n = tower.base_level;
  for (int i = 1; i <= opts.count; ++i) {
    const int depth = std::max(1, prev_n);
    const int work = depth + tower.extra_levels;
    const std::string tag = "entry " + std::to_string(i) + ": ";
    if (leaf_count(d, work) > opts.max_degree) {
      tower.diagnostics.push_back(tag + "working level " + std::to_string(work) +
                                  " exceeds the degree limit");
      break;
    }
    TowerEntry e;
    e.index = i;
    e.depth = depth;
    e.previous_n = prev_n;
    e.working_level = work;
    e.expected_com_index = tower.h_index * p;

    // Uniform tuples (c, ..., c) first: gamma itself generates an index-p
    // extension when it normalizes H with gamma^p in H.
    bool found = false;
    for (const Word& c : words) {
      ++e.gamma_tried;
      e.uniform = c;
      const Permutation gl = e.gamma_perm(g, work);
      if (ctx.in_gamma(gl, work)) continue;
      LevelIndexCheck ic = ctx.index_check(gl, work);
      if (ic.index == 0) continue;
      e.gamma_level = work;
      e.method = TowerEntry::Method::Uniform;
      e.h = gamma_program(tower.h_words.size());
      found = true;
      break;
    }
    if (!found && ctx.small(work)) {
      e.uniform.reset();
      GammaSearchOptions gopts = opts.gamma;
      gopts.extra_levels = std::min(gopts.extra_levels, tower.extra_levels);
      gopts.max_degree = std::min(gopts.max_degree, opts.chain_degree);
      auto cand = find_gamma_outside(ctx.cache, depth, gopts);
      if (auto* inc = std::get_if<Inconclusive>(&cand)) {
        tower.diagnostics.push_back(tag + inc->stage + ": " + inc->reason);
        break;
      }
      const auto& gc = std::get<GammaCandidate>(cand);
      e.tuple = gc.tuple;
      e.gamma_tried += gc.tried;
      e.gamma_level = gc.level;
      const PermGroup& s = *ctx.h_chain(work);
      const auto gens = ctx.inputs(e, work);
      auto search = first_index_p_extension(s, gens, tower.p, opts.coset_budget);
      e.cosets_explored = search.explored;
      if (search.factors) {
        e.method = TowerEntry::Method::Transversal;
        e.transversal_position = search.position;
        e.h.inputs = gens.size();
        e.h.lines.push_back(*search.factors);
      } else {
        e.method = TowerEntry::Method::Descent;
        e.h = commutator_descent(s, gens, gens.size() - 1, tower.p);
      }
      found = true;
    }
    if (!found) {
      e.uniform.reset();
      tower.diagnostics.push_back(tag + "no uniform gamma of length <= " +
                                  std::to_string(opts.uniform_length) +
                                  " and the working level exceeds the chain limit");
      break;
    }
    if (!evaluate_entry(e, ctx, tower.entries)) {
      tower.diagnostics.push_back(tag + "h lies in H at the working level");
      break;
    }
    prev_n = e.n;
    tower.entries.push_back(std::move(e));
  }
  return tower;
}

TowerReplay recheck(const Tower& t, const SelfSimilarGroup& g) {
  TowerReplay out;
  auto fail = [&](const std::string& what) {
    out.ok = false;
    out.failures.push_back(what);
  };
  std::optional<PermGroup> h_base;
  if (t.k > 1) {
    h_base.emplace(leaf_count(g.degree(), t.base_level),
                   images_at(*g.system, t.h_words, t.base_level));
  }
  if (!t.entries.empty()) {
    auto disc = discover_stab_level(g);
    if (!disc.m || *disc.m != t.stab_level) fail("stab-in-K level differs");
  }
  TowerContext ctx(g, t, h_base ? &*h_base : nullptr);
  std::vector<TowerEntry> done;
  int prev_n = t.base_level;
  for (const auto& stored : t.entries) {
    const std::string tag = "entry " + std::to_string(stored.index) + ": ";
    if (stored.previous_n != prev_n || stored.depth != std::max(1, prev_n) ||
        stored.working_level != stored.depth + t.extra_levels) {
      fail(tag + "levels do not follow the previous entry");
    }
    if (stored.gamma_level <= stored.depth ||
        ctx.in_gamma(stored.gamma_perm(g, stored.gamma_level), stored.gamma_level)) {
      fail(tag + "gamma is not certified outside G");
    }
    TowerEntry e = stored;
    if (!evaluate_entry(e, ctx, done)) {
      fail(tag + "h lies in H at the working level");
    } else {
      if (e.n != stored.n) fail(tag + "n differs");
      if (e.consistent != stored.consistent) fail(tag + "consistency differs");
      if (e.index_checks.size() != stored.index_checks.size()) {
        fail(tag + "index checks differ");
      } else {
        for (std::size_t j = 0; j < e.index_checks.size(); ++j) {
          const auto& a = e.index_checks[j];
          const auto& b = stored.index_checks[j];
          if (a.outside != b.outside || a.normalizes != b.normalizes ||
              a.power_inside != b.power_inside || a.h_in_gamma != b.h_in_gamma ||
              a.index != b.index || a.com_index != b.com_index ||
              a.certificate.has_value() != b.certificate.has_value() ||
              (a.certificate && a.certificate->com_index != b.certificate->com_index)) {
            fail(tag + "index check at level " + std::to_string(b.level) + " differs");
          }
          if (b.certificate && !recheck(*b.certificate)) {
            fail(tag + "certificate at level " + std::to_string(b.level));
          }
        }
      }
      if (e.distinctness.size() != stored.distinctness.size()) {
        fail(tag + "distinctness differs");
      } else {
        for (std::size_t j = 0; j < e.distinctness.size(); ++j) {
          if (e.distinctness[j].outside != stored.distinctness[j].outside) {
            fail(tag + "distinctness against " + std::to_string(stored.distinctness[j].against));
          }
        }
      }
    }
    prev_n = stored.n;
    done.push_back(stored);
  }
  return out;
}

SelfSimilarGroup adding_machine_with_involution() {
  GeneratorSpec tau{"tau", RootPerm({1, 0}), {Word{}, Word({letter_of(0)})}};
  GeneratorSpec u{"u", RootPerm::identity(2),
                  {Word({letter_of(1)}), Word({letter_of(0, true), letter_of(1)})}};
  auto g = custom_group(RecursionSystem::create(2, {tau, u}), "adding_machine_family");
  return g;
}

bool FamilyReport::passed() const {
  if (members.empty() || !pairwise_distinct) return false;
  return std::all_of(members.begin(), members.end(), [](const FamilyMember& m) {
    return m.order_two && m.inverts_tau && m.index_two;
  });
}

FamilyReport adding_machine_family(const std::vector<long long>& xs, int n) {
  if (n < 2) throw Error("adding machine family: level must be at least 2");
  if (n > 20) throw Error("adding machine family: level must be at most 20");
  auto g = adding_machine_with_involution();
  const Permutation t = g.system->leaf_perm(0, n);
  const Permutation u = g.system->leaf_perm(1, n);
  const long long modulus = 1LL << n;
  FamilyReport rep;
  rep.level = n;
  PermGroup a(t.degree(), {t});
  rep.a_order = a.order();
  const Permutation tinv = t.inverse();
  std::vector<PermGroup> groups;
  for (long long x : xs) {
    FamilyMember m;
    m.x = x;
    m.residue = ((x % modulus) + modulus) % modulus;
    m.involution = t.pow(m.residue) * u;
    m.order_two = !m.involution.is_identity() && (m.involution * m.involution).is_identity();
    m.inverts_tau = m.involution * t * m.involution == tinv;
    Permutation gens[] = {m.involution};
    PermGroup grp = a.with_generators(gens);
    m.group_order = grp.order();
    m.index_two = grp.contains(a) && grp.order() == 2 * a.order() && grp.order() == 2 * BigInt(modulus);
    groups.push_back(std::move(grp));
    rep.members.push_back(std::move(m));
  }
  rep.pairwise_distinct = true;
  for (std::size_t i = 0; i < rep.members.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.members.size(); ++j) {
      const auto& a1 = rep.members[i];
      const auto& a2 = rep.members[j];
      if (a1.residue != a2.residue && a1.involution == a2.involution) rep.pairwise_distinct = false;
    }
  }
  rep.subgroups_coincide = std::all_of(groups.begin(), groups.end(),
                                       [&](const PermGroup& h) { return h.same_as(groups.front()); });
  return rep;
}

bool DihedralReport::passed() const {
  if (level == 1) return order == 2 && index_two_subgroups == 1 && delta_involution;
  return delta_involution && inverts_tau && dihedral && index_two_subgroups == 3 &&
         order == BigInt(2) << level;
}

DihedralReport dihedral_checks(int n, const SearchOptions& opts) {
  if (n < 1) throw Error("dihedral: level must be at least 1");
  if (n > 20) throw Error("dihedral: level must be at most 20");
  auto g = builtin("dihedral");
  const Permutation delta = g.system->leaf_perm(0, n);
  const Permutation t = g.system->leaf_perm(1, n);
  DihedralReport rep;
  rep.level = n;
  auto h = std::make_shared<const PermGroup>(delta.degree(), std::vector<Permutation>{delta, t});
  rep.order = h->order();
  rep.delta_involution = !delta.is_identity() && (delta * delta).is_identity();
  rep.inverts_tau = delta * t * delta == t.inverse();
  rep.tau_order = t.order();
  const Permutation second = delta * t;
  const bool second_involution = !second.is_identity() && (second * second).is_identity();
  PermGroup pair(delta.degree(), {delta, second});
  rep.dihedral = n >= 2 && rep.delta_involution && second_involution &&
                 (delta * second).order() == BigInt(1) << n && pair.same_as(*h) &&
                 rep.order == BigInt(2) << n;
  rep.index_two_subgroups = index_p_subgroups(h, 2).subgroups.size();
  if (delta.degree() > opts.normalizer_degree_bound) {
    rep.normalizer_note = "degree above the normalizer bound";
    return rep;
  }
  std::vector<Permutation> rotors;
  for (const auto& e : q_n_generators(2, n)) rotors.push_back(e.leaf_perm(n));
  auto aut = std::make_shared<const PermGroup>(delta.degree(), rotors);
  auto nres = normalizer(aut, *h, opts);
  if (auto* inc = std::get_if<Inconclusive>(&nres)) {
    rep.normalizer_note = inc->stage + ": " + inc->reason;
  } else {
    rep.normalizer_order = std::get<SubgroupHandle>(nres).order();
    rep.normalizer_note = "finite-level normalizer in Aut(T_2(n))";
  }
  return rep;
}

std::optional<Permutation> conjugate_level_transitive(const Element& g, const Element& h, int n) {
  if (g.system()->degree() != h.system()->degree()) throw Error("conjugate: alphabets differ");
  if (n < 0) throw Error("negative level");
  const Permutation pg = g.leaf_perm(n);
  const Permutation ph = h.leaf_perm(n);
  const std::size_t size = pg.degree();
  std::vector<Point> img(size);
  Point x = 0, y = 0;
  for (std::size_t k = 0; k < size; ++k) {
    if (k > 0 && (x == 0 || y == 0)) return std::nullopt;
    img[x] = y;
    x = pg[x];
    y = ph[y];
  }
  if (x != 0 || y != 0) return std::nullopt;
  Permutation c(std::move(img));
  if (c * pg * c.inverse() != ph) throw Error("conjugate: equation check failed");
  portrait_from_leaf_perm(c, g.system()->degree(), n);
  return c;
}

}  // namespace ssg
