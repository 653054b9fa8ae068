#include "ssg/perm_group.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_set>

namespace ssg {

PermGroup::PermGroup(std::size_t degree, std::vector<Permutation> generators,
                     std::vector<Point> initial_base)
    : degree_(degree) {
  for (Point b : initial_base) {
    if (b >= degree) throw Error("base point out of range");
    push_level(b);
  }
  for (auto& g : generators) {
    if (g.degree() != degree) throw Error("generator degree mismatch");
    add_generator(g);
  }
  recompute_order();
}

void PermGroup::push_level(Point base) {
  Level l;
  l.base = base;
  l.pos.assign(degree_, -1);
  l.pos[base] = 0;
  l.orbit.push_back(base);
  l.uinv.push_back(Permutation::identity(degree_));
  l.parent_gen.push_back(-1);
  l.parent.push_back(base);
  l.done.push_back(0);
  levels_.push_back(std::move(l));
}

std::pair<Permutation, std::size_t> PermGroup::strip(const Permutation& p,
                                                     std::size_t start) const {
  Permutation h = p;
  for (std::size_t l = start; l < levels_.size(); ++l) {
    const Level& lv = levels_[l];
    std::int32_t k = lv.pos[h[lv.base]];
    if (k < 0) return {std::move(h), l};
    if (k != 0) h = lv.uinv[static_cast<std::size_t>(k)] * h;
  }
  return {std::move(h), levels_.size()};
}

void PermGroup::extend_orbit(std::size_t level, std::size_t first_new_gen) {
  Level& lv = levels_[level];
  auto try_add = [&](std::size_t k, std::uint32_t gi) {
    Point y = strong_[gi][lv.orbit[k]];
    if (lv.pos[y] >= 0) return;
    lv.pos[y] = static_cast<std::int32_t>(lv.orbit.size());
    lv.orbit.push_back(y);
    lv.uinv.push_back(lv.uinv[k] * strong_inv_[gi]);
    lv.parent_gen.push_back(static_cast<std::int32_t>(gi));
    lv.parent.push_back(lv.orbit[k]);
    lv.done.push_back(0);
  };
  const std::size_t old_size = lv.orbit.size();
  for (std::size_t k = 0; k < old_size; ++k) {
    for (std::size_t j = first_new_gen; j < lv.gens.size(); ++j) try_add(k, lv.gens[j]);
  }
  for (std::size_t k = old_size; k < lv.orbit.size(); ++k) {
    for (std::uint32_t gi : lv.gens) try_add(k, gi);
  }
}

void PermGroup::add_strong(Permutation r, std::size_t from_level,
                           std::size_t to_level) {
  if (to_level == levels_.size()) push_level(r.first_moved_point());
  auto idx = static_cast<std::uint32_t>(strong_.size());
  strong_inv_.push_back(r.inverse());
  strong_.push_back(std::move(r));
  for (std::size_t l = from_level; l <= to_level; ++l) {
    std::size_t first_new = levels_[l].gens.size();
    levels_[l].gens.push_back(idx);
    extend_orbit(l, first_new);
  }
}

void PermGroup::add_generator(const Permutation& g) {
  if (g.is_identity()) return;
  if (std::find(gens_.begin(), gens_.end(), g) != gens_.end()) return;
  auto [r, j] = strip(g);
  gens_.push_back(g);
  if (r.is_identity()) return;
  add_strong(std::move(r), 0, j);
  complete(j);
}

// Holt's SCHREIERSIMS with per-point bookkeeping of processed generators, so
// that restarts only look at new Schreier generators.
void PermGroup::complete(std::size_t start_level) {
  std::size_t i = start_level;
  while (true) {
    bool restarted = false;
    for (std::size_t k = 0; k < levels_[i].orbit.size() && !restarted; ++k) {
      Permutation ux;
      bool have_ux = false;
      while (levels_[i].done[k] < levels_[i].gens.size()) {
        const Level& lv = levels_[i];
        std::uint32_t gi = lv.gens[lv.done[k]];
        levels_[i].done[k]++;
        Point x = lv.orbit[k];
        Point y = strong_[gi][x];
        auto ky = static_cast<std::size_t>(lv.pos[y]);
        if (lv.parent[ky] == x && lv.parent_gen[ky] == static_cast<std::int32_t>(gi)) {
          continue;  // tree edge, Schreier generator is trivial
        }
        if (!have_ux) {
          ux = lv.uinv[k].inverse();
          have_ux = true;
        }
        Permutation h = lv.uinv[ky] * strong_[gi] * ux;
        auto [r, j] = strip(h, i + 1);
        if (!r.is_identity()) {
          add_strong(std::move(r), i + 1, j);
          i = j;
          restarted = true;
          break;
        }
      }
    }
    if (restarted) continue;
    if (i == 0) break;
    --i;
  }
}

void PermGroup::recompute_order() {
  order_ = 1;
  for (const auto& l : levels_) order_ *= l.orbit.size();
}

bool PermGroup::contains(const Permutation& p) const {
  if (p.degree() != degree_) return false;
  auto [r, j] = strip(p);
  return j == levels_.size() && r.is_identity();
}

bool PermGroup::contains(const PermGroup& h) const {
  if (h.degree() != degree_) return false;
  return std::all_of(h.gens_.begin(), h.gens_.end(),
                     [&](const Permutation& p) { return contains(p); });
}

bool PermGroup::same_as(const PermGroup& other) const {
  return degree_ == other.degree_ && order_ == other.order_ && contains(other);
}

PermGroup PermGroup::with_generators(std::span<const Permutation> extra) const {
  PermGroup r = *this;
  for (const auto& g : extra) {
    if (g.degree() != degree_) throw Error("generator degree mismatch");
    r.add_generator(g);
  }
  r.recompute_order();
  return r;
}

std::vector<Point> PermGroup::base() const {
  std::vector<Point> b;
  b.reserve(levels_.size());
  for (const auto& l : levels_) b.push_back(l.base);
  return b;
}

Permutation PermGroup::transversal(std::size_t level, Point x) const {
  const Level& lv = levels_.at(level);
  std::int32_t k = lv.pos.at(x);
  if (k < 0) throw Error("point not in orbit");
  return lv.uinv[static_cast<std::size_t>(k)].inverse();
}

std::vector<Permutation> PermGroup::stabilizer_generators(std::size_t level) const {
  std::vector<Permutation> out;
  if (level >= levels_.size()) return out;
  for (std::uint32_t gi : levels_[level].gens) out.push_back(strong_[gi]);
  return out;
}

std::vector<Permutation> PermGroup::elements(std::size_t limit) const {
  if (order_ > limit) throw Error("group too large to enumerate");
  std::vector<Permutation> out{Permutation::identity(degree_)};
  // g = u_0 u_1 ... u_{k-1}; build from the bottom level up.
  for (std::size_t l = levels_.size(); l-- > 0;) {
    std::vector<Permutation> ts;
    for (Point x : levels_[l].orbit) ts.push_back(transversal(l, x));
    std::vector<Permutation> next;
    next.reserve(out.size() * ts.size());
    for (const auto& t : ts) {
      for (const auto& e : out) next.push_back(t * e);
    }
    out = std::move(next);
  }
  return out;
}

void PermGroup::for_each_element(
    const std::function<void(const Permutation&)>& f) const {
  std::vector<std::vector<Permutation>> trans(levels_.size());
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    for (Point x : levels_[l].orbit) trans[l].push_back(transversal(l, x));
  }
  std::function<void(std::size_t, const Permutation&)> rec =
      [&](std::size_t l, const Permutation& acc) {
        if (l == levels_.size()) {
          f(acc);
          return;
        }
        for (const auto& t : trans[l]) rec(l + 1, acc * t);
      };
  rec(0, Permutation::identity(degree_));
}

BigInt index(const PermGroup& h, const PermGroup& g) {
  if (!g.contains(h)) throw Error("index: subgroup is not contained in group");
  return g.order() / h.order();
}

Permutation canonical_coset_rep(const PermGroup& s, const Permutation& g) {
  Permutation h = g;
  for (std::size_t l = 0; l < s.chain_length(); ++l) {
    Point best = s.base_point(l);
    for (Point x : s.orbit(l)) {
      if (h[x] < h[best]) best = x;
    }
    if (best != s.base_point(l)) h = h * s.transversal(l, best);
  }
  return h;
}

SubgroupHandle::SubgroupHandle(std::shared_ptr<const PermGroup> ambient,
                               PermGroup group)
    : ambient_(std::move(ambient)), group_(std::move(group)) {
  if (!ambient_->contains(group_)) {
    throw Error("subgroup generator outside the ambient group");
  }
}

SubgroupHandle::SubgroupHandle(std::shared_ptr<const PermGroup> ambient,
                               std::vector<Permutation> generators)
    : SubgroupHandle(ambient, PermGroup(ambient->degree(), std::move(generators))) {}

SubgroupHandle SubgroupHandle::whole(std::shared_ptr<const PermGroup> ambient) {
  PermGroup copy = *ambient;
  return SubgroupHandle(std::move(ambient), std::move(copy));
}

PermGroup build_chain(std::size_t degree, std::vector<Permutation> generators) {
  return PermGroup(degree, std::move(generators));
}

namespace {

std::size_t block_count(std::span<const std::uint32_t> block_of) {
  std::uint32_t m = 0;
  for (auto b : block_of) m = std::max(m, b);
  return block_of.empty() ? 0 : static_cast<std::size_t>(m) + 1;
}

// Image of p on blocks; throws when p does not respect the partition.
std::vector<Point> induced_on_blocks(const Permutation& p,
                                     std::span<const std::uint32_t> block_of,
                                     std::size_t nblocks) {
  std::vector<std::int64_t> img(nblocks, -1);
  for (std::size_t x = 0; x < block_of.size(); ++x) {
    std::int64_t target = block_of[p[static_cast<Point>(x)]];
    auto& slot = img[block_of[x]];
    if (slot < 0) {
      slot = target;
    } else if (slot != target) {
      throw Error("invalid block map: generator does not preserve blocks");
    }
  }
  std::vector<Point> out(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) {
    if (img[b] < 0) throw Error("invalid block map: empty block");
    out[b] = static_cast<Point>(img[b]);
  }
  return out;
}

}  // namespace

PermGroup block_action(const PermGroup& g, std::span<const std::uint32_t> block_of) {
  if (block_of.size() != g.degree()) throw Error("invalid block map: wrong length");
  std::size_t nb = block_count(block_of);
  std::vector<Permutation> gens;
  for (const auto& p : g.generators()) {
    gens.emplace_back(induced_on_blocks(p, block_of, nb));
  }
  return PermGroup(nb, std::move(gens));
}

SubgroupHandle kernel_of_refinement(std::shared_ptr<const PermGroup> g,
                                    std::span<const std::uint32_t> block_of) {
  if (block_of.size() != g->degree()) throw Error("invalid block map: wrong length");
  const std::size_t n = g->degree();
  const std::size_t nb = block_count(block_of);
  // Act on points plus blocks and stabilize the block points first.
  std::vector<Permutation> ext;
  for (const auto& p : g->generators()) {
    auto blocks = induced_on_blocks(p, block_of, nb);
    std::vector<Point> img(p.images().begin(), p.images().end());
    for (Point b : blocks) img.push_back(static_cast<Point>(n + b));
    ext.emplace_back(std::move(img));
  }
  std::vector<Point> base(nb);
  std::iota(base.begin(), base.end(), static_cast<Point>(n));
  PermGroup big(n + nb, std::move(ext), std::move(base));
  std::vector<Permutation> kgens;
  for (const auto& p : big.stabilizer_generators(nb)) kgens.push_back(p.restricted(n));
  return SubgroupHandle(std::move(g), PermGroup(n, std::move(kgens)));
}

SubgroupHandle pointwise_stabilizer(std::shared_ptr<const PermGroup> g,
                                    std::span<const Point> points) {
  std::vector<Point> base(points.begin(), points.end());
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end()), base.end());
  PermGroup rebased(g->degree(), g->generators(), base);
  auto gens = rebased.stabilizer_generators(base.size());
  return SubgroupHandle(std::move(g), PermGroup(rebased.degree(), std::move(gens)));
}

Outcome<PermGroup> subgroup_search(
    const PermGroup& g, const std::function<bool(const Permutation&)>& member,
    const std::function<bool(std::size_t, const Permutation&)>& prune,
    std::size_t node_budget) {
  const std::size_t k = g.chain_length();
  const std::vector<Point> base = g.base();
  PermGroup result = PermGroup::trivial(g.degree(), base);
  std::size_t nodes = 0;

  // Forward transversals per level, computed once.
  std::vector<std::vector<Permutation>> trans(k);
  for (std::size_t l = 0; l < k; ++l) {
    for (Point x : g.orbit(l)) trans[l].push_back(g.transversal(l, x));
  }

  bool exhausted = false;
  std::function<bool(std::size_t, const Permutation&, Permutation&)> dfs =
      [&](std::size_t level, const Permutation& partial, Permutation& found) -> bool {
    if (++nodes > node_budget) {
      exhausted = true;
      return false;
    }
    if (level == k) {
      if (member(partial)) {
        found = partial;
        return true;
      }
      return false;
    }
    for (const auto& t : trans[level]) {
      Permutation next = partial * t;
      if (!prune(level, next)) continue;
      if (dfs(level + 1, next, found)) return true;
      if (exhausted) return false;
    }
    return false;
  };

  for (std::size_t i = k; i-- > 0;) {
    for (std::size_t idx = 1; idx < trans[i].size(); ++idx) {
      Point y = g.orbit(i)[idx];
      if (result.orbit_contains(i, y)) continue;
      const Permutation& start = trans[i][idx];
      if (!prune(i, start)) continue;
      Permutation found;
      if (dfs(i + 1, start, found)) {
        Permutation one[] = {found};
        result = result.with_generators(one);
      }
      if (exhausted) {
        return Inconclusive{"subgroup_search", "node budget exhausted"};
      }
    }
  }
  return result;
}

Outcome<SubgroupHandle> intersection(const SubgroupHandle& a, const SubgroupHandle& b,
                                     const SearchOptions& opts) {
  if (a.ambient_ptr() != b.ambient_ptr() && !a.ambient().same_as(b.ambient())) {
    throw Error("intersection: subgroups live in different ambient groups");
  }
  if (b.group().contains(a.group())) return a;
  if (a.group().contains(b.group())) return b;
  const SubgroupHandle& small = a.order() <= b.order() ? a : b;
  const SubgroupHandle& large = a.order() <= b.order() ? b : a;

  if (small.order() <= opts.element_filter_limit) {
    PermGroup acc = PermGroup::trivial(small.group().degree());
    small.group().for_each_element([&](const Permutation& e) {
      if (large.contains(e) && !acc.contains(e)) {
        Permutation one[] = {e};
        acc = acc.with_generators(one);
      }
    });
    return SubgroupHandle(a.ambient_ptr(), std::move(acc));
  }

  // Backtrack over the smaller group; the larger one is rebuilt on the same
  // base so partial base images can be sifted.
  const PermGroup& sg = small.group();
  PermGroup lg(large.group().degree(), large.group().generators(), sg.base());
  auto prune = [&](std::size_t level, const Permutation& partial) {
    Permutation h = partial;
    for (std::size_t l = 0; l <= level; ++l) {
      Point b = lg.base_point(l);
      Point y = h[b];
      if (!lg.orbit_contains(l, y)) return false;
      if (y != b) h = lg.transversal(l, y).inverse() * h;
    }
    return true;
  };
  auto member = [&](const Permutation& p) { return lg.contains(p); };
  auto res = subgroup_search(sg, member, prune, opts.node_budget);
  if (auto* inc = std::get_if<Inconclusive>(&res)) {
    inc->stage = "intersection";
    return *inc;
  }
  return SubgroupHandle(a.ambient_ptr(), std::get<PermGroup>(std::move(res)));
}

namespace {

std::vector<std::uint32_t> orbit_ids(const PermGroup& h, std::vector<std::size_t>& sizes) {
  const std::size_t n = h.degree();
  std::vector<std::uint32_t> id(n, UINT32_MAX);
  sizes.clear();
  for (std::size_t s = 0; s < n; ++s) {
    if (id[s] != UINT32_MAX) continue;
    auto cur = static_cast<std::uint32_t>(sizes.size());
    std::vector<Point> stack{static_cast<Point>(s)};
    id[s] = cur;
    std::size_t count = 0;
    while (!stack.empty()) {
      Point x = stack.back();
      stack.pop_back();
      ++count;
      for (const auto& g : h.generators()) {
        Point y = g[x];
        if (id[y] == UINT32_MAX) {
          id[y] = cur;
          stack.push_back(y);
        }
      }
    }
    sizes.push_back(count);
  }
  return id;
}

}  // namespace

Outcome<SubgroupHandle> normalizer(std::shared_ptr<const PermGroup> g,
                                   const PermGroup& h, const SearchOptions& opts) {
  if (g->degree() > opts.normalizer_degree_bound) {
    return Inconclusive{"normalizer", "degree exceeds configured bound"};
  }
  if (h.is_trivial() || h.contains(*g)) return SubgroupHandle::whole(g);

  std::vector<std::size_t> sizes;
  auto ids = orbit_ids(h, sizes);
  const std::vector<Point> base = g->base();

  // Elements of the normalizer permute H-orbits, preserving their lengths.
  auto prune = [&](std::size_t level, const Permutation& partial) {
    std::map<std::uint32_t, std::uint32_t> fwd, bwd;
    for (std::size_t l = 0; l <= level; ++l) {
      std::uint32_t from = ids[base[l]];
      std::uint32_t to = ids[partial[base[l]]];
      if (sizes[from] != sizes[to]) return false;
      auto [it, ok] = fwd.emplace(from, to);
      if (!ok && it->second != to) return false;
      auto [jt, ok2] = bwd.emplace(to, from);
      if (!ok2 && jt->second != from) return false;
    }
    return true;
  };
  auto member = [&](const Permutation& p) {
    Permutation pinv = p.inverse();
    for (const auto& x : h.generators()) {
      if (!h.contains(p * x * pinv)) return false;
    }
    return true;
  };
  auto res = subgroup_search(*g, member, prune, opts.node_budget);
  if (auto* inc = std::get_if<Inconclusive>(&res)) {
    inc->stage = "normalizer";
    return *inc;
  }
  return SubgroupHandle(std::move(g), std::get<PermGroup>(std::move(res)));
}

PermGroup normal_closure(const PermGroup& g, std::span<const Permutation> gens) {
  PermGroup n(g.degree(), std::vector<Permutation>(gens.begin(), gens.end()));
  std::vector<Permutation> todo(n.generators().begin(), n.generators().end());
  std::vector<Permutation> ginv;
  for (const auto& x : g.generators()) ginv.push_back(x.inverse());
  while (!todo.empty()) {
    Permutation x = std::move(todo.back());
    todo.pop_back();
    for (std::size_t i = 0; i < g.generators().size(); ++i) {
      Permutation c = g.generators()[i] * x * ginv[i];
      if (!n.contains(c)) {
        Permutation one[] = {c};
        n = n.with_generators(one);
        todo.push_back(std::move(c));
      }
    }
  }
  return n;
}

PermGroup derived_subgroup(const PermGroup& g) {
  std::vector<Permutation> comms;
  const auto& gs = g.generators();
  for (std::size_t i = 0; i < gs.size(); ++i) {
    for (std::size_t j = i + 1; j < gs.size(); ++j) {
      comms.push_back(gs[i].inverse() * gs[j].inverse() * gs[i] * gs[j]);
    }
  }
  return normal_closure(g, comms);
}

IndexPSubgroups index_p_subgroups(std::shared_ptr<const PermGroup> g, unsigned p) {
  if (p < 2) throw Error("index_p_subgroups: p must be prime");
  for (unsigned q = 2; q * q <= p; ++q) {
    if (p % q == 0) throw Error("index_p_subgroups: p must be prime");
  }
  IndexPSubgroups out;
  out.complete = (p == 2);

  const auto& gs = g->generators();
  std::vector<Permutation> rels;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    rels.push_back(gs[i].pow(p));
    for (std::size_t j = i + 1; j < gs.size(); ++j) {
      rels.push_back(gs[i].inverse() * gs[j].inverse() * gs[i] * gs[j]);
    }
  }
  PermGroup frattini = normal_closure(*g, rels);

  // chain[j] = <frattini, basis[0..j-1]>
  std::vector<Permutation> basis;
  std::vector<PermGroup> chain{frattini};
  for (const auto& x : gs) {
    if (chain.back().contains(x)) continue;
    basis.push_back(x);
    Permutation one[] = {x};
    chain.push_back(chain.back().with_generators(one));
  }
  const std::size_t r = basis.size();
  out.rank = r;
  if (r == 0) return out;
  if (r > 16) throw Error("index_p_subgroups: elementary abelian rank too large");

  // Enumerate functionals up to scalars: first nonzero coordinate is 1.
  std::vector<unsigned> f(r, 0);
  auto advance = [&]() {
    for (std::size_t i = r; i-- > 0;) {
      if (++f[i] < p) return true;
      f[i] = 0;
    }
    return false;
  };
  std::vector<Permutation> basis_inv;
  for (const auto& e : basis) basis_inv.push_back(e.inverse());
  while (advance()) {
    std::size_t q = 0;
    while (f[q] == 0) ++q;
    if (f[q] != 1) continue;
    std::vector<Permutation> kg(frattini.generators().begin(), frattini.generators().end());
    for (std::size_t j = 0; j < r; ++j) {
      if (j == q) continue;
      kg.push_back(basis[j] * basis_inv[q].pow(f[j]));
    }
    out.subgroups.emplace_back(g, PermGroup(g->degree(), std::move(kg)));
  }
  return out;
}

}  // namespace ssg
