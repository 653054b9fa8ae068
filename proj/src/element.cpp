#include "ssg/element.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "ssg/errors.hpp"

namespace ssg {

Element::Element(RecursionSystem::Ptr system, Word word)
    : system_(std::move(system)), word_(std::move(word)) {
  if (!system_) throw Error("element without a recursion system");
  for (Letter l : word_.letters) {
    if (l == 0 || generator_of(l) >= system_->size()) {
      throw Error("word references a generator outside its system");
    }
  }
  word_.free_reduce();
}

Element Element::identity(RecursionSystem::Ptr system) {
  return Element(std::move(system), Word{});
}

Element Element::generator(RecursionSystem::Ptr system, std::size_t i) {
  return Element(std::move(system), Word({letter_of(i)}));
}

Element Element::generator(RecursionSystem::Ptr system, std::string_view name) {
  auto i = system->find(name);
  if (!i) throw Error("unknown generator '" + std::string(name) + "'");
  return generator(std::move(system), *i);
}

Element Element::parse(RecursionSystem::Ptr system, std::string_view text) {
  Word w = system->parse_word(text);
  return Element(std::move(system), std::move(w));
}

Element Element::lifted(const RecursionSystem::Ptr& target) const {
  if (target == system_) return *this;
  if (!target->extends(*system_)) {
    throw Error("target system does not extend the element's system");
  }
  Element e;
  e.system_ = target;
  e.word_ = word_;
  return e;
}

RootPerm Element::root_perm() const { return system_->root_perm(word_); }

Element Element::section(int x) const {
  if (x < 0 || x >= system_->degree()) throw Error("letter out of range");
  Element e;
  e.system_ = system_;
  e.word_ = system_->decompose(word_).sections[static_cast<std::size_t>(x)];
  return e;
}

Element Element::section(const Vertex& v) const {
  Element e = *this;
  for (int x : v.path) e = e.section(x);
  return e;
}

Vertex Element::act(const Vertex& v) const {
  Vertex out;
  out.path.reserve(v.level());
  const Word* w = &word_;
  for (int x : v.path) {
    if (x < 0 || x >= system_->degree()) throw Error("letter out of range");
    const auto& dec = system_->decompose(*w);
    out.path.push_back(dec.perm[x]);
    w = &dec.sections[static_cast<std::size_t>(x)];
  }
  return out;
}

Permutation Element::leaf_perm(int level) const { return system_->leaf_perm(word_, level); }

Element Element::inverse() const {
  Element e;
  e.system_ = system_;
  e.word_ = word_.inverse();
  return e;
}

Element Element::pow(long long e) const {
  Element r;
  r.system_ = system_;
  r.word_ = word_.power(e);
  return r;
}

Element operator*(const Element& g, const Element& h) {
  if (g.system_ == h.system_) {
    Element e;
    e.system_ = g.system_;
    e.word_ = g.word_ * h.word_;
    return e;
  }
  if (g.system_->extends(*h.system_)) return g * h.lifted(g.system_);
  if (h.system_->extends(*g.system_)) return g.lifted(h.system_) * h;
  throw Error("cannot multiply elements of unrelated recursion systems");
}

std::string Element::to_string() const { return system_->format_word(word_); }

Element multiply(const Element& g, const Element& h) { return g * h; }
Element invert(const Element& g) { return g.inverse(); }

Portrait portrait(const Element& g, int depth) {
  if (depth < 0) throw Error("negative portrait depth");
  const auto& sys = *g.system();
  const int d = sys.degree();
  Portrait p;
  p.degree = d;
  p.depth = depth;
  std::vector<Word> level{g.word()};
  for (int j = 0; j < depth; ++j) {
    std::vector<RootPerm> labels;
    std::vector<Word> next;
    labels.reserve(level.size());
    if (j + 1 < depth) next.reserve(level.size() * static_cast<std::size_t>(d));
    for (const Word& w : level) {
      const auto& dec = sys.decompose(w);
      labels.push_back(dec.perm);
      if (j + 1 < depth) next.insert(next.end(), dec.sections.begin(), dec.sections.end());
    }
    p.labels.push_back(std::move(labels));
    level = std::move(next);
  }
  return p;
}

Permutation to_leaf_perm(const Portrait& portrait) {
  const auto d = static_cast<std::size_t>(portrait.degree);
  std::size_t n = 1;
  for (int j = 0; j < portrait.depth; ++j) n *= d;
  std::vector<Point> img(n);
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    std::size_t prefix = 0;
    std::size_t out = 0;
    std::size_t scale = n;
    for (int j = 0; j < portrait.depth; ++j) {
      scale /= d;
      auto x = static_cast<int>((leaf / scale) % d);
      const RootPerm& label = portrait.labels.at(static_cast<std::size_t>(j)).at(prefix);
      out = out * d + static_cast<std::size_t>(label[x]);
      prefix = prefix * d + static_cast<std::size_t>(x);
    }
    img[leaf] = static_cast<Point>(out);
  }
  return Permutation(std::move(img));
}

Portrait portrait_from_leaf_perm(const Permutation& leaf, int degree, int depth) {
  const auto d = static_cast<std::size_t>(degree);
  std::size_t n = 1;
  for (int j = 0; j < depth; ++j) n *= d;
  if (leaf.degree() != n) throw Error("leaf permutation has the wrong degree");
  Portrait p;
  p.degree = degree;
  p.depth = depth;
  std::size_t count = 1;
  std::size_t below = n;
  for (int j = 0; j < depth; ++j) {
    below /= d;
    std::vector<RootPerm> labels;
    labels.reserve(count);
    for (std::size_t v = 0; v < count; ++v) {
      std::vector<int> images(d);
      for (std::size_t x = 0; x < d; ++x) {
        std::size_t src = (v * d + x) * below;
        images[x] = static_cast<int>((leaf[static_cast<Point>(src)] / below) % d);
      }
      labels.emplace_back(std::move(images));
    }
    p.labels.push_back(std::move(labels));
    count *= d;
  }
  if (to_leaf_perm(p) != leaf) throw Error("permutation is not a tree automorphism");
  return p;
}

EqualResult equal(const Element& g, const Element& h, std::size_t budget) {
  Element gg = g;
  Element hh = h;
  if (g.system() != h.system()) {
    Element prod = g * h.inverse();
    gg = g.lifted(prod.system());
    hh = h.lifted(prod.system());
  }
  const auto& sys = *gg.system();
  Word f = gg.word() * hh.word().inverse();

  struct Node {
    std::size_t parent;
    int letter;
  };
  std::unordered_map<Word, std::size_t, WordHash> seen;
  std::vector<Node> nodes;
  std::vector<const Word*> order;
  EqualResult result;

  auto path_of = [&](std::size_t idx) {
    Vertex v;
    while (nodes[idx].letter >= 0) {
      v.path.push_back(nodes[idx].letter);
      idx = nodes[idx].parent;
    }
    std::reverse(v.path.begin(), v.path.end());
    return v;
  };

  auto [it0, ins0] = seen.emplace(f, 0);
  nodes.push_back({0, -1});
  order.push_back(&it0->first);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const Word& w = *order[head];
    const auto& dec = sys.decompose(w);
    if (!dec.perm.is_identity()) {
      result.kind = EqualResult::Kind::Distinct;
      result.witness = hh.inverse().act(path_of(head));
      result.explored = order.size();
      return result;
    }
    for (int x = 0; x < sys.degree(); ++x) {
      const Word& s = dec.sections[static_cast<std::size_t>(x)];
      auto [it, inserted] = seen.emplace(s, nodes.size());
      if (!inserted) continue;
      if (nodes.size() >= budget) {
        result.kind = EqualResult::Kind::Unknown;
        result.explored = nodes.size();
        return result;
      }
      nodes.push_back({head, x});
      order.push_back(&it->first);
    }
  }
  result.kind = EqualResult::Kind::Equal;
  result.explored = order.size();
  return result;
}

SectionClosure section_closure(const RecursionSystem& system,
                               const std::vector<Word>& words, std::size_t budget) {
  SectionClosure out;
  std::unordered_set<Word, WordHash> seen;
  auto add = [&](const Word& w) {
    if (!seen.insert(w).second) return true;
    if (seen.size() > budget) {
      out.overflow = true;
      return false;
    }
    out.words.push_back(w);
    return true;
  };
  for (const Word& w : words) {
    if (!add(w.reduced())) return out;
  }
  for (std::size_t head = 0; head < out.words.size(); ++head) {
    const auto& dec = system.decompose(out.words[head]);
    for (const Word& s : dec.sections) {
      if (!add(s)) return out;
    }
  }
  return out;
}

LawReport check_recursion_laws(const RecursionSystem::Ptr& system, std::uint64_t seed,
                               std::size_t samples, int depth, std::size_t max_length) {
  std::mt19937_64 rng(seed);
  const int d = system->degree();
  auto random_element = [&] {
    std::vector<Letter> ls(rng() % (max_length + 1));
    for (auto& l : ls) l = letter_of(rng() % system->size(), rng() % 2 == 1);
    return Element(system, Word(std::move(ls)));
  };
  LawReport rep;
  auto check = [&](bool ok, const std::string& law, const Element& g, const Element& h,
                   const Vertex& v) {
    ++rep.checks;
    if (!ok) {
      rep.failures.push_back(law + " for g = " + g.to_string() + ", h = " + h.to_string() +
                             ", v = " + v.to_string(d));
    }
  };
  auto same = [&](const Element& x, const Element& y) {
    return equal(x, y).kind != EqualResult::Kind::Distinct && x.leaf_perm(depth) == y.leaf_perm(depth);
  };
  for (std::size_t t = 0; t < samples; ++t) {
    const Element g = random_element();
    const Element h = random_element();
    const int level = static_cast<int>(rng() % static_cast<std::uint64_t>(depth + 1));
    std::uint64_t count = 1;
    for (int j = 0; j < level; ++j) count *= static_cast<std::uint64_t>(d);
    const Vertex v = Vertex::from_index(rng() % count, d, static_cast<std::size_t>(level));
    const Element gh = g * h;
    check(gh.act(v) == g.act(h.act(v)), "action", g, h, v);
    check(same(gh.section(v), g.section(h.act(v)) * h.section(v)), "product section", g, h, v);
    const Element gi = g.inverse();
    check(same(gi.section(v), g.section(gi.act(v)).inverse()), "inverse section", g, h, v);
    check(gh.leaf_perm(depth) == g.leaf_perm(depth) * h.leaf_perm(depth), "leaf action", g, h, v);
  }
  return rep;
}

}  // namespace ssg
