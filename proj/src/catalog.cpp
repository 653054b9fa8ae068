#include "ssg/catalog.hpp"

#include <deque>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "ssg/errors.hpp"

namespace ssg {

namespace {

struct GenDef {
  std::string name;
  std::vector<int> perm;  // 1-based
  std::vector<std::string> sections;
};

RecursionSystem::Ptr make_system(int d, const std::vector<GenDef>& defs) {
  nlohmann::ordered_json doc;
  doc["alphabet_size"] = d;
  doc["generators"] = nlohmann::ordered_json::array();
  for (const auto& g : defs) {
    nlohmann::ordered_json j;
    j["name"] = g.name;
    j["perm"] = g.perm;
    j["sections"] = g.sections;
    doc["generators"].push_back(j);
  }
  return parse_system(doc.dump());
}

std::vector<int> identity_images(int d) {
  std::vector<int> v(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = i + 1;
  return v;
}

std::vector<int> sigma_images(int d) {
  std::vector<int> v(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = (i + 1) % d + 1;
  return v;
}

std::string power_token(const std::string& name, int e) {
  if (e == 0) return "e";
  if (e == 1) return name;
  return name + "^" + std::to_string(e);
}

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

int require_odd_prime(const CatalogParams& params, const std::string& group, int fallback) {
  int p = params.p.value_or(fallback);
  if (p < 3 || !is_prime(p)) {
    throw Error(group + ": p must be an odd prime (got " + std::to_string(p) + ")");
  }
  return p;
}

void require_digits(const std::vector<int>& v, int p, const std::string& group) {
  for (int x : v) {
    if (x < 0 || x > p - 1) {
      throw Error(group + ": vector entries must lie in 0.." + std::to_string(p - 1));
    }
  }
}

SelfSimilarGroup finish(std::string name, RecursionSystem::Ptr sys,
                        std::map<std::string, std::string> params) {
  SelfSimilarGroup g = custom_group(std::move(sys), std::move(name));
  g.params = std::move(params);
  return g;
}

SelfSimilarGroup grigorchuk() {
  auto sys = make_system(2, {{"a", {2, 1}, {"e", "e"}},
                             {"b", {1, 2}, {"a", "c"}},
                             {"c", {1, 2}, {"a", "d"}},
                             {"d", {1, 2}, {"e", "b"}}});
  auto g = finish("grigorchuk", sys, {});
  g.branch.kind = BranchData::Kind::Generated;
  for (const char* w : {"a b a b", "b a d a b a d a", "a b a d a b a d"}) {
    g.branch.words.push_back(sys->parse_word(w));
  }
  return g;
}

SelfSimilarGroup twisted_twin() {
  auto sys = make_system(2, {{"a", {2, 1}, {"e", "e"}},
                             {"beta", {1, 2}, {"gamma", "a"}},
                             {"gamma", {1, 2}, {"a", "delta"}},
                             {"delta", {1, 2}, {"e", "beta"}}});
  auto g = finish("twisted_twin", sys, {});
  g.branch.kind = BranchData::Kind::NormalClosure;
  for (const char* w : {"a^-1 beta^-1 a beta", "beta^-1 gamma^-1 beta gamma",
                        "beta^-1 delta^-1 beta delta", "gamma^-1 delta^-1 gamma delta",
                        "beta delta gamma"}) {
    g.branch.words.push_back(sys->parse_word(w));
  }
  return g;
}

SelfSimilarGroup gupta_sidki(const CatalogParams& params) {
  int p = require_odd_prime(params, "gupta_sidki", 3);
  if (!params.vector.empty()) throw Error("gupta_sidki: takes no vector");
  std::vector<std::string> ys(static_cast<std::size_t>(p), "e");
  ys[0] = "x";
  ys[1] = "x^-1";
  ys[static_cast<std::size_t>(p - 1)] = "y";
  auto sys = make_system(p, {{"x", sigma_images(p), std::vector<std::string>(p, "e")},
                             {"y", identity_images(p), ys}});
  auto g = finish("gupta_sidki", sys, {{"p", std::to_string(p)}});
  g.branch.kind = BranchData::Kind::Commutator;
  return g;
}

SelfSimilarGroup gs_variant(const CatalogParams& params) {
  int p = params.p.value_or(7);
  if (p < 7 || !is_prime(p)) {
    throw Error("gs_variant: p must be a prime with p >= 7 (got " + std::to_string(p) + ")");
  }
  const auto& v = params.vector;
  if (static_cast<int>(v.size()) != p - 3) {
    throw Error("gs_variant: vector must have p-3 = " + std::to_string(p - 3) + " entries");
  }
  require_digits(v, p, "gs_variant");
  if (v[0] == 0) throw Error("gs_variant: i_1 must be nonzero");
  std::vector<std::string> ys;
  for (int i : v) ys.push_back(power_token("x", i));
  ys.insert(ys.end(), {"e", "e", "y"});
  auto sys = make_system(p, {{"x", sigma_images(p), std::vector<std::string>(p, "e")},
                             {"y", identity_images(p), ys}});
  auto g = finish("gs_variant", sys, {{"p", std::to_string(p)}, {"vector", join_ints(v)}});
  g.branch.kind = BranchData::Kind::Commutator;
  return g;
}

SelfSimilarGroup fabrykowski_gupta(const CatalogParams& params) {
  int p = require_odd_prime(params, "fabrykowski_gupta", 3);
  if (!params.vector.empty()) throw Error("fabrykowski_gupta: takes no vector");
  std::vector<std::string> bs(static_cast<std::size_t>(p), "e");
  bs[0] = "a";
  bs[static_cast<std::size_t>(p - 1)] = "b";
  auto sys = make_system(p, {{"a", sigma_images(p), std::vector<std::string>(p, "e")},
                             {"b", identity_images(p), bs}});
  auto g = finish("fabrykowski_gupta", sys, {{"p", std::to_string(p)}});
  g.branch.kind = BranchData::Kind::Commutator;
  return g;
}

SelfSimilarGroup egs(const CatalogParams& params) {
  int p = require_odd_prime(params, "egs", 3);
  const auto& v = params.vector;
  if (static_cast<int>(v.size()) != p - 1) {
    throw Error("egs: vector must have p-1 = " + std::to_string(p - 1) + " entries");
  }
  require_digits(v, p, "egs");
  bool symmetric = true;
  for (int j = 1; j <= p - 1; ++j) {
    if (v[static_cast<std::size_t>(j - 1)] != v[static_cast<std::size_t>(p - j - 1)]) {
      symmetric = false;
    }
  }
  if (symmetric) throw Error("egs: vector must be non-symmetric (i_j != i_{p-j} for some j)");
  std::vector<std::string> bs, cs{"c"};
  for (int i : v) {
    bs.push_back(power_token("a", i));
    cs.push_back(power_token("a", i));
  }
  bs.push_back("b");
  auto sys = make_system(p, {{"a", sigma_images(p), std::vector<std::string>(p, "e")},
                             {"b", identity_images(p), bs},
                             {"c", identity_images(p), cs}});
  auto g = finish("egs", sys, {{"p", std::to_string(p)}, {"vector", join_ints(v)}});
  g.branch.kind = BranchData::Kind::Commutator;
  return g;
}

SelfSimilarGroup adding_machine() {
  auto sys = make_system(2, {{"tau", {2, 1}, {"e", "tau"}}});
  return finish("adding_machine", sys, {});
}

SelfSimilarGroup dihedral() {
  auto sys = make_system(2, {{"delta", {2, 1}, {"delta", "delta"}},
                             {"tau", {2, 1}, {"e", "tau"}}});
  return finish("dihedral", sys, {});
}

void no_params(const CatalogParams& params, const std::string& name) {
  if (params.p || !params.vector.empty()) throw Error(name + ": takes no parameters");
}

}  // namespace

std::string to_string(BranchData::Kind kind) {
  switch (kind) {
    case BranchData::Kind::None: return "none";
    case BranchData::Kind::Generated: return "generated";
    case BranchData::Kind::NormalClosure: return "normal_closure";
    case BranchData::Kind::Commutator: return "commutator";
  }
  return "none";
}

bool is_prime(long long n) {
  if (n < 2) return false;
  for (long long q = 2; q * q <= n; ++q) {
    if (n % q == 0) return false;
  }
  return true;
}

std::vector<Element> SelfSimilarGroup::generator_elements() const {
  std::vector<Element> out;
  for (std::size_t i : generators) out.push_back(Element::generator(system, i));
  return out;
}

std::vector<Word> SelfSimilarGroup::generator_words() const {
  std::vector<Word> out;
  for (std::size_t i : generators) out.push_back(Word({letter_of(i)}));
  return out;
}

std::vector<std::string> SelfSimilarGroup::generator_names() const {
  std::vector<std::string> out;
  for (std::size_t i : generators) out.push_back(system->generator(i).name);
  return out;
}

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = {
      {"grigorchuk", "", "first Grigorchuk group <a,b,c,d> on the binary tree"},
      {"twisted_twin", "", "twisted twin <a,beta,gamma,delta> of the Grigorchuk group"},
      {"gupta_sidki", "--p P (odd prime, default 3)", "Gupta-Sidki p-group <x,y>"},
      {"gs_variant", "--p P (prime >= 7) --vector i1,...,i_{p-3} (i1 != 0)",
       "Gupta-Sidki variation y = (x^i1, ..., x^i_{p-3}, 1, 1, y)"},
      {"fabrykowski_gupta", "--p P (odd prime, default 3)",
       "Fabrykowski-Gupta group <a,b>, b = (a, 1, ..., 1, b)"},
      {"egs", "--p P (odd prime) --vector i1,...,i_{p-1} (non-symmetric)",
       "extended Gupta-Sidki group <a,b,c>"},
      {"adding_machine", "", "binary adding machine <tau>, tau = (1, tau) sigma"},
      {"dihedral", "", "<delta, tau> with delta = (delta, delta) sigma"},
  };
  return entries;
}

SelfSimilarGroup builtin(const std::string& name, const CatalogParams& params) {
  if (name == "grigorchuk") return no_params(params, name), grigorchuk();
  if (name == "twisted_twin") return no_params(params, name), twisted_twin();
  if (name == "gupta_sidki") return gupta_sidki(params);
  if (name == "gs_variant") return gs_variant(params);
  if (name == "fabrykowski_gupta") return fabrykowski_gupta(params);
  if (name == "egs") return egs(params);
  if (name == "adding_machine") return no_params(params, name), adding_machine();
  if (name == "dihedral") return no_params(params, name), dihedral();
  throw Error("unknown catalog group '" + name + "'");
}

SelfSimilarGroup custom_group(RecursionSystem::Ptr system, std::string name) {
  SelfSimilarGroup g;
  g.name = std::move(name);
  for (std::size_t i = 0; i < system->size(); ++i) g.generators.push_back(i);
  g.system = std::move(system);
  return g;
}

SylowCheck validate_sylow(const SelfSimilarGroup& g, std::size_t budget) {
  const auto& sys = *g.system;
  struct Node {
    Word word;
    std::size_t origin;
    Vertex vertex;
  };
  SylowCheck out;
  std::unordered_map<Word, bool, WordHash> seen;
  std::deque<Node> queue;
  for (std::size_t i : g.generators) {
    for (bool inv : {false, true}) {
      Word w({letter_of(i, inv)});
      if (seen.emplace(w, true).second) queue.push_back({w, i, Vertex{}});
    }
  }
  while (!queue.empty()) {
    Node node = std::move(queue.front());
    queue.pop_front();
    const auto& dec = sys.decompose(node.word);
    if (dec.perm.sigma_exponent() < 0) {
      out.verdict = SylowCheck::Verdict::Fail;
      out.generator = sys.generator(node.origin).name;
      out.vertex = node.vertex;
      out.perm = dec.perm;
      out.closure_size = seen.size();
      return out;
    }
    for (int x = 0; x < sys.degree(); ++x) {
      const Word& s = dec.sections[static_cast<std::size_t>(x)];
      if (!seen.emplace(s, true).second) continue;
      if (seen.size() > budget) {
        out.verdict = SylowCheck::Verdict::Inconclusive;
        out.closure_size = seen.size();
        return out;
      }
      queue.push_back({s, node.origin, node.vertex.child(x)});
    }
  }
  out.closure_size = seen.size();
  return out;
}

namespace {

RecursionSystem::Ptr common_system(const std::vector<const Element*>& elems) {
  RecursionSystem::Ptr top;
  for (const Element* e : elems) {
    if (!top || e->system()->extends(*top)) {
      top = e->system();
    } else if (!top->extends(*e->system())) {
      throw Error("x_star components belong to unrelated recursion systems");
    }
  }
  return top;
}

std::vector<Element> x_star_impl(const std::vector<std::vector<Element>>& tuples,
                                 const std::vector<int>& depths) {
  std::vector<const Element*> all;
  for (const auto& t : tuples) {
    for (const auto& e : t) all.push_back(&e);
  }
  if (all.empty()) throw Error("x_star needs at least one component");
  RecursionSystem::Ptr top = common_system(all);
  const int d = top->degree();
  for (const auto& t : tuples) {
    for (const auto& e : t) {
      if (e.system()->degree() != d) throw Error("x_star components disagree on the alphabet");
    }
  }

  // Per tuple: for each level j < n and vertex index, the auxiliary
  // generator index (relative) or -1 when the subtree is trivial.
  std::vector<GeneratorSpec> specs;
  std::vector<long long> roots(tuples.size(), -1);
  std::vector<Word> direct(tuples.size());
  const std::size_t base = top->size();
  auto aux_name = [&](std::size_t idx) {
    std::string name = "__x" + std::to_string(idx);
    while (top->find(name)) name += "_";
    return name;
  };
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const int n = depths[t];
    if (n < 0) throw Error("x_star depth must be non-negative");
    std::size_t count = 1;
    for (int j = 0; j < n; ++j) count *= static_cast<std::size_t>(d);
    if (tuples[t].size() != count) {
      throw Error("x_star expects d^n = " + std::to_string(count) + " components, got " +
                  std::to_string(tuples[t].size()));
    }
    if (n == 0) {
      direct[t] = tuples[t][0].word();
      continue;
    }
    std::vector<Word> below;
    below.reserve(count);
    for (const auto& e : tuples[t]) below.push_back(e.word());
    for (int j = n - 1; j >= 0; --j) {
      std::size_t width = count / static_cast<std::size_t>(d);
      std::vector<Word> here(width);
      for (std::size_t v = 0; v < width; ++v) {
        GeneratorSpec spec;
        bool trivial = true;
        for (int x = 0; x < d; ++x) {
          const Word& w = below[v * static_cast<std::size_t>(d) + static_cast<std::size_t>(x)];
          if (!w.empty()) trivial = false;
          spec.sections.push_back(w);
        }
        if (trivial) continue;
        spec.perm = RootPerm::identity(d);
        std::size_t idx = base + specs.size();
        spec.name = aux_name(idx);
        specs.push_back(std::move(spec));
        here[v] = Word({letter_of(idx)});
      }
      below = std::move(here);
      count = width;
    }
    direct[t] = below[0];
  }
  RecursionSystem::Ptr sys = specs.empty() ? top : RecursionSystem::extend(top, std::move(specs));
  std::vector<Element> out;
  for (std::size_t t = 0; t < tuples.size(); ++t) out.emplace_back(sys, direct[t]);
  return out;
}

}  // namespace

std::vector<Element> x_star_batch(const std::vector<std::vector<Element>>& tuples, int n) {
  return x_star_impl(tuples, std::vector<int>(tuples.size(), n));
}

Element x_star(const std::vector<Element>& components, int n) {
  return x_star_batch({components}, n).front();
}

Permutation x_star_leaf_perm(const std::vector<Permutation>& components, int degree, int n) {
  std::size_t count = 1;
  for (int j = 0; j < n; ++j) count *= static_cast<std::size_t>(degree);
  if (components.size() != count) throw Error("x_star expects d^n components");
  const std::size_t block = components.front().degree();
  std::vector<Point> img(count * block);
  for (std::size_t i = 0; i < count; ++i) {
    if (components[i].degree() != block) throw Error("x_star components differ in degree");
    for (std::size_t r = 0; r < block; ++r) {
      img[i * block + r] = static_cast<Point>(i * block + components[i][static_cast<Point>(r)]);
    }
  }
  return Permutation(std::move(img));
}

std::vector<Element> q_n_generators(int degree, int n) {
  if (degree < 2) throw Error("alphabet size must be at least 2");
  if (n < 1) throw Error("q_n needs n >= 1");
  auto sys = make_system(degree, {{"s", sigma_images(degree),
                                   std::vector<std::string>(static_cast<std::size_t>(degree), "e")}});
  Element s = Element::generator(sys, 0);
  Element one = Element::identity(sys);
  std::vector<std::vector<Element>> tuples;
  std::vector<int> depths;
  std::size_t count = 1;
  for (int j = 0; j < n; ++j) {
    for (std::size_t v = 0; v < count; ++v) {
      std::vector<Element> t(count, one);
      t[v] = s;
      tuples.push_back(std::move(t));
      depths.push_back(j);
    }
    count *= static_cast<std::size_t>(degree);
  }
  return x_star_impl(tuples, depths);
}

}  // namespace ssg
