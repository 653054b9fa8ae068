#include "ssg/recursion_system.hpp"

#include <cctype>
#include <charconv>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "ssg/errors.hpp"

namespace ssg {

bool is_valid_generator_name(std::string_view name) {
  if (name.empty() || name == "e") return false;
  auto first = static_cast<unsigned char>(name.front());
  if (!std::isalpha(first) && first != '_') return false;
  for (char c : name) {
    auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && u != '_') return false;
  }
  return true;
}

RecursionSystem::Ptr RecursionSystem::create(int alphabet_size,
                                             std::vector<GeneratorSpec> generators) {
  std::shared_ptr<RecursionSystem> s(new RecursionSystem());
  s->degree_ = alphabet_size;
  s->gens_ = std::move(generators);
  s->validate();
  return s;
}

RecursionSystem::Ptr RecursionSystem::extend(const Ptr& base,
                                             std::vector<GeneratorSpec> extra) {
  std::shared_ptr<RecursionSystem> s(new RecursionSystem());
  s->degree_ = base->degree_;
  s->gens_ = base->gens_;
  for (auto& g : extra) s->gens_.push_back(std::move(g));
  s->parent_ = base;
  s->validate();
  return s;
}

void RecursionSystem::validate() const {
  auto& self = const_cast<RecursionSystem&>(*this);
  if (degree_ < 2) throw Error("alphabet_size must be at least 2");
  if (gens_.empty()) throw Error("a recursion system needs at least one generator");
  self.index_.clear();
  for (std::size_t i = 0; i < gens_.size(); ++i) {
    const auto& g = gens_[i];
    if (!is_valid_generator_name(g.name)) {
      throw Error("invalid generator name '" + g.name + "'");
    }
    if (!self.index_.emplace(g.name, i).second) {
      throw Error("duplicate generator name '" + g.name + "'");
    }
    if (g.perm.degree() != degree_) {
      throw Error("generator '" + g.name + "': perm has wrong length");
    }
    if (static_cast<int>(g.sections.size()) != degree_) {
      throw Error("generator '" + g.name + "': expected one section per letter");
    }
  }
  for (const auto& g : gens_) {
    for (const auto& w : g.sections) {
      for (Letter l : w.letters) {
        if (l == 0 || generator_of(l) >= gens_.size()) {
          throw Error("generator '" + g.name + "': section references unknown generator");
        }
      }
    }
  }
}

std::optional<std::size_t> RecursionSystem::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool RecursionSystem::extends(const RecursionSystem& other) const noexcept {
  for (const RecursionSystem* s = this; s != nullptr; s = s->parent_.get()) {
    if (s == &other) return true;
  }
  return false;
}

const RecursionSystem::Decomposition& RecursionSystem::decompose(const Word& w) const {
  {
    std::shared_lock lock(memo_mutex_);
    auto it = memo_.find(w);
    if (it != memo_.end()) return *it->second;
  }
  auto dec = std::make_unique<Decomposition>();
  dec->perm = RootPerm::identity(degree_);
  dec->sections.resize(static_cast<std::size_t>(degree_));
  // Sections at x: walk the word from the right, tracking the moving letter.
  for (int x = 0; x < degree_; ++x) {
    int y = x;
    std::vector<const Word*> parts(w.size());
    std::vector<Word> inverse_store(w.size());
    for (std::size_t j = w.size(); j-- > 0;) {
      Letter l = w.letters[j];
      const GeneratorSpec& g = gens_[generator_of(l)];
      if (l > 0) {
        parts[j] = &g.sections[static_cast<std::size_t>(y)];
        y = g.perm[y];
      } else {
        int pre = g.perm.inverse()[y];
        inverse_store[j] = g.sections[static_cast<std::size_t>(pre)].inverse();
        parts[j] = &inverse_store[j];
        y = pre;
      }
    }
    Word s;
    for (std::size_t j = 0; j < w.size(); ++j) {
      s.letters.insert(s.letters.end(), parts[j]->letters.begin(), parts[j]->letters.end());
    }
    s.free_reduce();
    dec->sections[static_cast<std::size_t>(x)] = std::move(s);
  }
  for (Letter l : w.letters) {
    const GeneratorSpec& g = gens_[generator_of(l)];
    dec->perm = dec->perm * (l > 0 ? g.perm : g.perm.inverse());
  }
  std::unique_lock lock(memo_mutex_);
  auto [it, inserted] = memo_.emplace(w, std::move(dec));
  return *it->second;
}

RootPerm RecursionSystem::root_perm(const Word& w) const {
  RootPerm p = RootPerm::identity(degree_);
  for (Letter l : w.letters) {
    const GeneratorSpec& g = gens_[generator_of(l)];
    p = p * (l > 0 ? g.perm : g.perm.inverse());
  }
  return p;
}

void RecursionSystem::ensure_leaf_level(int level) const {
  {
    std::shared_lock lock(leaf_mutex_);
    if (leaf_cache_.count(level) != 0) return;
  }
  std::unique_lock lock(leaf_mutex_);
  if (leaf_cache_.empty()) {
    std::vector<Permutation> base(gens_.size(), Permutation::identity(1));
    leaf_cache_.emplace(0, std::make_pair(base, base));
  }
  int have = leaf_cache_.rbegin()->first;
  for (int n = have + 1; n <= level; ++n) {
    const auto& prev = leaf_cache_.at(n - 1);
    std::size_t block = prev.first.front().degree();
    std::size_t total = block * static_cast<std::size_t>(degree_);
    auto word_perm = [&](const Word& w) {
      Permutation p = Permutation::identity(block);
      for (Letter l : w.letters) {
        p = p * (l > 0 ? prev.first[generator_of(l)] : prev.second[generator_of(l)]);
      }
      return p;
    };
    std::vector<Permutation> fwd, inv;
    for (const auto& g : gens_) {
      std::vector<Point> img(total);
      for (int x = 0; x < degree_; ++x) {
        Permutation s = word_perm(g.sections[static_cast<std::size_t>(x)]);
        auto off_in = static_cast<std::size_t>(x) * block;
        auto off_out = static_cast<std::size_t>(g.perm[x]) * block;
        for (std::size_t r = 0; r < block; ++r) {
          img[off_in + r] = static_cast<Point>(off_out + s[static_cast<Point>(r)]);
        }
      }
      Permutation p(std::move(img));
      inv.push_back(p.inverse());
      fwd.push_back(std::move(p));
    }
    leaf_cache_.emplace(n, std::make_pair(std::move(fwd), std::move(inv)));
  }
}

const Permutation& RecursionSystem::leaf_perm(std::size_t generator, int level) const {
  if (level < 0) throw Error("negative level");
  ensure_leaf_level(level);
  std::shared_lock lock(leaf_mutex_);
  return leaf_cache_.at(level).first.at(generator);
}

Permutation RecursionSystem::leaf_perm(const Word& w, int level) const {
  if (level < 0) throw Error("negative level");
  ensure_leaf_level(level);
  std::shared_lock lock(leaf_mutex_);
  const auto& entry = leaf_cache_.at(level);
  Permutation p = Permutation::identity(entry.first.empty() ? 1 : entry.first.front().degree());
  for (Letter l : w.letters) {
    p = p * (l > 0 ? entry.first[generator_of(l)] : entry.second[generator_of(l)]);
  }
  return p;
}

std::string RecursionSystem::format_word(const Word& w) const {
  if (w.empty()) return "e";
  std::ostringstream out;
  std::size_t i = 0;
  bool first = true;
  while (i < w.size()) {
    std::size_t j = i;
    while (j < w.size() && w.letters[j] == w.letters[i]) ++j;
    long long run = static_cast<long long>(j - i);
    if (w.letters[i] < 0) run = -run;
    if (!first) out << ' ';
    first = false;
    out << gens_[generator_of(w.letters[i])].name;
    if (run != 1) out << '^' << run;
    i = j;
  }
  return out.str();
}

namespace {

Word parse_word_with(std::string_view text, const std::string& where,
                     const std::function<std::optional<std::size_t>(std::string_view)>& lookup) {
  Word w;
  std::size_t pos = 0;
  std::size_t token_index = 0;
  auto loc = [&]() { return where + " token " + std::to_string(token_index); };
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) break;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    std::string_view tok = text.substr(pos, end - pos);
    pos = end;
    std::string_view name = tok;
    long long exponent = 1;
    if (auto caret = tok.find('^'); caret != std::string_view::npos) {
      name = tok.substr(0, caret);
      std::string_view num = tok.substr(caret + 1);
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), exponent);
      if (num.empty() || ec != std::errc() || ptr != num.data() + num.size()) {
        throw ParseError(loc(), "malformed exponent in '" + std::string(tok) + "'");
      }
      if (exponent == 0) throw ParseError(loc(), "exponent must be nonzero");
    }
    if (name == "e") {
      if (exponent != 1) throw ParseError(loc(), "'e' takes no exponent");
      ++token_index;
      continue;
    }
    auto idx = lookup(name);
    if (!idx) throw ParseError(loc(), "unknown generator '" + std::string(name) + "'");
    Letter l = letter_of(*idx, exponent < 0);
    for (long long k = 0; k < (exponent < 0 ? -exponent : exponent); ++k) w.letters.push_back(l);
    ++token_index;
  }
  return w.free_reduce();
}

}  // namespace

Word RecursionSystem::parse_word(std::string_view text, const std::string& where) const {
  return parse_word_with(text, where, [&](std::string_view n) { return find(n); });
}

RecursionSystem::Ptr parse_system(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), "malformed document");
  }
  if (!doc.is_object()) throw ParseError("", "document must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "alphabet_size" && key != "generators") {
      throw ParseError("/" + key, "unknown field");
    }
  }
  if (!doc.contains("alphabet_size") || !doc["alphabet_size"].is_number_integer()) {
    throw ParseError("/alphabet_size", "missing or non-integer alphabet_size");
  }
  const int d = doc["alphabet_size"].get<int>();
  if (d < 2) throw ParseError("/alphabet_size", "alphabet_size must be at least 2");
  if (!doc.contains("generators") || !doc["generators"].is_array()) {
    throw ParseError("/generators", "missing generators list");
  }
  const json& gens = doc["generators"];
  if (gens.empty()) throw ParseError("/generators", "at least one generator is required");

  std::unordered_map<std::string, std::size_t> names;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    std::string where = "/generators/" + std::to_string(i);
    const json& g = gens[i];
    if (!g.is_object()) throw ParseError(where, "generator must be an object");
    for (const auto& [key, value] : g.items()) {
      if (key != "name" && key != "perm" && key != "sections") {
        throw ParseError(where + "/" + key, "unknown field");
      }
    }
    if (!g.contains("name") || !g["name"].is_string()) {
      throw ParseError(where + "/name", "missing name");
    }
    auto name = g["name"].get<std::string>();
    if (!is_valid_generator_name(name)) {
      throw ParseError(where + "/name", "invalid generator name '" + name + "'");
    }
    if (!names.emplace(name, i).second) {
      throw ParseError(where + "/name", "duplicate generator name '" + name + "'");
    }
  }

  std::vector<GeneratorSpec> specs;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    std::string where = "/generators/" + std::to_string(i);
    const json& g = gens[i];
    GeneratorSpec spec;
    spec.name = g["name"].get<std::string>();
    if (!g.contains("perm") || !g["perm"].is_array() ||
        static_cast<int>(g["perm"].size()) != d) {
      throw ParseError(where + "/perm", "perm must list " + std::to_string(d) + " images");
    }
    std::vector<int> img;
    for (std::size_t k = 0; k < g["perm"].size(); ++k) {
      const json& x = g["perm"][k];
      if (!x.is_number_integer()) {
        throw ParseError(where + "/perm/" + std::to_string(k), "image must be an integer");
      }
      img.push_back(x.get<int>() - 1);
    }
    try {
      spec.perm = RootPerm(std::move(img));
    } catch (const Error&) {
      throw ParseError(where + "/perm", "perm is not a bijection of 1.." + std::to_string(d));
    }
    if (!g.contains("sections") || !g["sections"].is_array() ||
        static_cast<int>(g["sections"].size()) != d) {
      throw ParseError(where + "/sections", "sections must list " + std::to_string(d) + " words");
    }
    for (std::size_t k = 0; k < g["sections"].size(); ++k) {
      std::string swhere = where + "/sections/" + std::to_string(k);
      const json& s = g["sections"][k];
      if (!s.is_string()) throw ParseError(swhere, "section must be a string");
      auto text = s.get<std::string>();
      spec.sections.push_back(parse_word_with(text, swhere, [&](std::string_view n) {
        auto it = names.find(std::string(n));
        return it == names.end() ? std::nullopt : std::optional<std::size_t>(it->second);
      }));
    }
    specs.push_back(std::move(spec));
  }
  return RecursionSystem::create(d, std::move(specs));
}

std::string serialize_system(const RecursionSystem& system) {
  std::ostringstream out;
  out << "{\n  \"alphabet_size\": " << system.degree() << ",\n  \"generators\": [\n";
  for (std::size_t i = 0; i < system.size(); ++i) {
    const auto& g = system.generator(i);
    out << "    {\"name\": \"" << g.name << "\", \"perm\": [";
    for (int x = 0; x < system.degree(); ++x) {
      if (x != 0) out << ", ";
      out << g.perm[x] + 1;
    }
    out << "], \"sections\": [";
    for (std::size_t k = 0; k < g.sections.size(); ++k) {
      if (k != 0) out << ", ";
      out << '"' << system.format_word(g.sections[k]) << '"';
    }
    out << "]}" << (i + 1 < system.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

}  // namespace ssg
