#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ssg/permutation.hpp"
#include "ssg/word.hpp"

namespace ssg {

struct GeneratorSpec {
  std::string name;
  RootPerm perm;
  std::vector<Word> sections;  // one per letter of the alphabet
};

// A finite wreath-recursion presentation: each generator g is given by its
// root permutation and its sections g|_x at the first-level vertices.
//
// Systems are immutable and shared through Ptr. An extension (see extend())
// keeps the generators of its base as a prefix, so words of the base are
// valid words of the extension with the same meaning. Section and leaf-action
// memos are per system.
class RecursionSystem {
 public:
  using Ptr = std::shared_ptr<const RecursionSystem>;

  struct Decomposition {
    RootPerm perm;
    std::vector<Word> sections;
  };

  static Ptr create(int alphabet_size, std::vector<GeneratorSpec> generators);
  static Ptr extend(const Ptr& base, std::vector<GeneratorSpec> extra);

  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return gens_.size(); }
  const GeneratorSpec& generator(std::size_t i) const { return gens_.at(i); }
  const std::vector<GeneratorSpec>& generators() const noexcept { return gens_; }
  std::optional<std::size_t> find(std::string_view name) const;

  const Ptr& parent() const noexcept { return parent_; }
  // True when `other` is this system or one of its ancestors.
  bool extends(const RecursionSystem& other) const noexcept;

  // Root permutation and first-level sections of a word, memoized by the
  // free-reduced word.
  const Decomposition& decompose(const Word& w) const;
  RootPerm root_perm(const Word& w) const;

  // Action on the d^level leaves of the given level, indexed big-endian
  // lexicographically.
  const Permutation& leaf_perm(std::size_t generator, int level) const;
  Permutation leaf_perm(const Word& w, int level) const;

  std::string format_word(const Word& w) const;
  // Throws ParseError (location = `where` plus token index).
  Word parse_word(std::string_view text, const std::string& where = "") const;

 private:
  RecursionSystem() = default;
  void validate() const;
  void ensure_leaf_level(int level) const;

  int degree_ = 0;
  std::vector<GeneratorSpec> gens_;
  std::unordered_map<std::string, std::size_t> index_;
  Ptr parent_;

  mutable std::shared_mutex memo_mutex_;
  mutable std::unordered_map<Word, std::unique_ptr<Decomposition>, WordHash> memo_;
  mutable std::shared_mutex leaf_mutex_;
  // level -> (generator perms, inverse perms); map nodes are never moved.
  mutable std::map<int, std::pair<std::vector<Permutation>, std::vector<Permutation>>>
      leaf_cache_;
};

// Recursion file format: a JSON document with `alphabet_size` and an ordered
// `generators` list of {name, perm, sections}; perm is a 1-based image list
// and each section is a word such as "a b^-1 c^2" or "e".
RecursionSystem::Ptr parse_system(std::string_view text);
std::string serialize_system(const RecursionSystem& system);

bool is_valid_generator_name(std::string_view name);

}  // namespace ssg
