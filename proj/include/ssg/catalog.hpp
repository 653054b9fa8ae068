#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssg/element.hpp"
#include "ssg/recursion_system.hpp"

namespace ssg {

// Claimed branching subgroup of a catalog group.
struct BranchData {
  enum class Kind {
    None,
    Generated,       // K = <words>
    NormalClosure,   // K = <<words>>^G
    Commutator,      // K = [G, G]
  };
  Kind kind = Kind::None;
  std::vector<Word> words;
  // Level m with stab(m) <= K, once known.
  std::optional<int> stab_level;
};

std::string to_string(BranchData::Kind kind);

struct SelfSimilarGroup {
  std::string name;
  RecursionSystem::Ptr system;
  std::vector<std::size_t> generators;  // indices into the system
  // Parameters as given, for reports ("p" -> "3", "vector" -> "1,2").
  std::map<std::string, std::string> params;
  BranchData branch;

  int degree() const { return system->degree(); }
  std::vector<Element> generator_elements() const;
  std::vector<Word> generator_words() const;
  std::vector<std::string> generator_names() const;
};

struct CatalogParams {
  std::optional<int> p;
  std::vector<int> vector;
};

struct CatalogEntry {
  std::string name;
  std::string parameters;
  std::string summary;
};

const std::vector<CatalogEntry>& catalog_entries();

// Throws ssg::Error naming the violated constraint on bad parameters.
SelfSimilarGroup builtin(const std::string& name, const CatalogParams& params = {});

// A user-defined group generated by all generators of `system`.
SelfSimilarGroup custom_group(RecursionSystem::Ptr system, std::string name = "custom");

bool is_prime(long long n);

struct SylowCheck {
  enum class Verdict { Pass, Fail, Inconclusive };
  Verdict verdict = Verdict::Pass;
  // For Fail: the generator and vertex whose section acts on the alphabet
  // by a permutation outside <sigma>.
  std::string generator;
  Vertex vertex;
  RootPerm perm;
  std::size_t closure_size = 0;
};

SylowCheck validate_sylow(const SelfSimilarGroup& g, std::size_t budget = 10'000);

// X^n * (components): the element fixing level n whose section at the i-th
// level-n vertex is components[i]. The result lives in an extension of the
// components' common system, built with one auxiliary generator per
// non-trivial vertex above level n. All tuples of a batch share a single
// extension.
std::vector<Element> x_star_batch(const std::vector<std::vector<Element>>& tuples, int n);
Element x_star(const std::vector<Element>& components, int n);

// Level-L action of x_star(components, n), computed directly from the
// components' level L - n actions.
Permutation x_star_leaf_perm(const std::vector<Permutation>& components, int degree,
                             int n);

// The rotors sigma-at-v for |v| < n, in breadth-first order of v.
std::vector<Element> q_n_generators(int degree, int n);

}  // namespace ssg
