#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssg/catalog.hpp"
#include "ssg/element.hpp"
#include "ssg/perm_group.hpp"
#include "ssg/quotient.hpp"

namespace ssg {

struct CommCertificate {
  enum class Argument {
    Contained,   // one side contains the other
    PrimeIndex,  // intersection has prime index in b and a witness of b lies outside a
    Search,      // intersection computed by search
  };
  int level = 0;
  std::size_t degree = 0;
  std::vector<Permutation> a_generators;
  std::vector<Permutation> b_generators;
  std::vector<Permutation> intersection_generators;
  BigInt a_order = 1;
  BigInt b_order = 1;
  BigInt intersection_order = 1;
  BigInt index_a = 1;
  BigInt index_b = 1;
  BigInt com_index = 1;
  Argument argument = Argument::Search;
  std::optional<Permutation> witness;
};

std::string to_string(CommCertificate::Argument a);

// [A : A∩B][B : A∩B] for subgroups of one ambient group.
Outcome<CommCertificate> com_index(const SubgroupHandle& a, const SubgroupHandle& b,
                                   int level = 0, const SearchOptions& opts = {});

// Certificate for A and B when `floor` <= A∩B has prime index in B. The
// intersection is then B or floor, decided by membership of B's generators.
CommCertificate com_index_over(const PermGroup& a, const PermGroup& b, const PermGroup& floor,
                               int level);

// Rebuilds the groups from the stored generators and re-derives every field.
bool recheck(const CommCertificate& cert, const SearchOptions& opts = {});

// Level-n images of a group, built on demand and cached.
class QuotientCache {
 public:
  explicit QuotientCache(SelfSimilarGroup g) : group_(std::move(g)) {}
  const SelfSimilarGroup& group() const noexcept { return group_; }
  const LevelQuotient& at(int level);

 private:
  SelfSimilarGroup group_;
  std::map<int, LevelQuotient> cache_;
};

struct GammaSearchOptions {
  // Maximum number of tuples tried.
  std::size_t budget = 20'000;
  // Non-membership of sections is tested up to this many levels below the
  // section's depth.
  int extra_levels = 3;
  std::size_t max_degree = 4096;
};

struct GammaCandidate {
  std::vector<Word> tuple;  // words over the group's system, one per level-n vertex
  int depth = 0;
  Element element;
  // gamma|_vertex, at `section_level`, lies outside G at that level. Hence
  // gamma lies outside G at level depth + (section_level - (depth - |vertex|)).
  Vertex vertex;
  int section_level = 0;
  int level = 0;
  std::size_t tried = 0;
};

// First tuple in search order whose x_star at depth n is certified outside
// G. Search order: fewer non-identity entries first, then lexicographic with
// letters ordered g1 < g1^-1 < g2 < ... < identity.
Outcome<GammaCandidate> find_gamma_outside(QuotientCache& cache, int n,
                                           const GammaSearchOptions& opts = {});

// Re-checks the stored non-membership witness.
bool recheck(const GammaCandidate& c, QuotientCache& cache);

struct TowerOptions {
  int k = 1;
  int count = 5;
  // Levels added to the depth of gamma_i for the working level; defaults to
  // the discovered stab-in-K level.
  std::optional<int> extra_levels;
  std::size_t max_degree = 200'000;
  // Levels up to this many leaves use stabilizer chains; above it,
  // membership recurses through sections.
  std::size_t chain_degree = 1024;
  // Longest word c tried for uniform tuples (c, ..., c).
  std::size_t uniform_length = 4;
  // Transversal search budget before falling back to commutator descent.
  std::size_t coset_budget = 256;
  GammaSearchOptions gamma;
};

// Facts at one level that give [<H, h> : H] = p: h lies outside H, h
// normalizes H and h^p lies in H.
struct LevelIndexCheck {
  int level = 0;
  bool outside = false;
  bool normalizes = false;
  bool power_inside = false;
  bool h_in_gamma = false;
  BigInt index = 0;  // p when the three facts hold, 0 otherwise
  BigInt com_index = 0;
  // Exact orders, at levels within the chain limit.
  std::optional<CommCertificate> certificate;
};

struct DistinctnessWitness {
  int against = 0;  // earlier entry j
  int level = 0;
  // h~_j lies outside the level image of H~_i.
  bool outside = false;
};

// A product program over input elements: line j is a product of inputs and
// earlier lines with integer exponents; the value is the last line.
struct StraightLineProgram {
  struct Factor {
    std::size_t ref = 0;  // < inputs: input; otherwise line ref - inputs
    long long exponent = 1;
  };
  std::size_t inputs = 0;
  std::vector<std::vector<Factor>> lines;

  Permutation evaluate(const std::vector<Permutation>& input_perms) const;
  // Length of the expanded word over the inputs.
  BigInt expanded_length() const;
  std::string format(const std::vector<std::string>& input_names) const;
};

struct TowerEntry {
  enum class Method { Uniform, Transversal, Descent };
  int index = 0;
  // gamma = x_star(tuple, depth); a uniform tuple repeats one word.
  int depth = 0;
  std::optional<Word> uniform;
  std::vector<Word> tuple;
  std::size_t gamma_tried = 0;
  int gamma_level = 0;  // gamma lies outside G at this level
  int previous_n = 0;
  int working_level = 0;
  int n = 0;
  // h~ as a program over H's generators followed by gamma.
  StraightLineProgram h;
  Method method = Method::Uniform;
  std::size_t cosets_explored = 0;
  std::size_t transversal_position = 0;
  std::vector<LevelIndexCheck> index_checks;  // levels n..working_level
  bool consistent = false;  // h~ lies in H at previous_n and at depth
  BigInt expected_com_index = 1;
  std::vector<DistinctnessWitness> distinctness;

  Permutation gamma_perm(const SelfSimilarGroup& g, int level) const;
  bool passed() const;
};

std::string to_string(TowerEntry::Method m);

struct Tower {
  int k = 1;
  unsigned p = 2;
  int stab_level = 0;  // m with stab(m) inside K
  int extra_levels = 0;
  // For k >= 2: level N and the generator words of H (Schreier words).
  int base_level = 0;
  std::vector<Word> h_words;
  BigInt h_index = 1;
  bool best_effort = false;
  std::size_t chain_degree = 1024;
  std::vector<TowerEntry> entries;
  std::vector<std::string> diagnostics;

  bool complete(int count) const { return static_cast<int>(entries.size()) == count; }
};

Tower build_extension_tower(const SelfSimilarGroup& g, const TowerOptions& opts = {});

struct TowerReplay {
  bool ok = true;
  std::vector<std::string> failures;
};

// Recomputes every stored claim of the tower from its words and programs.
TowerReplay recheck(const Tower& t, const SelfSimilarGroup& g);

// Input names for printing: H's generators, then "gamma".
std::vector<std::string> tower_input_names(const Tower& t, const SelfSimilarGroup& g);
// gamma as "X^n*(w1, ..., wk)", or "X^n*(w)^k" for a uniform tuple.
std::string format_gamma(const TowerEntry& e, const SelfSimilarGroup& g);

struct FamilyMember {
  long long x = 0;
  long long residue = 0;
  Permutation involution;
  bool order_two = false;
  bool inverts_tau = false;
  BigInt group_order = 1;
  bool index_two = false;
};

struct FamilyReport {
  int level = 0;
  BigInt a_order = 1;
  std::vector<FamilyMember> members;
  // Involutions with distinct residues are distinct at this level.
  bool pairwise_distinct = false;
  // At any finite level tau^x lies in the image of A, so the generated
  // subgroups coincide.
  bool subgroups_coincide = false;
  bool passed() const;
};

// The system {tau, u} with tau = (1, tau)s and u = (u, tau^-1 u).
SelfSimilarGroup adding_machine_with_involution();
FamilyReport adding_machine_family(const std::vector<long long>& xs, int n);

struct DihedralReport {
  int level = 0;
  BigInt order = 1;
  bool delta_involution = false;
  bool inverts_tau = false;
  bool dihedral = false;
  BigInt tau_order = 1;
  std::size_t index_two_subgroups = 0;
  std::optional<BigInt> normalizer_order;
  std::string normalizer_note;
  bool passed() const;
};

DihedralReport dihedral_checks(int n, const SearchOptions& opts = {});

// c with c g c^-1 = h on level n, or nullopt when one of them is not
// transitive on level n.
std::optional<Permutation> conjugate_level_transitive(const Element& g, const Element& h, int n);

}  // namespace ssg
