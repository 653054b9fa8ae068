#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ssg {

// Permutation of the alphabet {0, ..., d-1}. Files use 1-based image lists;
// in memory everything is 0-based. Composition: (p * q)(x) = p(q(x)).
class RootPerm {
 public:
  RootPerm() = default;
  explicit RootPerm(int degree);
  // Throws ssg::Error unless `images` is a bijection of {0..d-1}.
  explicit RootPerm(std::vector<int> images);

  static RootPerm identity(int degree) { return RootPerm(degree); }
  // The cycle x -> x+1 mod d raised to the power e.
  static RootPerm sigma_power(int degree, int e);

  int degree() const noexcept { return static_cast<int>(img_.size()); }
  int operator[](int x) const noexcept { return img_[static_cast<std::size_t>(x)]; }
  const std::vector<int>& images() const noexcept { return img_; }
  bool is_identity() const noexcept;
  RootPerm inverse() const;
  // Exponent e with *this == sigma^e, or -1 when it is not a power of sigma.
  int sigma_exponent() const noexcept;

  friend RootPerm operator*(const RootPerm& p, const RootPerm& q);
  friend bool operator==(const RootPerm&, const RootPerm&) = default;
  friend auto operator<=>(const RootPerm&, const RootPerm&) = default;

 private:
  std::vector<int> img_;
};

// Signed generator reference: +(i+1) for generator i, -(i+1) for its inverse.
using Letter = std::int32_t;

inline Letter letter_of(std::size_t generator, bool inverse = false) {
  auto l = static_cast<Letter>(generator + 1);
  return inverse ? -l : l;
}
inline std::size_t generator_of(Letter l) {
  return static_cast<std::size_t>((l < 0 ? -l : l) - 1);
}

// A product s_1 s_2 ... s_k of generators and their inverses. As maps the
// rightmost letter acts first. The empty word is the identity.
struct Word {
  std::vector<Letter> letters;

  Word() = default;
  explicit Word(std::vector<Letter> ls) : letters(std::move(ls)) {}

  bool empty() const noexcept { return letters.empty(); }
  std::size_t size() const noexcept { return letters.size(); }

  // Cancels adjacent x x^-1 pairs until none remain.
  Word& free_reduce();
  Word reduced() const {
    Word w = *this;
    w.free_reduce();
    return w;
  }
  Word inverse() const;
  Word power(long long e) const;

  friend Word operator*(const Word& a, const Word& b);
  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;
};

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept;
};

// A vertex of the tree: a path of 0-based letters from the root.
struct Vertex {
  std::vector<int> path;

  Vertex() = default;
  explicit Vertex(std::vector<int> p) : path(std::move(p)) {}

  std::size_t level() const noexcept { return path.size(); }
  Vertex child(int x) const {
    Vertex v = *this;
    v.path.push_back(x);
    return v;
  }
  // Big-endian lexicographic index among the d^level vertices of its level.
  std::uint64_t index(int degree) const;
  static Vertex from_index(std::uint64_t index, int degree, std::size_t level);

  // 1-based letters; concatenated when d <= 9, dot-separated otherwise. The
  // root prints as the empty string.
  std::string to_string(int degree) const;
  static Vertex parse(const std::string& text, int degree);

  friend bool operator==(const Vertex&, const Vertex&) = default;
  friend auto operator<=>(const Vertex&, const Vertex&) = default;
};

}  // namespace ssg
