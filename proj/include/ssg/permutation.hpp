#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ssg/bigint.hpp"

namespace ssg {

using Point = std::uint32_t;

// A permutation of {0, ..., N-1}, stored as its image array. Composition
// follows function notation: (p * q)(x) = p(q(x)).
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::size_t degree);
  // Throws ssg::Error unless `images` is a bijection of {0..N-1}.
  explicit Permutation(std::vector<Point> images);

  static Permutation identity(std::size_t degree) { return Permutation(degree); }
  static Permutation from_cycles(std::size_t degree,
                                 const std::vector<std::vector<Point>>& cycles);

  std::size_t degree() const noexcept { return img_.size(); }
  Point operator[](Point x) const noexcept { return img_[x]; }
  std::span<const Point> images() const noexcept { return img_; }

  bool is_identity() const noexcept;
  // Smallest moved point, or degree() when the permutation is trivial.
  Point first_moved_point() const noexcept;

  Permutation inverse() const;
  Permutation pow(long long e) const;
  BigInt order() const;

  // p * q where q is applied first.
  friend Permutation operator*(const Permutation& p, const Permutation& q);
  Permutation& operator*=(const Permutation& q);

  // p^-1 * q * p style conjugation helper: returns c * p * c^-1.
  Permutation conjugated_by(const Permutation& c) const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

  std::string cycle_string() const;

  // Restriction to the first n points; requires {0..n-1} to be invariant.
  Permutation restricted(std::size_t n) const;

 private:
  std::vector<Point> img_;
};

struct PermutationHash {
  std::size_t operator()(const Permutation& p) const noexcept;
};

}  // namespace ssg
