#include "ssg/permutation.hpp"

#include <numeric>
#include <sstream>

#include "ssg/errors.hpp"

namespace ssg {

Permutation::Permutation(std::size_t degree) : img_(degree) {
  std::iota(img_.begin(), img_.end(), Point{0});
}

Permutation::Permutation(std::vector<Point> images) : img_(std::move(images)) {
  std::vector<bool> seen(img_.size(), false);
  for (Point x : img_) {
    if (x >= img_.size() || seen[x]) {
      throw Error("permutation image array is not a bijection");
    }
    seen[x] = true;
  }
}

Permutation Permutation::from_cycles(
    std::size_t degree, const std::vector<std::vector<Point>>& cycles) {
  std::vector<Point> img(degree);
  std::iota(img.begin(), img.end(), Point{0});
  for (const auto& c : cycles) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      img.at(c[i]) = c[(i + 1) % c.size()];
    }
  }
  return Permutation(std::move(img));
}

bool Permutation::is_identity() const noexcept {
  for (std::size_t i = 0; i < img_.size(); ++i) {
    if (img_[i] != i) return false;
  }
  return true;
}

Point Permutation::first_moved_point() const noexcept {
  for (std::size_t i = 0; i < img_.size(); ++i) {
    if (img_[i] != i) return static_cast<Point>(i);
  }
  return static_cast<Point>(img_.size());
}

Permutation Permutation::inverse() const {
  Permutation r;
  r.img_.resize(img_.size());
  for (std::size_t i = 0; i < img_.size(); ++i) {
    r.img_[img_[i]] = static_cast<Point>(i);
  }
  return r;
}

Permutation Permutation::pow(long long e) const {
  Permutation base = e < 0 ? inverse() : *this;
  unsigned long long k = e < 0 ? static_cast<unsigned long long>(-(e + 1)) + 1
                               : static_cast<unsigned long long>(e);
  Permutation result(degree());
  while (k != 0) {
    if (k & 1u) result = result * base;
    base = base * base;
    k >>= 1u;
  }
  return result;
}

BigInt Permutation::order() const {
  BigInt result = 1;
  std::vector<bool> seen(img_.size(), false);
  for (std::size_t i = 0; i < img_.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = img_[j]) {
      seen[j] = true;
      ++len;
    }
    result = boost::multiprecision::lcm(result, BigInt(len));
  }
  return result;
}

Permutation operator*(const Permutation& p, const Permutation& q) {
  if (p.degree() != q.degree()) throw Error("degree mismatch in product");
  Permutation r;
  r.img_.resize(q.img_.size());
  const Point* pi = p.img_.data();
  const Point* qi = q.img_.data();
  Point* ri = r.img_.data();
  for (std::size_t i = 0, n = q.img_.size(); i < n; ++i) ri[i] = pi[qi[i]];
  return r;
}

Permutation& Permutation::operator*=(const Permutation& q) {
  *this = *this * q;
  return *this;
}

Permutation Permutation::conjugated_by(const Permutation& c) const {
  return c * *this * c.inverse();
}

std::string Permutation::cycle_string() const {
  std::ostringstream out;
  std::vector<bool> seen(img_.size(), false);
  bool any = false;
  for (std::size_t i = 0; i < img_.size(); ++i) {
    if (seen[i] || img_[i] == i) continue;
    any = true;
    out << '(';
    for (std::size_t j = i; !seen[j]; j = img_[j]) {
      seen[j] = true;
      if (j != i) out << ' ';
      out << j;
    }
    out << ')';
  }
  if (!any) out << "()";
  return out.str();
}

Permutation Permutation::restricted(std::size_t n) const {
  std::vector<Point> img(img_.begin(), img_.begin() + static_cast<long>(n));
  return Permutation(std::move(img));
}

std::size_t PermutationHash::operator()(const Permutation& p) const noexcept {
  // FNV-1a over the image array.
  std::size_t h = 1469598103934665603ull;
  for (Point x : p.images()) {
    h ^= x;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ssg
