#include "ssg/word.hpp"

#include <numeric>
#include <sstream>

#include "ssg/errors.hpp"

namespace ssg {

RootPerm::RootPerm(int degree) : img_(static_cast<std::size_t>(degree)) {
  std::iota(img_.begin(), img_.end(), 0);
}

RootPerm::RootPerm(std::vector<int> images) : img_(std::move(images)) {
  std::vector<bool> seen(img_.size(), false);
  for (int x : img_) {
    if (x < 0 || static_cast<std::size_t>(x) >= img_.size() || seen[static_cast<std::size_t>(x)]) {
      throw Error("root permutation is not a bijection");
    }
    seen[static_cast<std::size_t>(x)] = true;
  }
}

RootPerm RootPerm::sigma_power(int degree, int e) {
  std::vector<int> img(static_cast<std::size_t>(degree));
  int s = ((e % degree) + degree) % degree;
  for (int x = 0; x < degree; ++x) img[static_cast<std::size_t>(x)] = (x + s) % degree;
  return RootPerm(std::move(img));
}

bool RootPerm::is_identity() const noexcept {
  for (std::size_t i = 0; i < img_.size(); ++i) {
    if (img_[i] != static_cast<int>(i)) return false;
  }
  return true;
}

RootPerm RootPerm::inverse() const {
  std::vector<int> inv(img_.size());
  for (std::size_t i = 0; i < img_.size(); ++i) {
    inv[static_cast<std::size_t>(img_[i])] = static_cast<int>(i);
  }
  RootPerm r;
  r.img_ = std::move(inv);
  return r;
}

int RootPerm::sigma_exponent() const noexcept {
  const int d = degree();
  if (d == 0) return 0;
  const int e = img_[0];
  for (int x = 0; x < d; ++x) {
    if (img_[static_cast<std::size_t>(x)] != (x + e) % d) return -1;
  }
  return e;
}

RootPerm operator*(const RootPerm& p, const RootPerm& q) {
  if (p.img_.size() != q.img_.size()) throw Error("root permutation degree mismatch");
  RootPerm r;
  r.img_.resize(q.img_.size());
  for (std::size_t i = 0; i < q.img_.size(); ++i) {
    r.img_[i] = p.img_[static_cast<std::size_t>(q.img_[i])];
  }
  return r;
}

Word& Word::free_reduce() {
  std::vector<Letter> out;
  out.reserve(letters.size());
  for (Letter l : letters) {
    if (!out.empty() && out.back() == -l) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  letters = std::move(out);
  return *this;
}

Word Word::inverse() const {
  Word w;
  w.letters.reserve(letters.size());
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) w.letters.push_back(-*it);
  return w;
}

Word Word::power(long long e) const {
  const Word base = e < 0 ? inverse() : *this;
  Word w;
  for (long long i = 0; i < (e < 0 ? -e : e); ++i) {
    w.letters.insert(w.letters.end(), base.letters.begin(), base.letters.end());
  }
  return w.free_reduce();
}

Word operator*(const Word& a, const Word& b) {
  Word w;
  w.letters.reserve(a.size() + b.size());
  w.letters = a.letters;
  w.letters.insert(w.letters.end(), b.letters.begin(), b.letters.end());
  return w.free_reduce();
}

std::size_t WordHash::operator()(const Word& w) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (Letter l : w.letters) {
    h ^= static_cast<std::uint32_t>(l);
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t Vertex::index(int degree) const {
  std::uint64_t i = 0;
  for (int x : path) i = i * static_cast<std::uint64_t>(degree) + static_cast<std::uint64_t>(x);
  return i;
}

Vertex Vertex::from_index(std::uint64_t index, int degree, std::size_t level) {
  Vertex v;
  v.path.assign(level, 0);
  for (std::size_t j = level; j-- > 0;) {
    v.path[j] = static_cast<int>(index % static_cast<std::uint64_t>(degree));
    index /= static_cast<std::uint64_t>(degree);
  }
  return v;
}

std::string Vertex::to_string(int degree) const {
  std::ostringstream out;
  for (std::size_t j = 0; j < path.size(); ++j) {
    if (degree > 9 && j != 0) out << '.';
    out << path[j] + 1;
  }
  return out.str();
}

Vertex Vertex::parse(const std::string& text, int degree) {
  Vertex v;
  auto push = [&](int letter) {
    if (letter < 1 || letter > degree) {
      throw Error("vertex letter out of range in '" + text + "'");
    }
    v.path.push_back(letter - 1);
  };
  if (degree > 9) {
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, '.')) {
      if (tok.empty()) continue;
      push(std::stoi(tok));
    }
  } else {
    for (char c : text) {
      if (c < '0' || c > '9') throw Error("malformed vertex '" + text + "'");
      push(c - '0');
    }
  }
  return v;
}

}  // namespace ssg
