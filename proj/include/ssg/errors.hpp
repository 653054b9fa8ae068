#pragma once

#include <stdexcept>
#include <string>
#include <variant>

namespace ssg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the recursion file parser. `location` is a JSON pointer into the
// document, optionally followed by a token index.
class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& what)
      : Error(location.empty() ? what : location + ": " + what),
        location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

// A computation ran out of its configured budget. This is a value, not an
// exception: callers decide whether it is fatal.
struct Inconclusive {
  std::string stage;
  std::string reason;
};

template <class T>
using Outcome = std::variant<T, Inconclusive>;

template <class T>
bool is_inconclusive(const Outcome<T>& o) {
  return std::holds_alternative<Inconclusive>(o);
}

}  // namespace ssg
