#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace ssg {

// Group orders and indices. Level quotients of binary trees overflow 64 bits
// from level 7 on.
using BigInt = boost::multiprecision::cpp_int;

inline std::string to_string(const BigInt& n) { return n.str(); }

}  // namespace ssg
