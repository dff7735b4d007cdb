#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fbssep {

using Site = std::int64_t;
using Height = std::int64_t;

inline constexpr const char* kVersion = "0.1.0";

// Thrown when a mathematically guaranteed relation (order, identity,
// conservation law) fails at run time. Always indicates a bug.
struct invariant_violation : std::runtime_error {
    explicit invariant_violation(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fbssep
