#pragma once

#include <stdexcept>
#include <string>

namespace prodsat {

// Malformed input: wrong dimensions, indices out of range, bad JSON shape.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A well-formed request the library declines or cannot finish
// (cap exceeded, outside a guaranteed regime, non-convergence).
class Refusal : public std::runtime_error {
public:
    explicit Refusal(const std::string& what) : std::runtime_error(what) {}
};

} // namespace prodsat
