#pragma once

#include <stdexcept>
#include <string>

namespace emerge {

// Raised on precondition violations: bad hyperparameters, mismatched sizes,
// malformed files.
class InvalidParameter : public std::invalid_argument {
public:
    explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

// A decoder or segmenter found no hypothesis with nonzero probability.
class NoHypothesis : public std::runtime_error {
public:
    explicit NoHypothesis(const std::string& what) : std::runtime_error(what) {}
};

// Exhaustive enumeration would exceed the configured support bound.
class InstanceTooLarge : public std::runtime_error {
public:
    explicit InstanceTooLarge(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidParameter(what);
}

}  // namespace emerge
