#pragma once

#include <stdexcept>
#include <string>

namespace hiercheck {

/// Invalid input: bad arguments, malformed data, violated model invariants.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A prior kind that the requested operation cannot use.
class UnsupportedPriorError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// The sampler could not produce draws (degenerate truncation box, divergence).
class SamplerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The partial posterior chain drifted in a way consistent with an improper target.
class ImproprietyError : public SamplerError {
public:
    using SamplerError::SamplerError;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hiercheck
