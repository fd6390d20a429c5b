#pragma once

#include <stdexcept>
#include <string>

namespace ristrack {

/// Operand sizes do not agree.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Positions that do not define a valid link (coincident points, zero distance).
struct GeometryError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Every particle weight vanished; the caller decides how to recover.
struct DegenerateWeightsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ristrack
