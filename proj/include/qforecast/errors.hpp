#pragma once

#include <stdexcept>
#include <string>

namespace qforecast {

// Error taxonomy shared by every module. The CLI maps each class to a
// distinct exit code (see cli.hpp).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad call arguments: shape mismatches, empty inputs, invalid tokens.
struct UsageError : Error {
    using Error::Error;
};

// Invalid configuration values: out-of-range qubit counts, infeasible
// fold sizes, nonsense generator settings.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input data while reading external files.
struct IngestError : Error {
    using Error::Error;
};

// Broken internal invariants, e.g. backward called without a forward cache.
struct InternalError : Error {
    using Error::Error;
};

} // namespace qforecast
