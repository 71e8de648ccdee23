#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

// Root of every exception the library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller handed us something unusable (bad flags, bad query text).
struct UsageError : Error {
    using Error::Error;
};

// Input data or an artifact is inconsistent, malformed or missing.
struct DataError : Error {
    using Error::Error;
};

} // namespace cascade
