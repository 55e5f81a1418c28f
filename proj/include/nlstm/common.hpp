#pragma once

#include <stdexcept>
#include <string>

namespace nlstm {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 1, DataError -> 2, DivergenceError -> 3.
// ShapeError and ConsistencyError are programming/contract errors surfaced
// as config-class failures when they escape to the CLI.

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace nlstm
