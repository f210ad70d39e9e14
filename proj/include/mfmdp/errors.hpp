#ifndef MFMDP_ERRORS_HPP
#define MFMDP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mfmdp {

// Error taxonomy mirrors the CLI exit codes:
//   UsageError -> 2, ModelError -> 3, ResourceError -> 4, InvariantError -> 5.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad model data, contract violations on inputs, mismatched spaces/artifacts.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configured caps exceeded (grid size, kernel enumeration, search space).
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal invariant broke (mass drift, contraction failure, ...). Always a bug
// or a numerical breakdown, never a user error.
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void invariant(bool cond, const std::string& msg) {
    if (!cond) throw InvariantError(msg);
}

}  // namespace mfmdp

#endif
