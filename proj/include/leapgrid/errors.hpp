#pragma once

#include <stdexcept>
#include <string>

namespace leapgrid {

// Case-file / artifact syntax problems.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally invalid grid data (bad references, duplicate ids, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A topology action cannot be applied (disconnection, conflicts).
struct TopologyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Singular linear system inside a solver.
struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Newton-Raphson ran out of iterations; carries the last mismatch seen.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& msg, int iterations_done, double last_mismatch_pu)
        : std::runtime_error(msg), iterations(iterations_done), last_mismatch(last_mismatch_pu) {}
    int iterations;
    double last_mismatch;
};

// Tensor / layer dimension mismatch.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required (losses, gradients).
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dataset generation could not satisfy the requested configuration.
struct DataGenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed persisted artifact (dataset file, metrics CSV, checkpoint).
struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace leapgrid
