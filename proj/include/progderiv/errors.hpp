#pragma once

#include <stdexcept>
#include <string>

namespace progderiv {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed Value construction or canonical-format parse failure.
struct ValueError : Error {
    using Error::Error;
};

// A distance function was applied to values outside its domain.
struct TypeError : Error {
    using Error::Error;
};

// Invalid configuration (bad flag value, violated config invariant).
struct ConfigError : Error {
    using Error::Error;
};

// Harness-side failure talking to a program under test (spawn failure,
// broken pipe plumbing). Distinct from SUT error outputs, which are values.
struct AdapterError : Error {
    using Error::Error;
};

// pd_approx: every sampled neighbor was degenerate.
struct NoNeighborError : Error {
    using Error::Error;
};

// boundary_search: no pair with a positive defined quotient within budget.
struct NoBoundaryFoundError : Error {
    using Error::Error;
};

// heatgrid_diff: grids have mismatched geometry or incompatible provenance.
struct GeometryError : Error {
    using Error::Error;
};

}  // namespace progderiv
