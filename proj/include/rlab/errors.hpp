#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

// Input fails a documented precondition (bad mass, bad exponent range, ...).
struct precondition_error : std::domain_error {
    using std::domain_error::domain_error;
};

// A requested evaluation sits on a pole of the reciprocal (periodic support
// and the interval touches a zero of 1 - f).
struct pole_error : std::domain_error {
    using std::domain_error::domain_error;
};

// A scan over a sequence handle found no admissible index in range.
struct subsequence_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Serialized input is malformed.
// A certified postcondition failed to verify numerically.
struct certification_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Root bracketing or refinement failed.
struct root_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive quadrature hit its subdivision depth limit before converging.
struct quadrature_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rlab
