#pragma once

#include <stdexcept>

namespace rdopt {

// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed scalar, polynomial, or report text.
struct parse_error : error {
    using error::error;
};

// Morphism plumbing mismatch: wrong arity or block size.
struct arity_error : error {
    using error::error;
};

// Operation not defined for the requested domain kind.
struct domain_error : error {
    using error::error;
};

// Objective contract violation (codomain arity, missing or wrong gradient inverse).
struct objective_error : error {
    using error::error;
};

// Element outside the domain's carrier (NaN, non-finite parse result).
struct invalid_element : error {
    using error::error;
};

} // namespace rdopt
