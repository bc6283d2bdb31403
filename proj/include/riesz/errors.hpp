#pragma once

#include <stdexcept>
#include <string>

namespace riesz {

// Invalid problem parameters (d, s, eta, p, ... out of range).
struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Evaluation at (or too close to) the potential singularity.
struct singularity_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Field fails a positivity/support precondition (log of nonpositive density, ...).
struct field_domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Spectral remainder not resolved on the requested grid.
struct resolution_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solution left the representable regime; carries the time of failure.
struct blowup_error : std::runtime_error {
    double t;
    explicit blowup_error(double time, const std::string& what)
        : std::runtime_error(what), t(time) {}
};

struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace riesz
