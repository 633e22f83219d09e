#pragma once

#include <stdexcept>
#include <string>

namespace ptk {

// Base class for numerical failures raised by the library.  Input-shape
// violations use the standard std::invalid_argument / std::domain_error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A free generating function was requested for a map whose B block is singular.
struct FreeConditionViolated : Error {
    using Error::Error;
};

// The implicit solver failed to converge; carries the time of the failed step.
struct StepFailure : Error {
    double time;
    StepFailure(double t, const std::string& message) : Error(message), time(t) {}
};

// A local chart was requested at a point where the position projection is singular.
struct CausticAtPoint : Error {
    using Error::Error;
};

// A caustic crossing that is not transversal at the scan tolerance.
struct NonGenericCaustic : Error {
    using Error::Error;
};

// Scenario files that fail schema validation.  Maps to CLI exit code 2.
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace ptk
