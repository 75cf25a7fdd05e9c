#pragma once

#include <stdexcept>
#include <string>

namespace degctrl {

/// Configuration or precondition problem; CLI exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Region tagging rejected: case invariant does not hold on this mesh.
struct CaseViolation : ValidationError {
    explicit CaseViolation(const std::string& what) : ValidationError(what) {}
};

/// Region tagging rejected: closure of omega not contained in omega0.
struct NestingViolation : ValidationError {
    explicit NestingViolation(const std::string& what) : ValidationError(what) {}
};

/// Linear algebra failure (non-SPD system, CG stagnation); CLI exit code 3.
struct NumericalFailure : std::runtime_error {
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A constructed Carleman weight failed pointwise verification; exit code 4.
struct WeightVerificationFailed : std::runtime_error {
    explicit WeightVerificationFailed(const std::string& what) : std::runtime_error(what) {}
};

/// select_epsilon exhausted its grid without satisfying both inequalities.
struct NoEpsilonFound : std::runtime_error {
    explicit NoEpsilonFound(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace degctrl
