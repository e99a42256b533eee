#pragma once

#include <stdexcept>
#include <string>

namespace bayes_arbiter {

/// Invalid argument for a distribution or operation (negative mean, x <= 0 in log_gamma, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The computation is mathematically undefined for this input, e.g. the
/// 1/lambda prior marginal of an all-zero count sample.
class DegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Improper marginal likelihood (S = 0 under the 1/lambda prior).
class ImproperEvidenceError : public DegeneracyError {
public:
    using DegeneracyError::DegeneracyError;
};

/// A numerical routine did not reach its tolerance. Carries the last estimate.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double estimate)
        : std::runtime_error(what), estimate_(estimate) {}

    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

} // namespace bayes_arbiter
