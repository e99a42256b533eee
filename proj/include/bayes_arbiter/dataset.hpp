#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "special.hpp"

namespace bayes_arbiter {

using Count = std::int64_t;

/// Non-empty sample of non-negative integers with cached sufficient statistics.
class CountDataset {
public:
    explicit CountDataset(std::vector<Count> values) : values_(std::move(values)) {
        if (values_.empty()) throw DomainError("CountDataset: at least one observation required");
        for (Count v : values_) {
            if (v < 0) throw DomainError("CountDataset: negative count " + std::to_string(v));
            sum_ += v;
            log_factorial_sum_ += log_factorial(v);
            ++distinct_[v];
        }
    }

    std::span<const Count> values() const noexcept { return values_; }
    std::size_t n() const noexcept { return values_.size(); }
    Count sum() const noexcept { return sum_; }
    double mean() const noexcept { return static_cast<double>(sum_) / static_cast<double>(n()); }
    /// sum_i ln(x_i!)
    double log_factorial_sum() const noexcept { return log_factorial_sum_; }
    /// Distinct values with multiplicities, ascending.
    const std::map<Count, std::size_t>& distinct() const noexcept { return distinct_; }
    bool all_zero() const noexcept { return sum_ == 0; }

private:
    std::vector<Count> values_;
    Count sum_ = 0;
    double log_factorial_sum_ = 0.0;
    std::map<Count, std::size_t> distinct_;
};

} // namespace bayes_arbiter
