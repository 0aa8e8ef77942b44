#pragma once

#include <optional>
#include <vector>

namespace timeaware::metrics {

// Recorded vs. estimated efforts, paired by index, on the raw scale.
class PredictionSet {
public:
    // Throws std::invalid_argument unless both vectors have the same length
    // n >= 1 and every value is finite and positive.
    PredictionSet(std::vector<double> actual, std::vector<double> estimate);

    const std::vector<double>& actual() const noexcept { return actual_; }
    const std::vector<double>& estimate() const noexcept { return estimate_; }
    std::size_t size() const noexcept { return actual_.size(); }

private:
    std::vector<double> actual_;
    std::vector<double> estimate_;
};

// Sample variance with the n - 1 denominator. Requires at least two values.
double sample_variance(const std::vector<double>& values);

// var(actual - estimate) / var(actual); absent for n < 2 or constant actuals.
std::optional<double> relative_error(const PredictionSet& p);

// (1/n) sum (actual - estimate)^2; absent for n = 1.
std::optional<double> mean_squared_error(const PredictionSet& p);

// sum |actual - estimate|. For a single project this is its absolute error.
double total_absolute_error(const PredictionSet& p);

}  // namespace timeaware::metrics
