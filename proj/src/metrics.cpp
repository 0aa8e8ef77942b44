#include "timeaware/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace timeaware::metrics {

PredictionSet::PredictionSet(std::vector<double> actual, std::vector<double> estimate)
    : actual_(std::move(actual)), estimate_(std::move(estimate)) {
    if (actual_.size() != estimate_.size()) {
        throw std::invalid_argument("prediction set: actual and estimate lengths differ");
    }
    if (actual_.empty()) throw std::invalid_argument("prediction set is empty");
    for (std::size_t i = 0; i < actual_.size(); ++i) {
        if (!std::isfinite(actual_[i]) || !(actual_[i] > 0.0) || !std::isfinite(estimate_[i]) ||
            !(estimate_[i] > 0.0)) {
            throw std::invalid_argument("prediction set values must be finite and positive");
        }
    }
}

double sample_variance(const std::vector<double>& values) {
    if (values.size() < 2) throw std::invalid_argument("sample variance needs two values");
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(values.size() - 1);
}

std::optional<double> relative_error(const PredictionSet& p) {
    if (p.size() < 2) return std::nullopt;
    const double measured = sample_variance(p.actual());
    if (!(measured > 0.0)) return std::nullopt;
    std::vector<double> residuals(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) residuals[i] = p.actual()[i] - p.estimate()[i];
    return sample_variance(residuals) / measured;
}

std::optional<double> mean_squared_error(const PredictionSet& p) {
    if (p.size() < 2) return std::nullopt;
    double ss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double e = p.actual()[i] - p.estimate()[i];
        ss += e * e;
    }
    return ss / static_cast<double>(p.size());
}

double total_absolute_error(const PredictionSet& p) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += std::fabs(p.actual()[i] - p.estimate()[i]);
    return total;
}

}  // namespace timeaware::metrics
