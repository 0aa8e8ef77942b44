#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace timeaware::stats {

inline constexpr std::string_view kInterceptName = "(Intercept)";

// Column 0 is the intercept. Rows are observations, identified by row_ids.
struct DesignMatrix {
    std::vector<std::string> column_names;
    Eigen::MatrixXd values;
    Eigen::VectorXd response;
    std::vector<std::string> row_ids;

    Eigen::Index rows() const noexcept { return values.rows(); }
    Eigen::Index cols() const noexcept { return values.cols(); }
    // Explanatory columns, i.e. everything but the intercept.
    std::size_t explanatory_count() const noexcept {
        return column_names.empty() ? 0 : column_names.size() - 1;
    }
    std::optional<std::size_t> column_index(std::string_view name) const;

    // Throws std::invalid_argument on shape mismatch, duplicate names,
    // non-finite entries, or a first column that is not named as the intercept.
    void validate() const;

    DesignMatrix select_columns(const std::vector<std::size_t>& columns) const;
    DesignMatrix drop_rows(const std::vector<std::size_t>& rows) const;
};

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double t_value = 0.0;
    double p_value = 1.0;
};

struct ModelFit {
    std::vector<Coefficient> coefficients;  // design column order
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
    Eigen::VectorXd leverage;
    double r2 = 0.0;
    double adjusted_r2 = 0.0;
    double sigma2 = 0.0;  // residual variance, SSE / (n - p)
    std::size_t n_used = 0;
    std::vector<std::string> row_ids;  // rows the fit actually used
    std::vector<std::string> removed_influential;
    std::vector<std::string> selection_trace;
    std::vector<std::string> notes;

    const Coefficient* find(std::string_view name) const;
    double predict(std::span<const std::pair<std::string, double>> row) const;
};

/// Least squares through a column-pivoted Householder QR.
///
/// Requires n >= p + 1 (p counts the intercept). A column whose pivot falls
/// below 1e-10 of the largest pivot makes the design singular; the error
/// lists the dependent columns. Coefficient p-values are two-sided t-tests on
/// n - p degrees of freedom.
ModelFit fit_ols(const DesignMatrix& design);

// Columns (never column 0) that pivoted QR finds linearly dependent on the
// columns before them in pivot order. Empty for a full-rank design.
std::vector<std::string> aliased_columns(const DesignMatrix& design);

/// Backward elimination on coefficient p-values.
///
/// Repeatedly drops the non-intercept, non-mandatory column with the largest
/// p-value while that p-value exceeds alpha_remove. Mandatory columns are
/// kept whatever their p-value; the fit's notes record each exemption.
ModelFit backward_stepwise(const DesignMatrix& design, double alpha_remove,
                           const std::vector<std::string>& mandatory = {});

struct CooksResult {
    ModelFit fit;
    std::vector<std::string> removed;
    std::vector<double> distances;  // from the initial fit, row order
    double threshold = 0.0;
    std::optional<std::string> warning;
};

// Cook's distance for every row of `fit` against `design` (same rows).
std::vector<double> cooks_distances(const ModelFit& fit, std::size_t parameter_count);

/// One round of influence filtering: rows with D_i > threshold (4/n unless
/// given) are removed and the model refit once. Skipped, with a warning, when
/// removal would leave fewer than explanatory + 2 rows or a singular design.
CooksResult cooks_filter(const DesignMatrix& design, std::optional<double> threshold = {});

enum class TestMethod { shapiro_wilk, mann_whitney_u, wilcoxon_signed_rank };

std::string_view to_string(TestMethod method);

struct TestResult {
    TestMethod method = TestMethod::shapiro_wilk;
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    bool exact = false;
};

// Royston's approximation (AS R94). 3 <= n <= 5000.
TestResult shapiro_wilk(std::span<const double> values);

// Two-sided. statistic is U for sample a. Exact when max(n_a, n_b) <= 8 and
// there are no ties; otherwise normal approximation with tie and continuity
// corrections.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

// Two-sided, on first - second. Zero differences are dropped before ranking;
// statistic is W+. Exact when at most 12 non-zero differences remain with no
// tied magnitudes.
TestResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs);

// Average ranks (1-based) with the tie-group sizes, in input order.
std::vector<double> average_ranks(std::span<const double> values,
                                  std::vector<std::size_t>* tie_sizes = nullptr);

double normal_cdf(double z);
double normal_quantile(double p);

}  // namespace timeaware::stats
