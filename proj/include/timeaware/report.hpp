#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "timeaware/chrono.hpp"
#include "timeaware/statkit.hpp"

namespace timeaware::report {

// Exact header of a results file.
inline constexpr const char* kResultsHeader =
    "dataset,partition,approach,window_start_year,test_year,n_train,n_test,re,mse,tae,"
    "normality_warning,adj_r2,coefficients,removed_ids,dropped_vars";

// Full-precision (shortest round-trip) serialization; absent values are empty.
void write_results(std::ostream& out, const std::vector<EvaluationRow>& rows);
std::vector<EvaluationRow> read_results(std::istream& in);
std::vector<EvaluationRow> read_results_file(const std::string& path);

void write_coefficient_table(std::ostream& out, const CoefficientTable& table);

// Four significant digits, "-" for absent values.
std::string format_sig4(std::optional<double> value);
void write_summary_table(std::ostream& out, const std::vector<EvaluationRow>& rows);

struct MetricComparison {
    std::string metric;  // re, mse, tae
    std::size_t n_pairs = 0;
    std::optional<stats::TestResult> result;  // absent when no pair carries the metric
};

struct RowPair {
    std::size_t a = 0;  // index into the a rows
    std::size_t b = 0;
};

struct ComparisonReport {
    std::vector<RowPair> pairs;
    std::vector<std::string> pairing_log;  // rows left unmatched, and why
    std::vector<MetricComparison> metrics;
};

/// Pairs rows on (dataset, partition, test_year). A key held by a single row
/// on one side pairs that row with every row of the other side; keys with
/// several rows on both sides pair on equal window_start_year. Every row that
/// ends up unpaired is listed in the pairing log. Each metric is then tested
/// with a two-sided paired Wilcoxon signed-rank test over the pairs where
/// both values are present. Throws UsageError when nothing pairs.
ComparisonReport compare_rows(const std::vector<EvaluationRow>& a,
                              const std::vector<EvaluationRow>& b);

void write_comparison(std::ostream& out, const ComparisonReport& report);

}  // namespace timeaware::report
