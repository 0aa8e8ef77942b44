#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace timeaware {

enum class Schema { cocomo81, fp_language };

enum class DevelopmentMode { organic, semidetached, embedded };

enum class DistributionField { effort, size };

// Throws ConfigError for anything other than "cocomo81" / "fp_language".
Schema parse_schema(std::string_view tag);
std::string_view to_string(Schema schema);
std::string_view to_string(DevelopmentMode mode);
std::string_view to_string(DistributionField field);
DevelopmentMode parse_mode(std::string_view text);
DistributionField parse_distribution_field(std::string_view text);

inline constexpr std::size_t kEffortMultiplierCount = 15;

// COCOMO81 cost drivers in the order the loader expects them.
inline constexpr std::array<std::string_view, kEffortMultiplierCount> kEffortMultiplierNames = {
    "rely", "data", "cplx", "time", "stor", "virt", "turn", "acap",
    "aexp", "pcap", "vexp", "lexp", "modp", "tool", "sced"};

using EffortMultipliers = std::array<double, kEffortMultiplierCount>;

struct ProjectRecord {
    std::string id;
    int completion_year = 0;
    double size = 0.0;    // KLOC or adjusted function points
    double effort = 0.0;  // person-months or person-hours
    std::optional<DevelopmentMode> mode;
    std::optional<std::string> center;
    std::optional<int> language;
    std::optional<std::string> app_type;
    std::optional<EffortMultipliers> effort_multipliers;

    friend bool operator==(const ProjectRecord&, const ProjectRecord&) = default;
};

// Ids that both parse as non-negative integers compare numerically,
// everything else lexicographically. Numeric ids sort before textual ones.
bool id_less(std::string_view a, std::string_view b);

// The (completion_year, id) order every Dataset is kept in.
bool record_less(const ProjectRecord& a, const ProjectRecord& b);

struct Dataset {
    std::string name;
    std::string partition = "all";
    Schema schema = Schema::cocomo81;
    std::string size_unit;
    std::string effort_unit;
    std::vector<ProjectRecord> records;

    std::size_t size() const noexcept { return records.size(); }
    // Distinct completion years, ascending.
    std::vector<int> years() const;
    const ProjectRecord& find(std::string_view id) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct ExclusionEntry {
    std::string id;
    std::string rule;
    std::string reason;

    friend bool operator==(const ExclusionEntry&, const ExclusionEntry&) = default;
};

struct ExclusionLog {
    std::vector<ExclusionEntry> entries;

    void append(const ExclusionLog& other);
    std::size_t size() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }
};

struct FilterResult {
    Dataset dataset;
    ExclusionLog log;
};

struct PartitionSpec {
    std::string name = "all";
    std::optional<int> year_min;
    // (field, required value); fields: center, mode, language
    std::vector<std::pair<std::string, std::string>> categorical_filters;
    bool apply_iqr_filter = false;
    DistributionField iqr_field = DistributionField::effort;
    bool apply_atypical_filter = false;
};

/// Parses a header-bearing comma-separated stream under `schema`.
///
/// Rows come back sorted by (completion_year, id). Columns the schema does
/// not use are ignored and reported through `warnings` when it is non-null.
/// Two-digit years are read as 19xx.
Dataset load_dataset(std::istream& in, Schema schema, std::string name = "dataset",
                     std::vector<std::string>* warnings = nullptr);

Dataset load_dataset_file(const std::string& path, Schema schema,
                          std::vector<std::string>* warnings = nullptr);

/// Applies, in order: the atypical-project rules over the whole input
/// (when enabled), the year and categorical filters, then the IQR filter on
/// what is left. Each removed record is logged once, under the first rule
/// that removed it.
FilterResult apply_partition(const Dataset& dataset, const PartitionSpec& spec);

/// Single pass: fences come from the input and are not recomputed after
/// removal, so a second call may still remove records.
FilterResult filter_iqr_outliers(const Dataset& dataset, DistributionField field);

FilterResult filter_atypical(const Dataset& dataset);

struct DistributionSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double lower_fence = 0.0;
    double upper_fence = 0.0;
};

// Linear interpolation between order statistics (R type 7). p in [0, 1].
double quantile_type7(std::span<const double> sorted, double p);

DistributionSummary summarize_values(std::span<const double> values);
DistributionSummary summarize_distribution(const Dataset& dataset, DistributionField field);

std::vector<double> field_values(const Dataset& dataset, DistributionField field);

std::vector<PartitionSpec> parse_partition_specs(std::istream& in);
std::vector<PartitionSpec> load_partition_specs_file(const std::string& path);

void write_exclusion_log(std::ostream& out, const ExclusionLog& log);

}  // namespace timeaware
