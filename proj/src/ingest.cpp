#include "timeaware/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "csv.hpp"
#include "timeaware/errors.hpp"

namespace timeaware {

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string fmt_value(double value) {
    std::ostringstream os;
    os.precision(6);
    os << value;
    return os.str();
}

constexpr std::array<std::string_view, 6> kCocomoFixedColumns = {"id",   "year",      "center",
                                                                 "mode", "kloc",      "effort_pm"};
constexpr std::array<std::string_view, 5> kFpColumns = {"id", "year_end", "effort_hours",
                                                        "points_adjust", "language"};

std::vector<std::string_view> required_columns(Schema schema) {
    std::vector<std::string_view> cols;
    if (schema == Schema::cocomo81) {
        cols.assign(kCocomoFixedColumns.begin(), kCocomoFixedColumns.end());
        cols.insert(cols.end(), kEffortMultiplierNames.begin(), kEffortMultiplierNames.end());
    } else {
        cols.assign(kFpColumns.begin(), kFpColumns.end());
    }
    return cols;
}

struct RowReader {
    const std::vector<std::string>& fields;
    const std::map<std::string, std::size_t, std::less<>>& index;
    std::size_t line;

    const std::string& text(std::string_view column) const {
        const auto& value = fields[index.find(column)->second];
        if (value.empty()) {
            throw ParseError(line, "empty field '" + std::string(column) + "'");
        }
        return value;
    }

    double number(std::string_view column) const {
        const auto& raw = text(column);
        const auto value = csv::parse_double(raw);
        if (!value || !std::isfinite(*value)) {
            throw ParseError(line, "non-numeric value '" + raw + "' in column '" +
                                       std::string(column) + "'");
        }
        return *value;
    }

    long long integer(std::string_view column) const {
        const auto& raw = text(column);
        if (const auto value = csv::parse_int(raw)) return *value;
        // Accept integral values written as reals, e.g. "1985.0".
        if (const auto real = csv::parse_double(raw); real && std::floor(*real) == *real) {
            return static_cast<long long>(*real);
        }
        throw ParseError(line, "non-integer value '" + raw + "' in column '" +
                                   std::string(column) + "'");
    }
};

int normalize_year(long long raw, const std::string& id) {
    const long long year = raw < 100 && raw >= 0 ? 1900 + raw : raw;
    if (year < 1960 || year > 2100) {
        throw ValidationError(id, "completion year " + std::to_string(raw) +
                                      " outside [1960, 2100]");
    }
    return static_cast<int>(year);
}

void check_positive(const std::string& id, std::string_view what, double value) {
    if (!(value > 0.0)) {
        throw ValidationError(id, std::string(what) + " must be > 0 (got " + fmt_value(value) +
                                      ")");
    }
}

ProjectRecord read_record(const RowReader& row, Schema schema) {
    ProjectRecord rec;
    rec.id = row.text("id");
    if (schema == Schema::cocomo81) {
        rec.completion_year = normalize_year(row.integer("year"), rec.id);
        rec.center = row.text("center");
        try {
            rec.mode = parse_mode(row.text("mode"));
        } catch (const ConfigError& e) {
            throw ParseError(row.line, e.what());
        }
        rec.size = row.number("kloc");
        rec.effort = row.number("effort_pm");
        EffortMultipliers ems{};
        for (std::size_t j = 0; j < kEffortMultiplierCount; ++j) {
            ems[j] = row.number(kEffortMultiplierNames[j]);
            check_positive(rec.id, kEffortMultiplierNames[j], ems[j]);
        }
        rec.effort_multipliers = ems;
    } else {
        rec.completion_year = normalize_year(row.integer("year_end"), rec.id);
        rec.effort = row.number("effort_hours");
        rec.size = row.number("points_adjust");
        const auto language = row.integer("language");
        if (language < 1 || language > 3) {
            throw ValidationError(rec.id, "language level " + std::to_string(language) +
                                              " not in {1,2,3}");
        }
        rec.language = static_cast<int>(language);
    }
    check_positive(rec.id, "size", rec.size);
    check_positive(rec.id, "effort", rec.effort);
    return rec;
}

bool is_numeric_id(std::string_view id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
    });
}

Dataset with_records(const Dataset& like, std::vector<ProjectRecord> records) {
    Dataset out;
    out.name = like.name;
    out.partition = like.partition;
    out.schema = like.schema;
    out.size_unit = like.size_unit;
    out.effort_unit = like.effort_unit;
    out.records = std::move(records);
    return out;
}

double field_of(const ProjectRecord& rec, DistributionField field) {
    return field == DistributionField::effort ? rec.effort : rec.size;
}

bool parse_switch(std::string_view key, std::string_view value) {
    const auto v = lower(value);
    if (v == "on") return true;
    if (v == "off") return false;
    throw ConfigError("partition spec: '" + std::string(key) + "' must be on|off, got '" +
                      std::string(value) + "'");
}

}  // namespace

Schema parse_schema(std::string_view tag) {
    if (tag == "cocomo81") return Schema::cocomo81;
    if (tag == "fp_language") return Schema::fp_language;
    throw ConfigError("unknown schema '" + std::string(tag) + "' (expected cocomo81|fp_language)");
}

std::string_view to_string(Schema schema) {
    return schema == Schema::cocomo81 ? "cocomo81" : "fp_language";
}

std::string_view to_string(DevelopmentMode mode) {
    switch (mode) {
        case DevelopmentMode::organic:
            return "organic";
        case DevelopmentMode::semidetached:
            return "semidetached";
        case DevelopmentMode::embedded:
            return "embedded";
    }
    return "?";
}

std::string_view to_string(DistributionField field) {
    return field == DistributionField::effort ? "effort" : "size";
}

DevelopmentMode parse_mode(std::string_view text) {
    const auto v = lower(csv::trim(text));
    if (v == "organic") return DevelopmentMode::organic;
    if (v == "semidetached" || v == "semi-detached") return DevelopmentMode::semidetached;
    if (v == "embedded") return DevelopmentMode::embedded;
    throw ConfigError("unknown development mode '" + std::string(text) + "'");
}

DistributionField parse_distribution_field(std::string_view text) {
    const auto v = lower(csv::trim(text));
    if (v == "effort") return DistributionField::effort;
    if (v == "size") return DistributionField::size;
    throw ConfigError("unknown distribution field '" + std::string(text) +
                      "' (expected effort|size)");
}

bool id_less(std::string_view a, std::string_view b) {
    const bool na = is_numeric_id(a);
    const bool nb = is_numeric_id(b);
    if (na && nb) {
        const auto strip = [](std::string_view s) {
            const auto pos = s.find_first_not_of('0');
            return pos == std::string_view::npos ? std::string_view("0") : s.substr(pos);
        };
        const auto sa = strip(a);
        const auto sb = strip(b);
        if (sa.size() != sb.size()) return sa.size() < sb.size();
        if (sa != sb) return sa < sb;
        return a < b;  // "007" vs "7": still total
    }
    if (na != nb) return na;
    return a < b;
}

bool record_less(const ProjectRecord& a, const ProjectRecord& b) {
    if (a.completion_year != b.completion_year) return a.completion_year < b.completion_year;
    return id_less(a.id, b.id);
}

std::vector<int> Dataset::years() const {
    std::vector<int> out;
    for (const auto& rec : records) {
        if (out.empty() || out.back() != rec.completion_year) out.push_back(rec.completion_year);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

const ProjectRecord& Dataset::find(std::string_view id) const {
    const auto it = std::find_if(records.begin(), records.end(),
                                 [&](const ProjectRecord& r) { return r.id == id; });
    if (it == records.end()) {
        throw std::out_of_range("no record with id '" + std::string(id) + "'");
    }
    return *it;
}

void ExclusionLog::append(const ExclusionLog& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

Dataset load_dataset(std::istream& in, Schema schema, std::string name,
                     std::vector<std::string>* warnings) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(1, "missing header row");
    ++line_no;
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

    const auto header = csv::split_line(line);
    std::map<std::string, std::size_t, std::less<>> index;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!index.emplace(header[i], i).second) {
            throw ParseError(1, "duplicate column '" + header[i] + "'");
        }
    }
    const auto required = required_columns(schema);
    for (const auto col : required) {
        if (!index.contains(col)) {
            throw ParseError(1, "missing column '" + std::string(col) + "' for schema " +
                                    std::string(to_string(schema)));
        }
    }
    if (warnings) {
        for (const auto& col : header) {
            if (std::find(required.begin(), required.end(), col) == required.end()) {
                warnings->push_back("ignoring column '" + col + "'");
            }
        }
    }

    Dataset ds;
    ds.name = std::move(name);
    ds.schema = schema;
    if (schema == Schema::cocomo81) {
        ds.size_unit = "KLOC";
        ds.effort_unit = "person-months";
    } else {
        ds.size_unit = "adjusted function points";
        ds.effort_unit = "person-hours";
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != header.size()) {
            throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                          " columns, found " + std::to_string(fields.size()));
        }
        ds.records.push_back(read_record(RowReader{fields, index, line_no}, schema));
    }
    if (ds.records.empty()) throw DataError("dataset '" + ds.name + "' has no data rows");

    std::stable_sort(ds.records.begin(), ds.records.end(), record_less);
    for (std::size_t i = 1; i < ds.records.size(); ++i) {
        const auto& a = ds.records[i - 1];
        const auto& b = ds.records[i];
        if (a.id == b.id) throw ValidationError(b.id, "duplicate record id");
    }
    // Duplicate ids in different years are not adjacent after sorting.
    std::vector<std::string_view> ids;
    ids.reserve(ds.records.size());
    for (const auto& rec : ds.records) ids.push_back(rec.id);
    std::sort(ids.begin(), ids.end());
    if (const auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end()) {
        throw ValidationError(std::string(*dup), "duplicate record id");
    }
    return ds;
}

Dataset load_dataset_file(const std::string& path, Schema schema,
                          std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read dataset file '" + path + "'");
    auto stem = path;
    if (const auto slash = stem.find_last_of("/\\"); slash != std::string::npos) {
        stem = stem.substr(slash + 1);
    }
    if (const auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) {
        stem = stem.substr(0, dot);
    }
    return load_dataset(in, schema, stem, warnings);
}

double quantile_type7(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InsufficientDataError("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

DistributionSummary summarize_values(std::span<const double> values) {
    if (values.size() < 5) {
        throw InsufficientDataError("distribution summary needs at least 5 values, got " +
                                    std::to_string(values.size()));
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    DistributionSummary s;
    s.min = sorted.front();
    s.max = sorted.back();
    s.q1 = quantile_type7(sorted, 0.25);
    s.median = quantile_type7(sorted, 0.5);
    s.q3 = quantile_type7(sorted, 0.75);
    const double iqr = s.q3 - s.q1;
    s.lower_fence = s.q1 - 1.5 * iqr;
    s.upper_fence = s.q3 + 1.5 * iqr;
    return s;
}

std::vector<double> field_values(const Dataset& dataset, DistributionField field) {
    std::vector<double> out;
    out.reserve(dataset.size());
    for (const auto& rec : dataset.records) out.push_back(field_of(rec, field));
    return out;
}

DistributionSummary summarize_distribution(const Dataset& dataset, DistributionField field) {
    return summarize_values(field_values(dataset, field));
}

FilterResult filter_iqr_outliers(const Dataset& dataset, DistributionField field) {
    const auto values = field_values(dataset, field);
    const auto summary = summarize_values(values);

    FilterResult result{with_records(dataset, {}), {}};
    for (const auto& rec : dataset.records) {
        const double v = field_of(rec, field);
        if (v < summary.lower_fence) {
            result.log.entries.push_back({rec.id, "iqr_outlier",
                                          std::string(to_string(field)) + " " + fmt_value(v) +
                                              " below lower fence " +
                                              fmt_value(summary.lower_fence)});
        } else if (v > summary.upper_fence) {
            result.log.entries.push_back({rec.id, "iqr_outlier",
                                          std::string(to_string(field)) + " " + fmt_value(v) +
                                              " above upper fence " +
                                              fmt_value(summary.upper_fence)});
        } else {
            result.dataset.records.push_back(rec);
        }
    }
    return result;
}

FilterResult filter_atypical(const Dataset& dataset) {
    if (dataset.schema != Schema::cocomo81) {
        throw ConfigError("atypical-project rules are defined for the cocomo81 schema only");
    }
    FilterResult result{with_records(dataset, {}), {}};

    std::vector<const ProjectRecord*> kept;
    for (const auto& rec : dataset.records) {
        if (rec.size > rec.effort) {
            result.log.entries.push_back({rec.id, "atypical_size_exceeds_effort",
                                          "size " + fmt_value(rec.size) + " > effort " +
                                              fmt_value(rec.effort)});
        } else {
            kept.push_back(&rec);
        }
    }

    // Rule (b): a single productivity (effort / size) far above everything else.
    const ProjectRecord* flagged = nullptr;
    if (kept.size() >= 2) {
        std::vector<double> productivity;
        productivity.reserve(kept.size());
        for (const auto* rec : kept) productivity.push_back(rec->effort / rec->size);
        const double mean =
            std::accumulate(productivity.begin(), productivity.end(), 0.0) /
            static_cast<double>(productivity.size());
        const auto top = std::max_element(productivity.begin(), productivity.end());
        double runner_up = -1.0;
        for (auto it = productivity.begin(); it != productivity.end(); ++it) {
            if (it != top) runner_up = std::max(runner_up, *it);
        }
        if (*top > 2.0 * runner_up && *top > 10.0 * mean) {
            flagged = kept[static_cast<std::size_t>(top - productivity.begin())];
            result.log.entries.push_back(
                {flagged->id, "atypical_productivity",
                 "productivity " + fmt_value(*top) + " > 2 x next highest " +
                     fmt_value(runner_up) + " and > 10 x mean " + fmt_value(mean)});
        }
    }

    for (const auto* rec : kept) {
        if (rec != flagged) result.dataset.records.push_back(*rec);
    }
    if (result.dataset.records.empty()) {
        throw EmptyPartitionError("atypical filter removed every record of '" + dataset.name +
                                  "'");
    }
    return result;
}

FilterResult apply_partition(const Dataset& dataset, const PartitionSpec& spec) {
    // Validate everything before doing any work.
    struct Predicate {
        std::string field;
        std::string value;
        std::function<bool(const ProjectRecord&)> keep;
    };
    std::vector<Predicate> predicates;
    for (const auto& [field, value] : spec.categorical_filters) {
        if (field == "center") {
            if (dataset.schema != Schema::cocomo81) {
                throw ConfigError("partition '" + spec.name +
                                  "': field 'center' does not exist in the fp_language schema");
            }
            predicates.push_back({field, value, [v = value](const ProjectRecord& r) {
                                      return r.center && *r.center == v;
                                  }});
        } else if (field == "mode") {
            if (dataset.schema != Schema::cocomo81) {
                throw ConfigError("partition '" + spec.name +
                                  "': field 'mode' does not exist in the fp_language schema");
            }
            const auto mode = parse_mode(value);
            predicates.push_back({field, value, [mode](const ProjectRecord& r) {
                                      return r.mode && *r.mode == mode;
                                  }});
        } else if (field == "language") {
            if (dataset.schema != Schema::fp_language) {
                throw ConfigError("partition '" + spec.name +
                                  "': field 'language' does not exist in the cocomo81 schema");
            }
            const auto level = csv::parse_int(value);
            if (!level || *level < 1 || *level > 3) {
                throw ConfigError("partition '" + spec.name + "': language must be 1, 2 or 3");
            }
            predicates.push_back({field, value, [lvl = static_cast<int>(*level)](
                                                    const ProjectRecord& r) {
                                      return r.language && *r.language == lvl;
                                  }});
        } else {
            throw ConfigError("partition '" + spec.name + "': unknown filter field '" + field +
                              "'");
        }
    }
    if (spec.apply_atypical_filter && dataset.schema != Schema::cocomo81) {
        throw ConfigError("partition '" + spec.name +
                          "': atypical_filter is only defined for cocomo81");
    }

    FilterResult result{dataset, {}};
    result.dataset.partition = spec.name;

    if (spec.apply_atypical_filter) {
        auto step = filter_atypical(result.dataset);
        result.dataset = std::move(step.dataset);
        result.log.append(step.log);
    }

    std::vector<ProjectRecord> kept;
    for (const auto& rec : result.dataset.records) {
        if (spec.year_min && rec.completion_year < *spec.year_min) {
            result.log.entries.push_back({rec.id, "year_min",
                                          "completed " + std::to_string(rec.completion_year) +
                                              " before " + std::to_string(*spec.year_min)});
            continue;
        }
        const auto failed = std::find_if(predicates.begin(), predicates.end(),
                                         [&](const Predicate& p) { return !p.keep(rec); });
        if (failed != predicates.end()) {
            result.log.entries.push_back(
                {rec.id, failed->field, failed->field + " != " + failed->value});
            continue;
        }
        kept.push_back(rec);
    }
    result.dataset.records = std::move(kept);
    if (result.dataset.records.empty()) {
        throw EmptyPartitionError("partition '" + spec.name + "' of '" + dataset.name +
                                  "' is empty");
    }

    if (spec.apply_iqr_filter) {
        auto step = filter_iqr_outliers(result.dataset, spec.iqr_field);
        result.dataset = std::move(step.dataset);
        result.log.append(step.log);
    }
    return result;
}

std::vector<PartitionSpec> parse_partition_specs(std::istream& in) {
    std::vector<PartitionSpec> specs;
    std::vector<std::string> seen_keys;
    bool named = false;
    std::string line;
    std::size_t line_no = 0;

    const auto start_block = [&] {
        specs.emplace_back();
        seen_keys.clear();
        named = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        auto text = csv::trim(line);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = csv::trim(text.substr(0, hash));
        }
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("partition spec line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const auto key = lower(csv::trim(text.substr(0, eq)));
        const auto value = std::string(csv::trim(text.substr(eq + 1)));
        const auto where = "partition spec line " + std::to_string(line_no);
        if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");

        if (key == "name") {
            if (specs.empty() || named) start_block();
        } else if (specs.empty()) {
            start_block();
        }
        if (std::find(seen_keys.begin(), seen_keys.end(), key) != seen_keys.end()) {
            throw ConfigError(where + ": duplicate key '" + key + "'");
        }
        seen_keys.push_back(key);
        auto& spec = specs.back();

        if (key == "name") {
            if (value.find_first_of(",;/\\") != std::string::npos) {
                throw ConfigError(where + ": partition name may not contain , ; / or \\");
            }
            spec.name = value;
            named = true;
        } else if (key == "year_min") {
            const auto year = csv::parse_int(value);
            if (!year) throw ConfigError(where + ": year_min must be an integer");
            spec.year_min = static_cast<int>(*year < 100 ? 1900 + *year : *year);
        } else if (key == "center" || key == "mode" || key == "language") {
            if (key == "mode") parse_mode(value);
            spec.categorical_filters.emplace_back(key, value);
        } else if (key == "iqr_filter") {
            spec.apply_iqr_filter = parse_switch(key, value);
        } else if (key == "iqr_field") {
            spec.iqr_field = parse_distribution_field(value);
        } else if (key == "atypical_filter") {
            spec.apply_atypical_filter = parse_switch(key, value);
        } else {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }

    std::vector<std::string> names;
    for (const auto& spec : specs) names.push_back(spec.name);
    std::sort(names.begin(), names.end());
    if (const auto dup = std::adjacent_find(names.begin(), names.end()); dup != names.end()) {
        throw ConfigError("partition spec: duplicate partition name '" + *dup + "'");
    }
    return specs;
}

std::vector<PartitionSpec> load_partition_specs_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read partition spec file '" + path + "'");
    auto specs = parse_partition_specs(in);
    if (specs.empty()) throw ConfigError("partition spec file '" + path + "' defines nothing");
    return specs;
}

void write_exclusion_log(std::ostream& out, const ExclusionLog& log) {
    out << "id,rule,reason\n";
    for (const auto& e : log.entries) {
        out << e.id << ',' << e.rule << ',' << e.reason << '\n';
    }
}

}  // namespace timeaware
