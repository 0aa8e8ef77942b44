#include "timeaware/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <tuple>

#include "csv.hpp"
#include "timeaware/errors.hpp"

namespace timeaware::report {

namespace {

std::string quote_if_needed(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (const char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string opt(std::optional<double> value) {
    return value ? csv::format_exact(*value) : std::string();
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : ";") + p;
    return out;
}

std::optional<double> read_opt(const std::string& text, std::size_t line, const char* column) {
    if (text.empty()) return std::nullopt;
    const auto value = csv::parse_double(text);
    if (!value) {
        throw ParseError(line, std::string("non-numeric ") + column + " '" + text + "'");
    }
    return value;
}

template <typename Int>
Int read_int(const std::string& text, std::size_t line, const char* column) {
    const auto value = csv::parse_int(text);
    if (!value) throw ParseError(line, std::string("non-integer ") + column + " '" + text + "'");
    return static_cast<Int>(*value);
}

using PairKey = std::tuple<std::string, std::string, int>;

PairKey key_of(const EvaluationRow& row) { return {row.dataset, row.partition, row.test_year}; }

std::string describe(const EvaluationRow& row) {
    return row.dataset + "/" + row.partition + " " + std::string(to_string(row.approach)) +
           " test " + std::to_string(row.test_year) + " window " +
           std::to_string(row.window_start_year);
}

}  // namespace

void write_results(std::ostream& out, const std::vector<EvaluationRow>& rows) {
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        std::vector<std::string> coefs;
        for (const auto& c : r.coefficients) coefs.push_back(c.name + "=" + csv::format_exact(c.value));
        out << quote_if_needed(r.dataset) << ',' << quote_if_needed(r.partition) << ','
            << to_string(r.approach) << ',' << r.window_start_year << ',' << r.test_year << ','
            << r.n_train << ',' << r.n_test << ',' << opt(r.re) << ',' << opt(r.mse) << ','
            << opt(r.tae) << ',' << (r.normality_warning ? "true" : "false") << ','
            << opt(r.adj_r2) << ',' << quote_if_needed(join(coefs)) << ','
            << quote_if_needed(join(r.removed_ids)) << ',' << quote_if_needed(join(r.dropped_vars))
            << '\n';
    }
}

std::vector<EvaluationRow> read_results(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing results header");
    if (csv::trim(line) != kResultsHeader) throw ParseError(1, "not a results file header");
    std::vector<EvaluationRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split_line(line);
        if (f.size() != 15) {
            throw ParseError(line_no, "expected 15 columns, found " + std::to_string(f.size()));
        }
        EvaluationRow r;
        r.dataset = f[0];
        r.partition = f[1];
        try {
            r.approach = parse_approach(f[2]);
        } catch (const ConfigError& e) {
            throw ParseError(line_no, e.what());
        }
        r.window_start_year = read_int<int>(f[3], line_no, "window_start_year");
        r.test_year = read_int<int>(f[4], line_no, "test_year");
        r.n_train = read_int<std::size_t>(f[5], line_no, "n_train");
        r.n_test = read_int<std::size_t>(f[6], line_no, "n_test");
        r.re = read_opt(f[7], line_no, "re");
        r.mse = read_opt(f[8], line_no, "mse");
        r.tae = read_opt(f[9], line_no, "tae");
        if (f[10] == "true") {
            r.normality_warning = true;
        } else if (f[10] != "false") {
            throw ParseError(line_no, "normality_warning must be true|false");
        }
        r.adj_r2 = read_opt(f[11], line_no, "adj_r2");
        for (const auto& pair : csv::split_plain(f[12], ';')) {
            const auto eq = pair.rfind('=');
            const auto value = eq == std::string::npos ? std::nullopt
                                                       : csv::parse_double(pair.substr(eq + 1));
            if (!value) throw ParseError(line_no, "bad coefficient '" + pair + "'");
            r.coefficients.push_back({pair.substr(0, eq), *value});
        }
        r.removed_ids = csv::split_plain(f[13], ';');
        r.dropped_vars = csv::split_plain(f[14], ';');
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<EvaluationRow> read_results_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read results file '" + path + "'");
    return read_results(in);
}

void write_coefficient_table(std::ostream& out, const CoefficientTable& table) {
    out << "test_year,window_start_year";
    for (const auto& v : table.variables) out << ',' << quote_if_needed(v);
    out << ",adj_r2\n";
    for (const auto& row : table.rows) {
        out << row.test_year << ',' << row.window_start_year;
        for (const auto& v : row.values) out << ',' << opt(v);
        out << ',' << opt(row.adj_r2) << '\n';
    }
}

std::string format_sig4(std::optional<double> value) {
    if (!value) return "-";
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.4g", *value);
    return buffer;
}

void write_summary_table(std::ostream& out, const std::vector<EvaluationRow>& rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %-7s %6s %6s %5s %5s %10s %10s %10s %7s\n",
                  "partition", "approach", "window", "test", "ntr", "nte", "RE", "MSE",
                  "TAE/AE", "adjR2");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-14s %-7s %6d %6d %5zu %5zu %10s %10s %10s %7s%s\n",
                      r.partition.c_str(), std::string(to_string(r.approach)).c_str(),
                      r.window_start_year, r.test_year, r.n_train, r.n_test,
                      format_sig4(r.re).c_str(), format_sig4(r.mse).c_str(),
                      format_sig4(r.tae).c_str(), format_sig4(r.adj_r2).c_str(),
                      r.normality_warning ? "  (non-normal)" : "");
        out << line;
    }
}

ComparisonReport compare_rows(const std::vector<EvaluationRow>& a,
                              const std::vector<EvaluationRow>& b) {
    std::map<PairKey, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
    for (std::size_t i = 0; i < a.size(); ++i) groups[key_of(a[i])].first.push_back(i);
    for (std::size_t j = 0; j < b.size(); ++j) groups[key_of(b[j])].second.push_back(j);

    ComparisonReport report;
    for (const auto& [key, sides] : groups) {
        const auto& [ia, ib] = sides;
        if (ia.empty() || ib.empty()) {
            for (const auto i : ia) report.pairing_log.push_back("a: no counterpart for " + describe(a[i]));
            for (const auto j : ib) report.pairing_log.push_back("b: no counterpart for " + describe(b[j]));
            continue;
        }
        if (ia.size() == 1) {
            for (const auto j : ib) report.pairs.push_back({ia.front(), j});
            continue;
        }
        if (ib.size() == 1) {
            for (const auto i : ia) report.pairs.push_back({i, ib.front()});
            continue;
        }
        std::vector<bool> used_b(ib.size(), false);
        for (const auto i : ia) {
            bool matched = false;
            for (std::size_t k = 0; k < ib.size(); ++k) {
                if (!used_b[k] && b[ib[k]].window_start_year == a[i].window_start_year) {
                    report.pairs.push_back({i, ib[k]});
                    used_b[k] = true;
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                report.pairing_log.push_back("a: no window match for " + describe(a[i]));
            }
        }
        for (std::size_t k = 0; k < ib.size(); ++k) {
            if (!used_b[k]) report.pairing_log.push_back("b: no window match for " + describe(b[ib[k]]));
        }
    }
    if (report.pairs.empty()) throw UsageError("no rows pair between the two result sets");

    const auto metric = [&](const char* name, auto member) {
        MetricComparison mc;
        mc.metric = name;
        std::vector<std::pair<double, double>> values;
        for (const auto& p : report.pairs) {
            const auto& va = a[p.a].*member;
            const auto& vb = b[p.b].*member;
            if (va && vb) values.emplace_back(*va, *vb);
        }
        mc.n_pairs = values.size();
        if (!values.empty()) mc.result = stats::wilcoxon_signed_rank(values);
        report.metrics.push_back(std::move(mc));
    };
    metric("re", &EvaluationRow::re);
    metric("mse", &EvaluationRow::mse);
    metric("tae", &EvaluationRow::tae);
    return report;
}

void write_comparison(std::ostream& out, const ComparisonReport& report) {
    out << "metric,n_pairs,statistic,p_value,exact\n";
    for (const auto& m : report.metrics) {
        out << m.metric << ',' << m.n_pairs << ',';
        if (m.result) {
            out << format_sig4(m.result->statistic) << ',' << format_sig4(m.result->p_value) << ','
                << (m.result->exact ? "true" : "false");
        } else {
            out << "-,-,-";
        }
        out << '\n';
    }
    out << "paired rows: " << report.pairs.size() << '\n';
    for (const auto& entry : report.pairing_log) out << "unmatched: " << entry << '\n';
}

}  // namespace timeaware::report
