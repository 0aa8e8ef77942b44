#include "timeaware/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "csv.hpp"
#include "timeaware/errors.hpp"
#include "timeaware/report.hpp"
#include "timeaware/statkit.hpp"

namespace timeaware::cli {

namespace fs = std::filesystem;

namespace {

struct PartitionOutcome {
    Dataset dataset;
    ExclusionLog exclusions;
    ModelForm form = ModelForm::fp_dummy;
    std::vector<std::pair<Approach, std::vector<EvaluationRow>>> results;
    std::string distribution_csv;
};

std::string distribution_report(const Dataset& full, const Dataset& part) {
    std::ostringstream os;
    os << "field,n,min,q1,median,q3,max,lower_fence,upper_fence\n";
    for (const auto field : {DistributionField::effort, DistributionField::size}) {
        os << to_string(field) << ',' << part.size();
        if (part.size() >= 5) {
            const auto s = summarize_distribution(part, field);
            for (const double v : {s.min, s.q1, s.median, s.q3, s.max, s.lower_fence, s.upper_fence}) {
                os << ',' << csv::format_exact(v);
            }
        } else {
            os << ",,,,,,,";
        }
        os << '\n';
    }
    // Does the partition's effort look like the rest of the dataset?
    std::vector<double> inside = field_values(part, DistributionField::effort);
    std::vector<double> rest;
    for (const auto& rec : full.records) {
        const bool in_part = std::any_of(part.records.begin(), part.records.end(),
                                         [&](const ProjectRecord& r) { return r.id == rec.id; });
        if (!in_part) rest.push_back(rec.effort);
    }
    os << "\ncomparison,n_partition,n_rest,u,p_value,exact,same_distribution\n";
    if (!rest.empty()) {
        const auto mw = stats::mann_whitney_u(inside, rest);
        os << "mann_whitney_vs_rest," << inside.size() << ',' << rest.size() << ','
           << csv::format_exact(mw.statistic) << ',' << csv::format_exact(mw.p_value) << ','
           << (mw.exact ? "true" : "false") << ',' << (mw.p_value > 0.05 ? "true" : "false")
           << '\n';
    }
    return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
}

}  // namespace

std::string results_file_name(const std::string& partition, Approach approach) {
    return "results_" + partition + "_" + std::string(to_string(approach)) + ".csv";
}

std::string coefficients_file_name(const std::string& partition, Approach approach) {
    return "coefficients_" + partition + "_" + std::string(to_string(approach)) + ".csv";
}

std::string exclusions_file_name(const std::string& partition) {
    return "exclusions_" + partition + ".csv";
}

int run_command(const RunConfig& config, std::ostream& log) {
    std::vector<std::string> warnings;
    std::vector<PartitionOutcome> outcomes;
    try {
        if (config.approaches.empty()) throw ConfigError("no approach given");
        if (config.out_dir.empty()) throw ConfigError("no output directory given");
        if (!(config.alpha_remove > 0.0 && config.alpha_remove < 1.0)) {
            throw ConfigError("--alpha-remove must lie in (0, 1)");
        }
        if (config.form) {
            const bool cocomo_form = *config.form == ModelForm::cocomo;
            if (cocomo_form != (config.schema == Schema::cocomo81)) {
                throw ConfigError("model form " + std::string(to_string(*config.form)) +
                                  " does not fit schema " + std::string(to_string(config.schema)));
            }
        }
        std::vector<PartitionSpec> partitions;
        if (config.partitions_path) {
            partitions = load_partition_specs_file(*config.partitions_path);
        } else {
            partitions.emplace_back();
        }

        std::vector<std::string> load_warnings;
        const auto dataset = load_dataset_file(config.dataset_path, config.schema, &load_warnings);
        for (const auto& w : load_warnings) warnings.push_back(dataset.name + ": " + w);

        std::size_t total_rows = 0;
        for (const auto& partition : partitions) {
            auto filtered = apply_partition(dataset, partition);
            PartitionOutcome outcome;
            outcome.form = config.form.value_or(default_form(config.schema, partition));
            auto spec = ModelSpec::for_form(outcome.form);
            spec.alpha_remove = config.alpha_remove;
            spec.cooks_threshold = config.cooks_threshold;
            spec.influence_filter = config.influence_filter;
            spec.validate();
            outcome.distribution_csv = distribution_report(dataset, filtered.dataset);

            for (const auto approach : config.approaches) {
                std::vector<EvaluationRow> rows;
                try {
                    const auto folds = schedule(filtered.dataset, approach, spec, &warnings);
                    for (const auto& fold : folds) {
                        FoldDiagnostics diag;
                        rows.push_back(run_fold(fold, filtered.dataset, spec, &diag));
                        for (const auto& w : diag.warnings) {
                            warnings.push_back(partition.name + " " +
                                               std::string(to_string(approach)) + " test " +
                                               std::to_string(fold.test_year) + " window " +
                                               std::to_string(fold.window_start_year) + ": " + w);
                        }
                    }
                } catch (const NoFoldsError& e) {
                    warnings.push_back(std::string(to_string(approach)) + ": " + e.what());
                }
                total_rows += rows.size();
                outcome.results.emplace_back(approach, std::move(rows));
            }
            outcome.dataset = std::move(filtered.dataset);
            outcome.exclusions = std::move(filtered.log);
            outcomes.push_back(std::move(outcome));
        }
        if (total_rows == 0) throw NoFoldsError("no folds could be generated for any partition");
    } catch (const ConfigError& e) {
        log << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        log << "data error: " << e.what() << '\n';
        return kExitData;
    }

    try {
        const fs::path out_dir(config.out_dir);
        fs::create_directories(out_dir);
        for (const auto& outcome : outcomes) {
            const auto& name = outcome.dataset.partition;
            std::ostringstream excl;
            write_exclusion_log(excl, outcome.exclusions);
            write_file(out_dir / exclusions_file_name(name), excl.str());
            write_file(out_dir / ("distribution_" + name + ".csv"), outcome.distribution_csv);
            for (const auto& [approach, rows] : outcome.results) {
                std::ostringstream res;
                report::write_results(res, rows);
                write_file(out_dir / results_file_name(name, approach), res.str());
                std::ostringstream coef;
                report::write_coefficient_table(coef, fit_summary_series(rows));
                write_file(out_dir / coefficients_file_name(name, approach), coef.str());
            }
        }
        std::ostringstream warn;
        for (const auto& w : warnings) warn << w << '\n';
        write_file(out_dir / "warnings.txt", warn.str());
    } catch (const std::exception& e) {
        log << "data error: " << e.what() << '\n';
        return kExitData;
    }

    for (const auto& outcome : outcomes) {
        log << outcome.dataset.name << " / " << outcome.dataset.partition << ": "
            << outcome.dataset.size() << " projects, " << outcome.exclusions.size()
            << " excluded, form " << to_string(outcome.form) << '\n';
        for (const auto& [approach, rows] : outcome.results) {
            if (!rows.empty()) report::write_summary_table(log, rows);
        }
    }
    if (!warnings.empty()) log << warnings.size() << " warning(s), see warnings.txt\n";
    return kExitOk;
}

int compare_command(const std::string& results_a, const std::string& results_b,
                    std::ostream& out, std::ostream& log) {
    try {
        const auto a = report::read_results_file(results_a);
        const auto b = report::read_results_file(results_b);
        report::write_comparison(out, report::compare_rows(a, b));
        return kExitOk;
    } catch (const UsageError& e) {
        log << "usage error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        log << "data error: " << e.what() << '\n';
        return kExitData;
    }
}

int main(int argc, char** argv, std::ostream& out, std::ostream& log) {
    CLI::App app{"Time-aware software effort estimation"};
    app.require_subcommand(1);

    RunConfig config;
    std::string schema_tag;
    std::string approaches;
    std::string form = "auto";
    std::string cooks = "auto";
    std::string partitions;
    auto* run = app.add_subcommand("run", "build and evaluate chronological models");
    run->add_option("--dataset", config.dataset_path, "input CSV")->required();
    run->add_option("--schema", schema_tag, "cocomo81|fp_language")->required();
    run->add_option("--partitions", partitions, "partition spec file");
    run->add_option("--approach", approaches, "comma list of tasa,tamw,loo,mean,median")
        ->required();
    run->add_option("--alpha-remove", config.alpha_remove, "stepwise removal threshold");
    run->add_option("--cooks-threshold", cooks, "auto (4/n), off, or a positive number");
    run->add_option("--form", form, "auto|cocomo|fp_dummy|fp_size_only");
    run->add_option("--out", config.out_dir, "output directory")->required();

    std::string file_a;
    std::string file_b;
    auto* compare = app.add_subcommand("compare", "paired Wilcoxon comparison of two result files");
    compare->add_option("--a", file_a, "first results file")->required();
    compare->add_option("--b", file_b, "second results file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, log);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, log);
        return kExitConfig;
    }

    if (*compare) return compare_command(file_a, file_b, out, log);

    try {
        config.schema = parse_schema(schema_tag);
        if (!partitions.empty()) config.partitions_path = partitions;
        for (const auto& part : csv::split_plain(approaches, ',')) {
            config.approaches.push_back(parse_approach(csv::trim(part)));
        }
        if (form != "auto") config.form = parse_model_form(form);
        if (cooks == "off") {
            config.influence_filter = false;
        } else if (cooks != "auto") {
            const auto value = csv::parse_double(cooks);
            if (!value || !(*value > 0.0)) {
                throw ConfigError("--cooks-threshold must be auto, off or a positive number");
            }
            config.cooks_threshold = value;
        }
    } catch (const ConfigError& e) {
        log << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
    return run_command(config, log);
}

}  // namespace timeaware::cli
