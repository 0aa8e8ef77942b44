#include "timeaware/chrono.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "timeaware/errors.hpp"
#include "timeaware/metrics.hpp"
#include "timeaware/statkit.hpp"

namespace timeaware {

namespace {

struct YearGroup {
    int year = 0;
    std::vector<const ProjectRecord*> records;
};

std::vector<YearGroup> group_by_year(const Dataset& dataset) {
    std::vector<YearGroup> groups;
    for (const auto& rec : dataset.records) {
        if (groups.empty() || groups.back().year != rec.completion_year) {
            groups.push_back({rec.completion_year, {}});
        }
        groups.back().records.push_back(&rec);
    }
    for (std::size_t i = 1; i < groups.size(); ++i) {
        if (groups[i].year <= groups[i - 1].year) {
            throw std::invalid_argument("dataset records are not ordered by completion year");
        }
    }
    return groups;
}

Fold make_fold(const std::vector<YearGroup>& groups, Approach approach,
               const std::vector<std::size_t>& training, std::size_t test) {
    Fold fold;
    fold.approach = approach;
    fold.window_start_year = groups[training.front()].year;
    for (const auto g : training) {
        fold.training_years.push_back(groups[g].year);
        for (const auto* rec : groups[g].records) fold.training_ids.push_back(rec->id);
    }
    fold.test_year = groups[test].year;
    for (const auto* rec : groups[test].records) fold.test_ids.push_back(rec->id);
    return fold;
}

// Growing-portfolio folds over groups[start..]. Empty when no well-formed
// training block exists before the last year.
std::vector<Fold> accumulate_from(const std::vector<YearGroup>& groups, std::size_t start,
                                  std::size_t minimum, Approach approach) {
    std::vector<Fold> folds;
    std::size_t count = 0;
    std::optional<std::size_t> first_test;
    for (std::size_t j = start; j + 1 < groups.size(); ++j) {
        count += groups[j].records.size();
        if (count >= minimum) {
            first_test = j + 1;
            break;
        }
    }
    if (!first_test) return folds;
    for (std::size_t t = *first_test; t < groups.size(); ++t) {
        std::vector<std::size_t> training(t - start);
        std::iota(training.begin(), training.end(), start);
        folds.push_back(make_fold(groups, approach, training, t));
    }
    return folds;
}

std::vector<YearGroup> groups_with_two_years(const Dataset& dataset) {
    auto groups = group_by_year(dataset);
    if (groups.size() < 2) {
        throw NoFoldsError("partition '" + dataset.partition + "' of '" + dataset.name +
                           "' spans fewer than two completion years");
    }
    return groups;
}

const char* kSizeColumnCocomo = "ln_kloc";
const char* kSizeColumnFp = "ln_size";

std::string size_column(ModelForm form) {
    return form == ModelForm::cocomo ? kSizeColumnCocomo : kSizeColumnFp;
}

// Explanatory values of one record under `form`, in design column order.
std::vector<std::pair<std::string, double>> explanatory_values(const ProjectRecord& rec,
                                                               const ModelSpec& spec) {
    std::vector<std::pair<std::string, double>> row;
    switch (spec.form) {
        case ModelForm::cocomo: {
            if (!rec.effort_multipliers) {
                throw DataError("record " + rec.id + " has no effort multipliers");
            }
            row.emplace_back(kSizeColumnCocomo, std::log(rec.size));
            for (std::size_t j = 0; j < kEffortMultiplierCount; ++j) {
                row.emplace_back("ln_" + std::string(kEffortMultiplierNames[j]),
                                 std::log((*rec.effort_multipliers)[j]));
            }
            break;
        }
        case ModelForm::fp_dummy: {
            if (!rec.language) throw DataError("record " + rec.id + " has no language level");
            row.emplace_back(kSizeColumnFp, std::log(rec.size));
            for (int level = 1; level <= 3; ++level) {
                if (level == spec.dummy_reference) continue;
                row.emplace_back("lang" + std::to_string(level),
                                 *rec.language == level ? 1.0 : 0.0);
            }
            break;
        }
        case ModelForm::fp_size_only:
            row.emplace_back(kSizeColumnFp, std::log(rec.size));
            break;
    }
    return row;
}

stats::DesignMatrix build_design(const std::vector<const ProjectRecord*>& training,
                                 const ModelSpec& spec) {
    stats::DesignMatrix design;
    design.column_names.emplace_back(stats::kInterceptName);
    const auto n = static_cast<Eigen::Index>(training.size());
    const auto first = explanatory_values(*training.front(), spec);
    for (const auto& [name, value] : first) design.column_names.push_back(name);
    design.values.resize(n, static_cast<Eigen::Index>(design.column_names.size()));
    design.response.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto* rec = training[static_cast<std::size_t>(i)];
        const auto row = explanatory_values(*rec, spec);
        design.values(i, 0) = 1.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            design.values(i, static_cast<Eigen::Index>(j + 1)) = row[j].second;
        }
        design.response(i) = std::log(rec->effort);
        design.row_ids.push_back(rec->id);
    }
    return design;
}

// True when Shapiro-Wilk rejects normality (or the sample is constant).
bool fails_normality(const std::vector<double>& values, double alpha) {
    try {
        return stats::shapiro_wilk(values).p_value <= alpha;
    } catch (const DegenerateSampleError&) {
        return true;
    } catch (const InsufficientDataError&) {
        return false;
    }
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void fill_metrics(EvaluationRow& row, const std::vector<const ProjectRecord*>& test,
                  std::vector<double> estimates) {
    std::vector<double> actual;
    actual.reserve(test.size());
    for (const auto* rec : test) actual.push_back(rec->effort);
    const metrics::PredictionSet set(std::move(actual), std::move(estimates));
    row.re = metrics::relative_error(set);
    row.mse = metrics::mean_squared_error(set);
    row.tae = metrics::total_absolute_error(set);
}

}  // namespace

std::string_view to_string(Approach approach) {
    switch (approach) {
        case Approach::tasa:
            return "tasa";
        case Approach::tamw:
            return "tamw";
        case Approach::loo:
            return "loo";
        case Approach::mean:
            return "mean";
        case Approach::median:
            return "median";
    }
    return "?";
}

std::string_view to_string(ModelForm form) {
    switch (form) {
        case ModelForm::cocomo:
            return "cocomo";
        case ModelForm::fp_dummy:
            return "fp_dummy";
        case ModelForm::fp_size_only:
            return "fp_size_only";
    }
    return "?";
}

Approach parse_approach(std::string_view text) {
    for (const auto a : {Approach::tasa, Approach::tamw, Approach::loo, Approach::mean,
                         Approach::median}) {
        if (text == to_string(a)) return a;
    }
    throw ConfigError("unknown approach '" + std::string(text) +
                      "' (expected tasa|tamw|loo|mean|median)");
}

ModelForm parse_model_form(std::string_view text) {
    for (const auto f : {ModelForm::cocomo, ModelForm::fp_dummy, ModelForm::fp_size_only}) {
        if (text == to_string(f)) return f;
    }
    throw ConfigError("unknown model form '" + std::string(text) +
                      "' (expected cocomo|fp_dummy|fp_size_only)");
}

std::size_t explanatory_count(ModelForm form) {
    switch (form) {
        case ModelForm::cocomo:
            return 1 + kEffortMultiplierCount;
        case ModelForm::fp_dummy:
            return 3;
        case ModelForm::fp_size_only:
            return 1;
    }
    return 0;
}

std::size_t well_formed_minimum(ModelForm form) { return explanatory_count(form) + 2; }

ModelSpec ModelSpec::for_form(ModelForm form) {
    ModelSpec spec;
    spec.form = form;
    spec.selection = form == ModelForm::cocomo ? Selection::backward_stepwise : Selection::fixed;
    return spec;
}

void ModelSpec::validate() const {
    if (form == ModelForm::cocomo && selection != Selection::backward_stepwise) {
        throw ConfigError("the cocomo form is built with backward stepwise selection");
    }
    if (form != ModelForm::cocomo && selection != Selection::fixed) {
        throw ConfigError("function-point forms use fixed selection");
    }
    if (dummy_reference < 1 || dummy_reference > 3) {
        throw ConfigError("dummy reference level must be 1, 2 or 3");
    }
    if (!(alpha_remove > 0.0 && alpha_remove < 1.0)) {
        throw ConfigError("alpha_remove must lie in (0, 1)");
    }
    if (cooks_threshold && !(*cooks_threshold > 0.0)) {
        throw ConfigError("Cook's distance threshold must be positive");
    }
}

ModelForm default_form(Schema schema, const PartitionSpec& partition) {
    if (schema == Schema::cocomo81) return ModelForm::cocomo;
    const bool single_language =
        std::any_of(partition.categorical_filters.begin(), partition.categorical_filters.end(),
                    [](const auto& f) { return f.first == "language"; });
    return single_language ? ModelForm::fp_size_only : ModelForm::fp_dummy;
}

std::vector<Fold> tasa_schedule(const Dataset& dataset, const ModelSpec& spec) {
    const auto groups = groups_with_two_years(dataset);
    auto folds = accumulate_from(groups, 0, well_formed_minimum(spec.form), Approach::tasa);
    if (folds.empty()) {
        throw NoFoldsError("partition '" + dataset.partition + "' of '" + dataset.name +
                           "': no well-formed training block (" +
                           std::to_string(well_formed_minimum(spec.form)) +
                           " projects) before the last year");
    }
    return folds;
}

std::vector<Fold> tamw_schedule(const Dataset& dataset, const ModelSpec& spec) {
    const auto groups = groups_with_two_years(dataset);
    const auto minimum = well_formed_minimum(spec.form);
    std::vector<Fold> folds;
    for (std::size_t start = 1; start + 1 < groups.size(); ++start) {
        auto window = accumulate_from(groups, start, minimum, Approach::tamw);
        folds.insert(folds.end(), std::make_move_iterator(window.begin()),
                     std::make_move_iterator(window.end()));
    }
    if (folds.empty()) {
        throw NoFoldsError("partition '" + dataset.partition + "' of '" + dataset.name +
                           "': no moving window yields a well-formed training set");
    }
    return folds;
}

std::vector<Fold> baseline_schedule(const Dataset& dataset, Approach kind, const ModelSpec& spec,
                                    std::vector<std::string>* warnings) {
    if (kind == Approach::mean || kind == Approach::median) {
        auto folds = tasa_schedule(dataset, spec);
        for (auto& fold : folds) fold.approach = kind;
        return folds;
    }
    if (kind != Approach::loo) {
        throw std::invalid_argument("baseline_schedule: kind must be loo, mean or median");
    }
    const auto groups = groups_with_two_years(dataset);
    const auto minimum = well_formed_minimum(spec.form);
    std::vector<Fold> folds;
    for (std::size_t test = 0; test < groups.size(); ++test) {
        std::vector<std::size_t> training;
        std::size_t count = 0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (g == test) continue;
            training.push_back(g);
            count += groups[g].records.size();
        }
        if (count < minimum) {
            if (warnings) {
                warnings->push_back("loo: skipping test year " + std::to_string(groups[test].year) +
                                    " of '" + dataset.partition + "': " + std::to_string(count) +
                                    " training projects < " + std::to_string(minimum));
            }
            continue;
        }
        folds.push_back(make_fold(groups, Approach::loo, training, test));
    }
    if (folds.empty()) {
        throw NoFoldsError("partition '" + dataset.partition + "' of '" + dataset.name +
                           "': no well-formed leave-one-year-out fold");
    }
    return folds;
}

std::vector<Fold> schedule(const Dataset& dataset, Approach approach, const ModelSpec& spec,
                           std::vector<std::string>* warnings) {
    switch (approach) {
        case Approach::tasa:
            return tasa_schedule(dataset, spec);
        case Approach::tamw:
            return tamw_schedule(dataset, spec);
        default:
            return baseline_schedule(dataset, approach, spec, warnings);
    }
}

EvaluationRow run_fold(const Fold& fold, const Dataset& dataset, const ModelSpec& spec,
                       FoldDiagnostics* diagnostics) {
    spec.validate();
    std::map<std::string_view, const ProjectRecord*> by_id;
    for (const auto& rec : dataset.records) by_id.emplace(rec.id, &rec);
    const auto lookup = [&](const std::string& id) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw std::logic_error("fold references unknown record '" + id + "'");
        }
        return it->second;
    };

    std::vector<const ProjectRecord*> training;
    std::vector<const ProjectRecord*> test;
    for (const auto& id : fold.training_ids) training.push_back(lookup(id));
    for (const auto& id : fold.test_ids) test.push_back(lookup(id));
    if (test.empty()) {
        throw std::logic_error("test year " + std::to_string(fold.test_year) + " has no projects");
    }
    for (const auto* rec : test) {
        if (rec->completion_year != fold.test_year) {
            throw std::logic_error("record " + rec->id + " is not from test year " +
                                   std::to_string(fold.test_year));
        }
    }
    if (training.empty()) throw std::logic_error("fold has an empty training set");

    FoldDiagnostics local;
    FoldDiagnostics& diag = diagnostics ? *diagnostics : local;
    diag = {};

    EvaluationRow row;
    row.dataset = dataset.name;
    row.partition = dataset.partition;
    row.approach = fold.approach;
    row.window_start_year = fold.window_start_year;
    row.test_year = fold.test_year;
    row.n_train = training.size();
    row.n_test = test.size();

    std::vector<double> train_effort;
    for (const auto* rec : training) train_effort.push_back(rec->effort);

    if (fold.approach == Approach::mean || fold.approach == Approach::median) {
        const double estimate =
            fold.approach == Approach::mean
                ? std::accumulate(train_effort.begin(), train_effort.end(), 0.0) /
                      static_cast<double>(train_effort.size())
                : median_of(train_effort);
        diag.estimates.assign(test.size(), estimate);
        fill_metrics(row, test, diag.estimates);
        return row;
    }

    if (fails_normality(train_effort, spec.normality_alpha)) {
        std::vector<double> logged(train_effort.size());
        std::transform(train_effort.begin(), train_effort.end(), logged.begin(),
                       [](double v) { return std::log(v); });
        if (fails_normality(logged, spec.normality_alpha)) {
            row.normality_warning = true;
            diag.warnings.push_back("training effort fails Shapiro-Wilk before and after the "
                                    "log transform; modelling in log form anyway");
        }
    }

    const auto mandatory = size_column(spec.form);
    try {
        auto design = build_design(training, spec);

        const auto aliased = stats::aliased_columns(design);
        if (std::find(aliased.begin(), aliased.end(), mandatory) != aliased.end()) {
            throw SingularDesignError("size column " + mandatory + " is aliased", aliased);
        }
        if (!aliased.empty()) {
            std::vector<std::size_t> keep;
            for (std::size_t j = 0; j < design.column_names.size(); ++j) {
                if (std::find(aliased.begin(), aliased.end(), design.column_names[j]) ==
                    aliased.end()) {
                    keep.push_back(j);
                }
            }
            design = design.select_columns(keep);
            row.dropped_vars = aliased;
        }

        stats::ModelFit fit = spec.selection == Selection::backward_stepwise
                                  ? stats::backward_stepwise(design, spec.alpha_remove, {mandatory})
                                  : stats::fit_ols(design);
        for (const auto& note : fit.notes) diag.warnings.push_back(note);

        if (spec.influence_filter) {
            std::vector<std::size_t> selected;
            for (const auto& c : fit.coefficients) selected.push_back(*design.column_index(c.name));
            auto cooks = stats::cooks_filter(design.select_columns(selected), spec.cooks_threshold);
            cooks.fit.selection_trace = fit.selection_trace;
            cooks.fit.notes = fit.notes;
            if (cooks.warning) diag.warnings.push_back(*cooks.warning);
            fit = std::move(cooks.fit);
        }

        std::vector<double> estimates;
        for (const auto* rec : test) {
            const auto values = explanatory_values(*rec, spec);
            estimates.push_back(std::exp(fit.predict(values)));
        }
        diag.estimates = estimates;
        fill_metrics(row, test, std::move(estimates));

        row.adj_r2 = fit.adjusted_r2;
        for (const auto& c : fit.coefficients) row.coefficients.push_back({c.name, c.estimate});
        row.removed_ids = fit.removed_influential;
        row.dropped_vars.insert(row.dropped_vars.end(), fit.selection_trace.begin(),
                                fit.selection_trace.end());
    } catch (const SingularDesignError& e) {
        row.re.reset();
        row.mse.reset();
        row.tae.reset();
        row.adj_r2.reset();
        row.coefficients.clear();
        row.removed_ids.clear();
        row.dropped_vars.clear();
        diag.estimates.clear();
        diag.failure = e.what();
        diag.warnings.push_back(std::string("fold failed: ") + e.what());
    }
    return row;
}

CoefficientTable fit_summary_series(const std::vector<EvaluationRow>& rows) {
    CoefficientTable table;
    if (rows.empty()) return table;
    const auto& first = rows.front();
    for (const auto& r : rows) {
        if (r.approach != first.approach) {
            throw UsageError("coefficient table: rows mix approaches " +
                             std::string(to_string(first.approach)) + " and " +
                             std::string(to_string(r.approach)));
        }
        if (r.dataset != first.dataset || r.partition != first.partition) {
            throw UsageError("coefficient table: rows mix datasets or partitions");
        }
    }
    for (const auto& r : rows) {
        for (const auto& c : r.coefficients) {
            if (std::find(table.variables.begin(), table.variables.end(), c.name) ==
                table.variables.end()) {
                table.variables.push_back(c.name);
            }
        }
    }
    const auto intercept = std::find(table.variables.begin(), table.variables.end(),
                                     std::string(stats::kInterceptName));
    if (intercept != table.variables.end()) {
        std::rotate(table.variables.begin(), intercept, intercept + 1);
    }
    for (const auto& r : rows) {
        CoefficientTableRow out;
        out.test_year = r.test_year;
        out.window_start_year = r.window_start_year;
        out.adj_r2 = r.adj_r2;
        for (const auto& var : table.variables) {
            const auto it = std::find_if(r.coefficients.begin(), r.coefficients.end(),
                                         [&](const NamedValue& c) { return c.name == var; });
            out.values.push_back(it == r.coefficients.end() ? std::nullopt
                                                            : std::optional<double>(it->value));
        }
        table.rows.push_back(std::move(out));
    }
    return table;
}

}  // namespace timeaware
