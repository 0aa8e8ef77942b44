#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "timeaware/ingest.hpp"

namespace timeaware {

enum class Approach { tasa, tamw, loo, mean, median };
enum class ModelForm { cocomo, fp_dummy, fp_size_only };
enum class Selection { backward_stepwise, fixed };

std::string_view to_string(Approach approach);
std::string_view to_string(ModelForm form);
Approach parse_approach(std::string_view text);
ModelForm parse_model_form(std::string_view text);

// Explanatory columns in the full candidate set of a form (intercept excluded).
std::size_t explanatory_count(ModelForm form);

// Training rows a model of this form needs: explanatory columns + 2.
std::size_t well_formed_minimum(ModelForm form);

struct ModelSpec {
    ModelForm form = ModelForm::fp_dummy;
    Selection selection = Selection::fixed;
    int dummy_reference = 1;
    bool influence_filter = true;
    double alpha_remove = 0.05;
    std::optional<double> cooks_threshold;  // 4/n when unset
    double normality_alpha = 0.05;

    // cocomo pairs with backward_stepwise, the fp forms with fixed selection.
    static ModelSpec for_form(ModelForm form);
    void validate() const;
};

// Picks cocomo for cocomo81 data; for fp_language data, size-only when the
// partition pins a single language and the dummy model otherwise.
ModelForm default_form(Schema schema, const PartitionSpec& partition);

struct Fold {
    Approach approach = Approach::tasa;
    int window_start_year = 0;
    std::vector<int> training_years;
    std::vector<std::string> training_ids;
    int test_year = 0;
    std::vector<std::string> test_ids;

    friend bool operator==(const Fold&, const Fold&) = default;
};

/// Growing-portfolio folds. The first training block is the earliest year,
/// extended by whole years until it is well formed; every later data year is
/// then tested once against everything before it. Throws NoFoldsError when no
/// well-formed block exists before the last year.
std::vector<Fold> tasa_schedule(const Dataset& dataset, const ModelSpec& spec);

/// Moving-window folds: the growing-portfolio procedure rerun after dropping
/// the oldest 1, 2, ... data years, until a single training year is left.
/// The full-history window belongs to tasa_schedule and is not repeated here,
/// so a test year can appear several times with different window starts.
std::vector<Fold> tamw_schedule(const Dataset& dataset, const ModelSpec& spec);

/// loo: one fold per data year, trained on every other year (later ones
/// included); years whose training set is not well formed are skipped and
/// reported through `warnings`. mean/median: the tasa geometry.
std::vector<Fold> baseline_schedule(const Dataset& dataset, Approach kind, const ModelSpec& spec,
                                    std::vector<std::string>* warnings = nullptr);

std::vector<Fold> schedule(const Dataset& dataset, Approach approach, const ModelSpec& spec,
                           std::vector<std::string>* warnings = nullptr);

struct NamedValue {
    std::string name;
    double value = 0.0;

    friend bool operator==(const NamedValue&, const NamedValue&) = default;
};

struct EvaluationRow {
    std::string dataset;
    std::string partition;
    Approach approach = Approach::tasa;
    int window_start_year = 0;
    int test_year = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::optional<double> re;
    std::optional<double> mse;
    std::optional<double> tae;  // absent only when the fold failed
    bool normality_warning = false;
    std::optional<double> adj_r2;
    std::vector<NamedValue> coefficients;
    std::vector<std::string> removed_ids;
    std::vector<std::string> dropped_vars;

    friend bool operator==(const EvaluationRow&, const EvaluationRow&) = default;
};

// Side information from run_fold that the results file does not carry.
struct FoldDiagnostics {
    std::vector<std::string> warnings;
    std::vector<double> estimates;  // raw scale, test_ids order
    std::optional<std::string> failure;
};

/// Executes one fold: normality gate on training effort, log-form design,
/// selection, optional Cook's filter, prediction of the test year with
/// back-transformation, metrics on the raw scale. Mean/median folds use the
/// training mean/median effort as the estimate. A singular design yields a
/// row without metrics and sets `diagnostics->failure`.
EvaluationRow run_fold(const Fold& fold, const Dataset& dataset, const ModelSpec& spec,
                       FoldDiagnostics* diagnostics = nullptr);

struct CoefficientTableRow {
    int test_year = 0;
    int window_start_year = 0;
    std::vector<std::optional<double>> values;  // aligned with CoefficientTable::variables
    std::optional<double> adj_r2;
};

struct CoefficientTable {
    std::vector<std::string> variables;  // intercept first, then first-seen order
    std::vector<CoefficientTableRow> rows;
};

// Throws UsageError when rows mix datasets, partitions or approaches.
CoefficientTable fit_summary_series(const std::vector<EvaluationRow>& rows);

}  // namespace timeaware
