#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include <boost/math/distributions/students_t.hpp>

#include "timeaware/errors.hpp"
#include "timeaware/statkit.hpp"

namespace timeaware::stats {

namespace {

constexpr double kRankTolerance = 1e-10;

double two_sided_t_p(double t, double dof) {
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t dist(dof);
    return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 0.0,
                      1.0);
}

void require_fit_size(const DesignMatrix& design) {
    const auto n = static_cast<std::size_t>(design.rows());
    const auto p = static_cast<std::size_t>(design.cols());
    if (p == 0) throw std::invalid_argument("design matrix has no columns");
    if (n < p + 1) {
        throw InsufficientDataError("least squares needs n >= p + 1 (n = " + std::to_string(n) +
                                    ", p = " + std::to_string(p) + ")");
    }
}

}  // namespace

std::optional<std::size_t> DesignMatrix::column_index(std::string_view name) const {
    const auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - column_names.begin());
}

void DesignMatrix::validate() const {
    if (static_cast<std::size_t>(values.cols()) != column_names.size()) {
        throw std::invalid_argument("design: column name count does not match matrix width");
    }
    if (values.rows() != response.size() ||
        static_cast<std::size_t>(values.rows()) != row_ids.size()) {
        throw std::invalid_argument("design: row count mismatch between matrix, response, ids");
    }
    if (column_names.empty() || column_names.front() != kInterceptName) {
        throw std::invalid_argument("design: first column must be the intercept");
    }
    std::unordered_set<std::string> seen;
    for (const auto& name : column_names) {
        if (!seen.insert(name).second) {
            throw std::invalid_argument("design: duplicate column '" + name + "'");
        }
    }
    if (!values.allFinite() || !response.allFinite()) {
        throw std::invalid_argument("design: non-finite entry");
    }
}

DesignMatrix DesignMatrix::select_columns(const std::vector<std::size_t>& columns) const {
    DesignMatrix out;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out.values.col(static_cast<Eigen::Index>(j)) =
            values.col(static_cast<Eigen::Index>(columns[j]));
        out.column_names.push_back(column_names[columns[j]]);
    }
    out.response = response;
    out.row_ids = row_ids;
    return out;
}

DesignMatrix DesignMatrix::drop_rows(const std::vector<std::size_t>& rows) const {
    std::vector<bool> drop(static_cast<std::size_t>(values.rows()), false);
    for (const auto r : rows) drop.at(r) = true;
    const auto keep = static_cast<Eigen::Index>(std::count(drop.begin(), drop.end(), false));
    DesignMatrix out;
    out.column_names = column_names;
    out.values.resize(keep, values.cols());
    out.response.resize(keep);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        if (drop[static_cast<std::size_t>(i)]) continue;
        out.values.row(k) = values.row(i);
        out.response(k) = response(i);
        out.row_ids.push_back(row_ids[static_cast<std::size_t>(i)]);
        ++k;
    }
    return out;
}

const Coefficient* ModelFit::find(std::string_view name) const {
    const auto it = std::find_if(coefficients.begin(), coefficients.end(),
                                 [&](const Coefficient& c) { return c.name == name; });
    return it == coefficients.end() ? nullptr : &*it;
}

double ModelFit::predict(std::span<const std::pair<std::string, double>> row) const {
    double total = 0.0;
    for (const auto& coef : coefficients) {
        if (coef.name == kInterceptName) {
            total += coef.estimate;
            continue;
        }
        const auto it = std::find_if(row.begin(), row.end(),
                                     [&](const auto& kv) { return kv.first == coef.name; });
        if (it == row.end()) {
            throw std::invalid_argument("prediction row lacks column '" + coef.name + "'");
        }
        total += coef.estimate * it->second;
    }
    return total;
}

std::vector<std::string> aliased_columns(const DesignMatrix& design) {
    // Natural-order sweep, as R's lm does: a column is aliased when it lies in
    // the span of the columns kept before it.
    std::vector<std::string> aliased;
    const double scale = design.values.colwise().norm().maxCoeff();
    if (!(scale > 0.0)) return aliased;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < design.values.cols(); ++j) {
        const Eigen::VectorXd column = design.values.col(j);
        double residual_norm = column.norm();
        if (!kept.empty()) {
            Eigen::MatrixXd basis(design.values.rows(), static_cast<Eigen::Index>(kept.size()));
            for (std::size_t k = 0; k < kept.size(); ++k) {
                basis.col(static_cast<Eigen::Index>(k)) = design.values.col(kept[k]);
            }
            const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
            const Eigen::VectorXd coef = qr.solve(column);
            residual_norm = (column - basis * coef).norm();
        }
        if (residual_norm <= kRankTolerance * scale) {
            if (j != 0) aliased.push_back(design.column_names[static_cast<std::size_t>(j)]);
        } else {
            kept.push_back(j);
        }
    }
    return aliased;
}

ModelFit fit_ols(const DesignMatrix& design) {
    design.validate();
    require_fit_size(design);
    const auto n = design.rows();
    const auto p = design.cols();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.values);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < p) {
        auto dependent = aliased_columns(design);
        if (dependent.empty()) {
            const auto& perm = qr.colsPermutation().indices();
            for (Eigen::Index k = qr.rank(); k < p; ++k) {
                dependent.push_back(design.column_names[static_cast<std::size_t>(perm(k))]);
            }
        }
        std::string names;
        for (const auto& d : dependent) names += (names.empty() ? "" : ", ") + d;
        throw SingularDesignError("singular design: dependent column(s) " + names,
                                  std::move(dependent));
    }

    const Eigen::VectorXd beta = qr.solve(design.response);

    ModelFit fit;
    fit.n_used = static_cast<std::size_t>(n);
    fit.row_ids = design.row_ids;
    fit.fitted = design.values * beta;
    fit.residuals = design.response - fit.fitted;

    const double sse = fit.residuals.squaredNorm();
    const double mean = design.response.mean();
    const double sst = (design.response.array() - mean).square().sum();
    const double dof = static_cast<double>(n - p);
    fit.sigma2 = sse / dof;
    if (sst > 0.0) {
        fit.r2 = 1.0 - sse / sst;
    } else {
        fit.r2 = sse == 0.0 ? 1.0 : 0.0;
    }
    if (sse == 0.0) fit.r2 = 1.0;
    fit.adjusted_r2 =
        1.0 - (1.0 - fit.r2) * (static_cast<double>(n) - 1.0) / static_cast<double>(n - p);

    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd r =
        qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd cov_permuted = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation().indices();
    Eigen::VectorXd unscaled_var(p);
    for (Eigen::Index k = 0; k < p; ++k) unscaled_var(perm(k)) = cov_permuted(k, k);

    const Eigen::MatrixXd q_thin = design.values * qr.colsPermutation() * r_inv;
    fit.leverage = q_thin.rowwise().squaredNorm();

    for (Eigen::Index j = 0; j < p; ++j) {
        Coefficient c;
        c.name = design.column_names[static_cast<std::size_t>(j)];
        c.estimate = beta(j);
        c.std_error = std::sqrt(fit.sigma2 * unscaled_var(j));
        if (c.std_error > 0.0) {
            c.t_value = c.estimate / c.std_error;
            c.p_value = two_sided_t_p(c.t_value, dof);
        } else {
            c.t_value = c.estimate == 0.0 ? 0.0 : std::copysign(
                                                      std::numeric_limits<double>::infinity(),
                                                      c.estimate);
            c.p_value = c.estimate == 0.0 ? 1.0 : 0.0;
        }
        fit.coefficients.push_back(std::move(c));
    }
    return fit;
}

ModelFit backward_stepwise(const DesignMatrix& design, double alpha_remove,
                           const std::vector<std::string>& mandatory) {
    if (!(alpha_remove > 0.0 && alpha_remove < 1.0)) {
        throw std::invalid_argument("alpha_remove must lie in (0, 1)");
    }
    design.validate();
    for (const auto& m : mandatory) {
        if (!design.column_index(m)) {
            throw std::invalid_argument("mandatory column '" + m + "' not in design");
        }
    }
    const auto is_mandatory = [&](const std::string& name) {
        return std::find(mandatory.begin(), mandatory.end(), name) != mandatory.end();
    };

    std::vector<std::size_t> columns(static_cast<std::size_t>(design.cols()));
    for (std::size_t j = 0; j < columns.size(); ++j) columns[j] = j;

    std::vector<std::string> trace;
    while (true) {
        auto fit = fit_ols(design.select_columns(columns));
        std::optional<std::size_t> worst;
        double worst_p = alpha_remove;
        for (std::size_t k = 1; k < fit.coefficients.size(); ++k) {
            const auto& c = fit.coefficients[k];
            if (is_mandatory(c.name)) continue;
            const double pv = std::isnan(c.p_value) ? 1.0 : c.p_value;
            if (pv > worst_p) {
                worst_p = pv;
                worst = k;
            }
        }
        if (!worst) {
            for (const auto& c : fit.coefficients) {
                if (is_mandatory(c.name) && c.p_value > alpha_remove) {
                    fit.notes.push_back("mandatory column " + c.name +
                                        " kept despite p = " + std::to_string(c.p_value));
                }
            }
            fit.selection_trace = std::move(trace);
            return fit;
        }
        trace.push_back(design.column_names[columns[*worst]]);
        columns.erase(columns.begin() + static_cast<std::ptrdiff_t>(*worst));
    }
}

std::vector<double> cooks_distances(const ModelFit& fit, std::size_t parameter_count) {
    std::vector<double> d(fit.n_used, 0.0);
    if (!(fit.sigma2 > 0.0)) return d;
    const double denom_scale = static_cast<double>(parameter_count) * fit.sigma2;
    for (std::size_t i = 0; i < fit.n_used; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const double h = fit.leverage(idx);
        const double one_minus = 1.0 - h;
        if (one_minus < 1e-12) continue;  // the row fits itself exactly
        const double e = fit.residuals(idx);
        d[i] = e * e * h / (denom_scale * one_minus * one_minus);
    }
    return d;
}

CooksResult cooks_filter(const DesignMatrix& design, std::optional<double> threshold) {
    CooksResult result;
    result.fit = fit_ols(design);
    const auto n = static_cast<std::size_t>(design.rows());
    result.distances = cooks_distances(result.fit, static_cast<std::size_t>(design.cols()));
    result.threshold = threshold.value_or(4.0 / static_cast<double>(n));

    std::vector<std::size_t> flagged;
    for (std::size_t i = 0; i < n; ++i) {
        if (result.distances[i] > result.threshold) flagged.push_back(i);
    }
    if (flagged.empty()) return result;

    const auto minimum = design.explanatory_count() + 2;
    if (n - flagged.size() < minimum) {
        result.warning = "influence-filter-skipped: removing " + std::to_string(flagged.size()) +
                         " row(s) would leave fewer than " + std::to_string(minimum);
        return result;
    }
    const auto reduced = design.drop_rows(flagged);
    try {
        auto refit = fit_ols(reduced);
        for (const auto i : flagged) result.removed.push_back(design.row_ids[i]);
        refit.removed_influential = result.removed;
        result.fit = std::move(refit);
    } catch (const SingularDesignError& e) {
        result.warning = std::string("influence-filter-skipped: refit singular (") + e.what() + ")";
    }
    return result;
}

}  // namespace timeaware::stats
