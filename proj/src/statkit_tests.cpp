#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "timeaware/errors.hpp"
#include "timeaware/statkit.hpp"

namespace timeaware::stats {

namespace {

// c[0] + c[1] x + c[2] x^2 + ...
template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double result = 0.0;
    for (std::size_t i = N; i-- > 0;) result = result * x + c[i];
    return result;
}

double two_sided_from_counts(const std::vector<double>& counts, std::size_t observed) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
        if (s <= observed) lower += counts[s];
        if (s >= observed) upper += counts[s];
    }
    return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

double normal_two_sided(double deviation, double variance) {
    if (!(variance > 0.0)) return 1.0;
    const double z = std::max(std::fabs(deviation) - 0.5, 0.0) / std::sqrt(variance);
    return std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
}

double tie_term(const std::vector<std::size_t>& tie_sizes) {
    double sum = 0.0;
    for (const auto t : tie_sizes) {
        const auto td = static_cast<double>(t);
        sum += td * td * td - td;
    }
    return sum;
}

}  // namespace

std::string_view to_string(TestMethod method) {
    switch (method) {
        case TestMethod::shapiro_wilk:
            return "shapiro_wilk";
        case TestMethod::mann_whitney_u:
            return "mann_whitney_u";
        case TestMethod::wilcoxon_signed_rank:
            return "wilcoxon_signed_rank";
    }
    return "?";
}

double normal_cdf(double z) {
    return boost::math::cdf(boost::math::normal(), z);
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal(), p);
}

std::vector<double> average_ranks(std::span<const double> values,
                                  std::vector<std::size_t>* tie_sizes) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    if (tie_sizes) tie_sizes->clear();
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i + 1;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        if (tie_sizes && j - i > 1) tie_sizes->push_back(j - i);
        i = j;
    }
    return ranks;
}

TestResult shapiro_wilk(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 3) throw InsufficientDataError("Shapiro-Wilk needs at least 3 values");
    if (n > 5000) throw InsufficientDataError("Shapiro-Wilk supports at most 5000 values");

    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 1e-19 * std::max(1.0, std::fabs(x.front())))) {
        throw DegenerateSampleError("Shapiro-Wilk: all values are equal");
    }

    static constexpr double g[] = {-2.273, 0.459};
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};

    const double an = static_cast<double>(n);
    const std::size_t half = n / 2;

    // Half of the antisymmetric coefficient vector: a[i] weights
    // x[n-1-i] - x[i].
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
    } else {
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - m[0] / ssumm2;
        std::size_t first_free = 1;
        double fac = 0.0;
        if (n > 5) {
            const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
            first_free = 2;
        } else {
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (std::size_t i = first_free; i < half; ++i) a[i] = -m[i] / fac;
    }

    // Scale by the range first to keep the sums well conditioned.
    double mean = 0.0;
    for (const double v : x) mean += v / range;
    mean /= an;
    double ssq = 0.0;
    for (const double v : x) ssq += (v / range - mean) * (v / range - mean);
    double numerator = 0.0;
    for (std::size_t i = 0; i < half; ++i) numerator += a[i] * (x[n - 1 - i] - x[i]) / range;
    double w = std::min(1.0, numerator * numerator / ssq);

    TestResult result;
    result.method = TestMethod::shapiro_wilk;
    result.statistic = w;
    result.n1 = n;
    result.exact = false;

    if (n == 3) {
        constexpr double pi6 = 1.90985931710274;   // 6 / pi
        constexpr double stqr = 1.04719755119660;  // pi / 3
        result.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
        return result;
    }

    double y = std::log1p(-w);
    double mu = 0.0;
    double sigma = 0.0;
    if (n <= 11) {
        const double gamma = poly(g, an);
        if (y >= gamma) {
            result.p_value = 1e-99;
            return result;
        }
        y = -std::log(gamma - y);
        mu = poly(c3, an);
        sigma = std::exp(poly(c4, an));
    } else {
        const double ln_n = std::log(an);
        mu = poly(c5, ln_n);
        sigma = std::exp(poly(c6, ln_n));
    }
    result.p_value = std::clamp(1.0 - normal_cdf((y - mu) / sigma), 0.0, 1.0);
    return result;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw InsufficientDataError("Mann-Whitney U needs two non-empty samples");
    }
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<std::size_t> ties;
    const auto ranks = average_ranks(pooled, &ties);
    const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(na), 0.0);
    const double u = rank_sum_a - static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;

    TestResult result;
    result.method = TestMethod::mann_whitney_u;
    result.statistic = u;
    result.n1 = na;
    result.n2 = nb;

    if (std::max(na, nb) <= 8 && ties.empty()) {
        // counts[k][s]: subsets of size k of ranks seen so far with rank sum s.
        const std::size_t total = na + nb;
        const std::size_t max_sum = total * (total + 1) / 2;
        std::vector<std::vector<double>> counts(na + 1, std::vector<double>(max_sum + 1, 0.0));
        counts[0][0] = 1.0;
        for (std::size_t r = 1; r <= total; ++r) {
            for (std::size_t k = std::min(r, na); k >= 1; --k) {
                for (std::size_t s = max_sum; s >= r; --s) counts[k][s] += counts[k - 1][s - r];
            }
        }
        // Shift rank sums to U = S - na(na+1)/2.
        const std::size_t offset = na * (na + 1) / 2;
        std::vector<double> u_counts(counts[na].begin() + static_cast<std::ptrdiff_t>(offset),
                                     counts[na].end());
        result.exact = true;
        result.p_value = two_sided_from_counts(u_counts, static_cast<std::size_t>(std::lround(u)));
        return result;
    }

    const double n_total = static_cast<double>(na + nb);
    const double prod = static_cast<double>(na) * static_cast<double>(nb);
    const double variance =
        prod / 12.0 * ((n_total + 1.0) - tie_term(ties) / (n_total * (n_total - 1.0)));
    result.exact = false;
    result.p_value = normal_two_sided(u - prod / 2.0, variance);
    return result;
}

TestResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs) {
    if (pairs.empty()) throw InsufficientDataError("Wilcoxon signed-rank needs at least one pair");
    std::vector<double> magnitudes;
    std::vector<bool> positive;
    for (const auto& [first, second] : pairs) {
        const double d = first - second;
        if (d == 0.0) continue;
        magnitudes.push_back(std::fabs(d));
        positive.push_back(d > 0.0);
    }

    TestResult result;
    result.method = TestMethod::wilcoxon_signed_rank;
    result.n1 = magnitudes.size();
    if (magnitudes.empty()) {
        result.statistic = 0.0;
        result.p_value = 1.0;
        result.exact = true;
        return result;
    }

    std::vector<std::size_t> ties;
    const auto ranks = average_ranks(magnitudes, &ties);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (positive[i]) w_plus += ranks[i];
    }
    result.statistic = w_plus;
    const std::size_t n = magnitudes.size();

    if (n <= 12 && ties.empty()) {
        const std::size_t max_sum = n * (n + 1) / 2;
        std::vector<double> counts(max_sum + 1, 0.0);
        counts[0] = 1.0;
        for (std::size_t r = 1; r <= n; ++r) {
            for (std::size_t s = max_sum; s >= r; --s) counts[s] += counts[s - r];
        }
        result.exact = true;
        result.p_value = two_sided_from_counts(counts, static_cast<std::size_t>(std::lround(w_plus)));
        return result;
    }

    const double nd = static_cast<double>(n);
    const double variance = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term(ties) / 48.0;
    result.exact = false;
    result.p_value = normal_two_sided(w_plus - nd * (nd + 1.0) / 4.0, variance);
    return result;
}

}  // namespace timeaware::stats
