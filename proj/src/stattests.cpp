#include "cashflow/stattests.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include "cashflow/rng.hpp"
#include "distributions.hpp"

namespace cashflow {

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

HypothesisTestResult make_result(double statistic, double p, double alpha) {
    p = std::clamp(p, 0.0, 1.0);
    return HypothesisTestResult{statistic, p, alpha, p < alpha};
}

double poly(std::span<const double> coeffs, double x) {
    double r = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) r = r * x + *it;
    return r;
}

// Kolmogorov distance between the sample ECDF and the normal fitted by
// moments; input must be sorted.
double lilliefors_distance(std::span<const double> sorted, double mean, double std) {
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = dist::normal_cdf((sorted[i] - mean) / std);
        const double upper = (static_cast<double>(i) + 1.0) / n - f;
        const double lower = f - static_cast<double>(i) / n;
        d = std::max(d, std::max(upper, lower));
    }
    return d;
}

// Simulated null distribution of the Lilliefors distance, shared between
// calls with equal (n, replications, seed).
std::shared_ptr<const std::vector<double>> lilliefors_null(std::size_t n,
                                                           std::size_t replications,
                                                           std::uint64_t seed) {
    using Key = std::tuple<std::size_t, std::size_t, std::uint64_t>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const std::vector<double>>> cache;

    const Key key{n, replications, seed};
    {
        std::scoped_lock lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    auto sims = std::make_shared<std::vector<double>>();
    sims->reserve(replications);
    std::vector<double> draw(n);
    for (std::size_t rep = 0; rep < replications; ++rep) {
        NormalSampler normal(derive_seed(seed, {0x11F0ull, n, rep}));
        for (double& x : draw) x = normal();
        std::sort(draw.begin(), draw.end());
        const double m = mean_of(draw);
        const double s = std::sqrt(sample_variance(draw, m));
        sims->push_back(lilliefors_distance(draw, m, s));
    }
    std::sort(sims->begin(), sims->end());

    std::scoped_lock lock(mutex);
    return cache.emplace(key, std::move(sims)).first->second;
}

}  // namespace

AcfResult acf(std::span<const double> values, std::size_t max_lag) {
    const std::size_t n = values.size();
    if (max_lag == 0) throw StatTestError("acf: max_lag must be >= 1");
    if (n <= max_lag) throw StatTestError("acf: series length must exceed max_lag");
    const double mean = mean_of(values);
    double denom = 0.0;
    for (double x : values) denom += (x - mean) * (x - mean);
    if (denom == 0.0) throw StatTestError("acf: zero variance series");

    AcfResult out;
    out.max_lag = max_lag;
    out.coefficients.resize(max_lag);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) {
            num += (values[t] - mean) * (values[t + k] - mean);
        }
        out.coefficients[k - 1] = num / denom;
    }
    return out;
}

std::size_t default_ljung_box_lags(std::size_t n) {
    return std::min<std::size_t>(20, n / 4);
}

HypothesisTestResult ljung_box(std::span<const double> values, std::size_t lags, double alpha) {
    const auto r = acf(values, lags);
    const auto n = static_cast<double>(values.size());
    double q = 0.0;
    for (std::size_t k = 1; k <= lags; ++k) {
        const double rk = r.coefficients[k - 1];
        q += rk * rk / (n - static_cast<double>(k));
    }
    q *= n * (n + 2.0);
    return make_result(q, dist::chi_squared_sf(q, static_cast<double>(lags)), alpha);
}

HypothesisTestResult shapiro_wilk(std::span<const double> sample, double alpha) {
    static constexpr double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static constexpr double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[3] = {-0.4803, -0.082676, 0.0030302};

    const std::size_t n = sample.size();
    if (n < 3 || n > 5000) throw StatTestError("shapiro_wilk: n must be in [3, 5000]");

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    if (x.back() - x.front() <= 0.0) throw StatTestError("shapiro_wilk: zero variance sample");

    // Royston's approximation of the optimal normal-order-statistic weights.
    std::vector<double> coef(n);
    if (n == 3) {
        coef[0] = -std::sqrt(0.5);
        coef[1] = 0.0;
        coef[2] = std::sqrt(0.5);
    } else {
        std::vector<double> m(n);
        double ssq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = dist::normal_quantile((static_cast<double>(i) + 1.0 - 0.375) /
                                         (static_cast<double>(n) + 0.25));
            ssq += m[i] * m[i];
        }
        const double rsn = 1.0 / std::sqrt(static_cast<double>(n));
        const double an = poly(c1, rsn) + m[n - 1] / std::sqrt(ssq);
        std::size_t inner_begin = 1, inner_end = n - 1;
        double phi;
        if (n > 5) {
            const double an1 = poly(c2, rsn) + m[n - 2] / std::sqrt(ssq);
            phi = (ssq - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                  (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
            coef[n - 2] = an1;
            coef[1] = -an1;
            inner_begin = 2;
            inner_end = n - 2;
        } else {
            phi = (ssq - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
        }
        coef[n - 1] = an;
        coef[0] = -an;
        const double scale = std::sqrt(phi);
        for (std::size_t i = inner_begin; i < inner_end; ++i) coef[i] = m[i] / scale;
    }

    // W as the squared correlation between coefficients and order statistics,
    // evaluated through 1-W to keep precision near W = 1.
    const double xbar = mean_of(x);
    const double cbar = mean_of(coef);
    double ssx = 0.0, ssc = 0.0, sxc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - xbar;
        const double dc = coef[i] - cbar;
        ssx += dx * dx;
        ssc += dc * dc;
        sxc += dx * dc;
    }
    const double norm = std::sqrt(ssx * ssc);
    const double w1 = (norm - sxc) * (norm + sxc) / (ssx * ssc);
    const double w = 1.0 - w1;

    double p;
    if (n == 3) {
        constexpr double six_over_pi = 1.90985931710274;
        constexpr double asin_sqrt_3_4 = 1.04719755119660;
        p = six_over_pi * (std::asin(std::sqrt(w)) - asin_sqrt_3_4);
    } else if (n <= 11) {
        const double gamma = -2.273 + 0.459 * static_cast<double>(n);
        const double y = std::log(w1);
        if (y >= gamma) {
            p = 1e-99;
        } else {
            const double z = -std::log(gamma - y);
            const double mu = poly(c3, static_cast<double>(n));
            const double sigma = std::exp(poly(c4, static_cast<double>(n)));
            p = dist::normal_sf((z - mu) / sigma);
        }
    } else {
        const double y = std::log(w1);
        const double u = std::log(static_cast<double>(n));
        const double mu = poly(c5, u);
        const double sigma = std::exp(poly(c6, u));
        p = dist::normal_sf((y - mu) / sigma);
    }
    return make_result(w, p, alpha);
}

HypothesisTestResult lilliefors(std::span<const double> sample, double alpha,
                                std::size_t replications, std::uint64_t seed) {
    const std::size_t n = sample.size();
    if (n < 4) throw StatTestError("lilliefors: n must be >= 4");
    if (replications == 0) throw StatTestError("lilliefors: replications must be >= 1");

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double m = mean_of(x);
    const double var = sample_variance(x, m);
    if (var <= 0.0) throw StatTestError("lilliefors: zero variance sample");
    const double d_obs = lilliefors_distance(x, m, std::sqrt(var));

    const auto null_dist = lilliefors_null(n, replications, seed);
    const auto at_least = static_cast<std::size_t>(
        null_dist->end() - std::lower_bound(null_dist->begin(), null_dist->end(), d_obs));
    const double p = (1.0 + static_cast<double>(at_least)) /
                     (static_cast<double>(replications) + 1.0);
    return make_result(d_obs, p, alpha);
}

HypothesisTestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                          double alpha) {
    if (a.size() != b.size()) throw StatTestError("wilcoxon: samples must have equal length");
    if (a.empty()) throw StatTestError("wilcoxon: empty samples");

    std::vector<double> diffs;
    diffs.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    const std::size_t m = diffs.size();
    if (m == 0) throw StatTestError("wilcoxon: all paired differences are zero");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return std::abs(diffs[i]) < std::abs(diffs[j]);
    });

    // Average ranks within tie groups; accumulate the tie correction term.
    std::vector<double> rank(m);
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg_rank;
        const auto t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }

    double w_plus = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        if (diffs[k] > 0.0) w_plus += rank[k];
    }

    const auto md = static_cast<double>(m);
    const double mu = md * (md + 1.0) / 4.0;
    const double sigma2 = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0 - tie_term / 48.0;
    const double sigma = std::sqrt(sigma2);

    const double d = w_plus - mu;
    double z = 0.0;
    if (d != 0.0) z = (d - 0.5 * (d > 0 ? 1.0 : -1.0)) / sigma;  // continuity correction
    const double p = 2.0 * dist::normal_sf(std::abs(z));
    return make_result(w_plus, std::min(p, 1.0), alpha);
}

namespace {

std::map<int, std::vector<double>> group_by_month(const CashFlowSeries& series) {
    std::map<int, std::vector<double>> months;
    for (const auto& obs : series.observations) {
        const int key = static_cast<int>(obs.date.year()) * 12 +
                        static_cast<int>(static_cast<unsigned>(obs.date.month())) - 1;
        months[key].push_back(obs.net_flow);
    }
    return months;
}

}  // namespace

StationarityReport stationarity_fluctuation(const CashFlowSeries& series) {
    const auto values = series.values();
    const auto months = group_by_month(series);

    StationarityReport report;
    report.overall_mean = mean_of(values);
    if (values.size() < 2) throw StatTestError("stationarity: series too short");
    report.overall_variance = sample_variance(values, report.overall_mean);
    const double overall_std = std::sqrt(report.overall_variance);

    report.mean_within_errors = true;
    report.variance_within_errors = true;
    for (const auto& [key, month_values] : months) {
        if (month_values.size() < 2) continue;
        const auto n_month = static_cast<double>(month_values.size());
        const double m = mean_of(month_values);
        const double v = sample_variance(month_values, m);
        report.monthly_means.push_back(m);
        report.monthly_variances.push_back(v);

        const double mean_se = overall_std / std::sqrt(n_month);
        if (std::abs(m - report.overall_mean) > 2.0 * mean_se) {
            report.mean_within_errors = false;
        }
        const double var_se = report.overall_variance * std::sqrt(2.0 / (n_month - 1.0));
        if (std::abs(v - report.overall_variance) > 2.0 * var_se) {
            report.variance_within_errors = false;
        }
    }
    if (report.monthly_means.size() < 2) {
        throw StatTestError("stationarity: need >= 2 months with >= 2 observations");
    }
    report.stationary = report.mean_within_errors && report.variance_within_errors;
    return report;
}

HypothesisTestResult stationarity_monthly_normality(const CashFlowSeries& series, double alpha,
                                                    std::size_t replications,
                                                    std::uint64_t seed) {
    const auto months = group_by_month(series);
    bool any = false;
    HypothesisTestResult worst;
    worst.p_value = 2.0;  // above any real p
    for (const auto& [key, month_values] : months) {
        if (month_values.size() < 4) continue;
        const auto r = lilliefors(month_values, alpha, replications, seed);
        if (!any || r.p_value < worst.p_value) worst = r;
        any = true;
    }
    if (!any) throw StatTestError("monthly normality: no month with >= 4 observations");
    return worst;
}

}  // namespace cashflow
