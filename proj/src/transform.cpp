#include "cashflow/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cashflow/models.hpp"

namespace cashflow {

namespace {

struct MeanStd {
    double mean;
    double std;
};

MeanStd mean_and_sample_std(std::span<const double> values) {
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

}  // namespace

std::vector<double> trim_sigma(std::span<const double> values, double k) {
    if (values.size() < 2) throw TransformError("trim_sigma: need at least 2 values");
    const auto [mean, std] = mean_and_sample_std(values);
    if (std == 0.0) throw TransformError("trim_sigma: zero variance");
    std::vector<double> kept;
    kept.reserve(values.size());
    for (double v : values) {
        if (std::abs(v - mean) <= k * std) kept.push_back(v);
    }
    return kept;
}

CashFlowSeries trim_sigma_series(const CashFlowSeries& series, double k) {
    const auto y = series.values();
    if (y.size() < 2) throw TransformError("trim_sigma: need at least 2 values");
    const auto [mean, std] = mean_and_sample_std(y);
    if (std == 0.0) throw TransformError("trim_sigma: zero variance");
    CashFlowSeries out;
    out.company_id = series.company_id;
    for (const auto& obs : series.observations) {
        if (std::abs(obs.net_flow - mean) <= k * std) out.observations.push_back(obs);
    }
    return out;
}

double boxcox_apply_one(double y, const BoxCoxParams& params) {
    const double shifted = y + params.lambda2;
    if (shifted <= 0.0) {
        throw TransformError("boxcox: nonpositive shifted value " + std::to_string(shifted));
    }
    if (params.lambda1 == 0.0) return std::log(shifted);
    return (std::pow(shifted, params.lambda1) - 1.0) / params.lambda1;
}

double boxcox_inverse_one(double z, const BoxCoxParams& params) {
    if (params.lambda1 == 0.0) return std::exp(z) - params.lambda2;
    const double base = params.lambda1 * z + 1.0;
    if (base <= 0.0) {
        throw TransformError("boxcox inverse: value " + std::to_string(z) +
                             " outside the transform range");
    }
    return std::pow(base, 1.0 / params.lambda1) - params.lambda2;
}

std::vector<double> boxcox_apply(std::span<const double> values, const BoxCoxParams& params) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double y : values) out.push_back(boxcox_apply_one(y, params));
    return out;
}

std::vector<double> boxcox_inverse(std::span<const double> values, const BoxCoxParams& params) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double z : values) out.push_back(boxcox_inverse_one(z, params));
    return out;
}

double boxcox_profile_loglik(const CashFlowSeries& series, const BoxCoxParams& params) {
    const auto y = series.values();
    const auto n = static_cast<double>(y.size());
    const auto transformed = boxcox_apply(y, params);

    std::vector<TrainingPair> pairs;
    pairs.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        pairs.push_back({FeatureRow{series.observations[i].day_of_month,
                                    series.observations[i].day_of_week},
                         transformed[i]});
    }
    const auto [model, report] = ols_seasonal_fit(pairs);

    double rss = 0.0;
    for (const auto& pair : pairs) {
        const double r = pair.target - model->predict(pair.features);
        rss += r * r;
    }
    // Guard the degenerate perfect fit; the likelihood diverges there.
    rss = std::max(rss, 1e-300);

    double log_shift_sum = 0.0;
    for (double v : y) log_shift_sum += std::log(v + params.lambda2);
    return -(n / 2.0) * std::log(rss / n) + (params.lambda1 - 1.0) * log_shift_sum;
}

BoxCoxParams boxcox_fit_lambda(const CashFlowSeries& series) {
    const auto y = series.values();
    if (y.size() <= 35) {
        throw TransformError("boxcox_fit_lambda: need more than 35 observations");
    }
    const double min_value = *std::min_element(y.begin(), y.end());
    BoxCoxParams params;
    if (min_value < 0.0) {
        params.lambda2 = -2.0 * min_value;
    } else if (min_value == 0.0) {
        params.lambda2 = 1.0;
    } else {
        params.lambda2 = 0.0;
    }

    double best_loglik = -std::numeric_limits<double>::infinity();
    double best_lambda1 = 1.0;
    for (int step = -200; step <= 200; ++step) {
        BoxCoxParams candidate{static_cast<double>(step) / 100.0, params.lambda2};
        const double ll = boxcox_profile_loglik(series, candidate);
        if (ll > best_loglik) {
            best_loglik = ll;
            best_lambda1 = candidate.lambda1;
        }
    }
    params.lambda1 = best_lambda1;
    return params;
}

std::vector<double> difference(std::span<const double> values) {
    if (values.size() < 2) throw TransformError("difference: need at least 2 values");
    std::vector<double> out;
    out.reserve(values.size() - 1);
    for (std::size_t t = 0; t + 1 < values.size(); ++t) {
        out.push_back(values[t + 1] - values[t]);
    }
    return out;
}

std::pair<CashFlowSeries, OutlierTreatmentReport> replace_outliers(const CashFlowSeries& series,
                                                                   double k,
                                                                   double train_fraction) {
    if (k <= 0.0) throw TransformError("replace_outliers: k must be > 0");
    if (train_fraction <= 0.0 || train_fraction > 1.0) {
        throw TransformError("replace_outliers: train_fraction must be in (0, 1]");
    }
    const auto y = series.values();
    const auto n = y.size();
    const auto train_n = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
    if (train_n < 2) throw TransformError("replace_outliers: training window too short");
    const auto [train_mean, train_std] =
        mean_and_sample_std(std::span<const double>(y.data(), train_n));
    if (train_std == 0.0) throw TransformError("replace_outliers: zero training variance");

    std::vector<bool> flagged(n, false);
    OutlierTreatmentReport report;
    report.sigma_threshold = k;
    report.train_mean = train_mean;
    report.train_std = train_std;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(y[i] - train_mean) > k * train_std) {
            flagged[i] = true;
            report.replaced_indices.push_back(i);
        }
    }
    if (report.replaced_indices.size() == n) {
        throw TransformError("replace_outliers: every observation flagged");
    }

    CashFlowSeries treated = series;
    if (!report.replaced_indices.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!flagged[i]) continue;
            // Nearest unflagged neighbor on each side; straight line between
            // them by index distance, or the single neighbor at the edges.
            std::ptrdiff_t left = static_cast<std::ptrdiff_t>(i) - 1;
            while (left >= 0 && flagged[static_cast<std::size_t>(left)]) --left;
            std::size_t right = i + 1;
            while (right < n && flagged[right]) ++right;

            double value;
            if (left < 0) {
                value = y[right];
            } else if (right >= n) {
                value = y[static_cast<std::size_t>(left)];
            } else {
                const double yl = y[static_cast<std::size_t>(left)];
                const double yr = y[right];
                const double span = static_cast<double>(right) - static_cast<double>(left);
                value = yl + (yr - yl) * (static_cast<double>(i) - static_cast<double>(left)) / span;
            }
            treated.observations[i].net_flow = value;
        }
    }
    return {std::move(treated), std::move(report)};
}

}  // namespace cashflow
