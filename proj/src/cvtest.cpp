#include "cashflow/cvtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "cashflow/rng.hpp"
#include "cashflow/stattests.hpp"

namespace cashflow {

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Candidate significantly beats the reference when the two-sided Wilcoxon on
// the paired per-horizon errors rejects and the candidate's average error is
// lower. A degenerate all-zero comparison throws through the Wilcoxon test.
bool beats(const CvErrorProfile& candidate, const CvErrorProfile& reference, double alpha) {
    const auto result =
        wilcoxon_signed_rank(reference.errors_by_horizon, candidate.errors_by_horizon, alpha);
    const double mean_gain =
        mean_of(reference.errors_by_horizon) - mean_of(candidate.errors_by_horizon);
    return result.rejected && mean_gain > 0.0;
}

bool all_differences_zero(const CvErrorProfile& a, const CvErrorProfile& b) {
    for (std::size_t h = 0; h < a.errors_by_horizon.size(); ++h) {
        if (a.errors_by_horizon[h] != b.errors_by_horizon[h]) return false;
    }
    return true;
}

double impact_error_total(const CvProfiles& profiles) {
    return profiles.linear.total() + profiles.nonlinear.total();
}

struct ChainResult {
    CashFlowSeries series;
    CvProfiles profiles;
    LabelReport report;
    std::vector<ImpactReport> stages;
};

// Shared by both impact experiments: run the progressive outlier treatment,
// re-validating after every level that actually changed the series.
ChainResult run_outlier_chain(const CashFlowSeries& series, const CvConfig& config,
                              const std::vector<double>& sigma_levels,
                              const CvModelSuite& suite) {
    ChainResult state{series, rolling_cv(series, suite, config), {}, {}};
    state.report = label_series(state.profiles, config.alpha);
    for (double k : sigma_levels) {
        auto [treated, treatment] = replace_outliers(state.series, k, config.train_fraction);
        if (treatment.replaced_indices.empty()) {
            state.stages.push_back({state.report.label, state.report.label, 0.0});
            continue;
        }
        const double error_before = impact_error_total(state.profiles);
        if (error_before <= 0.0) {
            throw CvTestError("outlier impact: zero model error before treatment");
        }
        CvProfiles profiles_after = rolling_cv(treated, suite, config);
        LabelReport report_after = label_series(profiles_after, config.alpha);
        const double reduction = 1.0 - impact_error_total(profiles_after) / error_before;
        state.stages.push_back({state.report.label, report_after.label, reduction});
        state.series = std::move(treated);
        state.profiles = std::move(profiles_after);
        state.report = report_after;
    }
    return state;
}

}  // namespace

std::string to_string(SeriesLabel label) {
    switch (label) {
        case SeriesLabel::Trivial: return "Trivial";
        case SeriesLabel::Linear: return "Linear";
        case SeriesLabel::NonLinear: return "Non-linear";
    }
    return "?";
}

double CvErrorProfile::total() const {
    return std::accumulate(errors_by_horizon.begin(), errors_by_horizon.end(), 0.0);
}

CvProfiles rolling_cv(const CashFlowSeries& series, const CvModelSuite& suite,
                      const CvConfig& config, const std::optional<BoxCoxParams>& transform) {
    if (config.horizon < 1) throw CvTestError("rolling_cv: horizon must be >= 1");
    if (config.train_fraction <= 0.0 || config.train_fraction >= 1.0) {
        throw CvTestError("rolling_cv: train_fraction must be in (0, 1)");
    }
    const std::size_t total = series.size();
    const auto k = static_cast<std::size_t>(config.train_fraction * static_cast<double>(total));
    const std::size_t horizon = config.horizon;
    if (total < k + horizon + 1 || total - k - horizon + 1 < 2) {
        throw CvTestError("rolling_cv: series too short for train_fraction and horizon");
    }
    const std::size_t n_origins = total - k - horizon + 1;

    const auto original = series.values();
    std::vector<double> working = transform ? boxcox_apply(original, *transform) : original;

    std::vector<TrainingPair> pairs(total);
    for (std::size_t t = 0; t < total; ++t) {
        pairs[t] = {FeatureRow{series.observations[t].day_of_month,
                               series.observations[t].day_of_week},
                    working[t]};
    }

    CvProfiles profiles;
    profiles.baseline.model_name = suite.baseline == BaselineKind::Mean ? "mean"
                                   : suite.baseline == BaselineKind::Null ? "null"
                                                                          : "persistence";
    profiles.linear.model_name = "ols_seasonal";
    profiles.nonlinear.model_name = "random_forest";
    profiles.baseline.errors_by_horizon.assign(horizon, 0.0);
    profiles.linear.errors_by_horizon.assign(horizon, 0.0);
    profiles.nonlinear.errors_by_horizon.assign(horizon, 0.0);

    for (std::size_t origin = 1; origin <= n_origins; ++origin) {
        const std::size_t train_len = k + origin - 1;
        const std::span<const double> train_values(working.data(), train_len);
        const std::span<const TrainingPair> train_pairs(pairs.data(), train_len);

        ModelPtr baseline;
        switch (suite.baseline) {
            case BaselineKind::Mean: baseline = fit_mean(train_values); break;
            case BaselineKind::Null: baseline = fit_null(); break;
            case BaselineKind::Persistence: baseline = fit_persistence(train_values); break;
        }
        auto [linear, regression_report] = ols_seasonal_fit(train_pairs);
        ForestParams forest_params = suite.forest;
        forest_params.seed = derive_seed(config.seed, {0xF0157ull, origin});
        ModelPtr nonlinear = forest_fit(train_pairs, forest_params);

        for (std::size_t h = 1; h <= horizon; ++h) {
            const std::size_t t = train_len + h - 1;  // 0-based index of the forecast target
            const FeatureRow& row = pairs[t].features;
            const double truth = original[t];
            const ForecastModel* models[3] = {baseline.get(), linear.get(), nonlinear.get()};
            double* sinks[3] = {&profiles.baseline.errors_by_horizon[h - 1],
                                &profiles.linear.errors_by_horizon[h - 1],
                                &profiles.nonlinear.errors_by_horizon[h - 1]};
            for (int m = 0; m < 3; ++m) {
                double forecast = models[m]->predict(row);
                if (transform) forecast = boxcox_inverse_one(forecast, *transform);
                const double err = forecast - truth;
                *sinks[m] += err * err;
            }
        }
    }

    const auto denom = static_cast<double>(n_origins);
    for (auto* profile : {&profiles.baseline, &profiles.linear, &profiles.nonlinear}) {
        for (double& e : profile->errors_by_horizon) e /= denom;
    }
    return profiles;
}

double nse(const CvErrorProfile& model_profile, const CvErrorProfile& baseline_profile) {
    const double denom = baseline_profile.total();
    if (denom <= 0.0) throw CvTestError("nse: baseline profile has zero total error");
    return model_profile.total() / denom;
}

LabelReport label_series(const CvProfiles& profiles, double alpha) {
    const std::size_t horizon = profiles.baseline.errors_by_horizon.size();
    if (horizon == 0 || profiles.linear.errors_by_horizon.size() != horizon ||
        profiles.nonlinear.errors_by_horizon.size() != horizon) {
        throw CvTestError("label_series: profiles must share a positive horizon");
    }

    LabelReport report;
    report.reg_nse = nse(profiles.linear, profiles.baseline);
    report.rf_nse = nse(profiles.nonlinear, profiles.baseline);

    const bool linear_beats_baseline = beats(profiles.linear, profiles.baseline, alpha);
    const bool forest_beats_baseline = beats(profiles.nonlinear, profiles.baseline, alpha);

    if (all_differences_zero(profiles.linear, profiles.nonlinear)) {
        // No evidence either way; the flow chart's "No" branch.
        report.wilcoxon_statistic = 0.0;
        report.wilcoxon_p = 1.0;
        report.label = (linear_beats_baseline || forest_beats_baseline) ? SeriesLabel::Linear
                                                                        : SeriesLabel::Trivial;
        return report;
    }

    const auto comparison = wilcoxon_signed_rank(profiles.linear.errors_by_horizon,
                                                 profiles.nonlinear.errors_by_horizon, alpha);
    report.wilcoxon_statistic = comparison.statistic;
    report.wilcoxon_p = comparison.p_value;

    if (!linear_beats_baseline && !forest_beats_baseline) {
        report.label = SeriesLabel::Trivial;
    } else if (beats(profiles.nonlinear, profiles.linear, alpha)) {
        report.label = SeriesLabel::NonLinear;
    } else {
        report.label = SeriesLabel::Linear;
    }
    return report;
}

std::vector<ImpactReport> outlier_impact_experiment(const CashFlowSeries& series,
                                                    const CvConfig& config,
                                                    const std::vector<double>& sigma_levels,
                                                    const CvModelSuite& suite) {
    return run_outlier_chain(series, config, sigma_levels, suite).stages;
}

ImpactReport boxcox_impact_experiment(const CashFlowSeries& series, const CvConfig& config,
                                      const std::vector<double>& sigma_levels,
                                      const CvModelSuite& suite) {
    ChainResult treated = run_outlier_chain(series, config, sigma_levels, suite);

    const auto k = static_cast<std::size_t>(config.train_fraction *
                                            static_cast<double>(treated.series.size()));
    CashFlowSeries train_window;
    train_window.company_id = treated.series.company_id;
    train_window.observations.assign(treated.series.observations.begin(),
                                     treated.series.observations.begin() +
                                         static_cast<std::ptrdiff_t>(k));
    const BoxCoxParams params = boxcox_fit_lambda(train_window);

    const double error_before = impact_error_total(treated.profiles);
    if (error_before <= 0.0) {
        throw CvTestError("boxcox impact: zero model error before transformation");
    }
    const CvProfiles transformed = rolling_cv(treated.series, suite, config, params);
    const LabelReport report_after = label_series(transformed, config.alpha);

    ImpactReport impact;
    impact.label_before = treated.report.label;
    impact.label_after = report_after.label;
    impact.noise_reduction = 1.0 - impact_error_total(transformed) / error_before;
    return impact;
}

}  // namespace cashflow
