#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cashflow {

/// Calendar predictors of one instance: the only features the forecasters see.
struct FeatureRow {
    int day_of_month = 1;  // 1..31
    int day_of_week = 1;   // 1..7 ISO
};

struct TrainingPair {
    FeatureRow features;
    double target = 0.0;
};

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fitted forecaster: deterministic scalar prediction per feature row.
class ForecastModel {
public:
    virtual ~ForecastModel() = default;
    virtual double predict(const FeatureRow& row) const = 0;
    virtual std::string name() const = 0;
};

using ModelPtr = std::shared_ptr<ForecastModel>;

struct ForestParams {
    int n_trees = 100;
    int min_leaf = 5;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Seasonal-dummy OLS summary: intercept-first coefficients with their term
/// names, the overall F test and R^2.
struct SeasonalRegressionReport {
    std::vector<std::string> term_names;
    std::vector<double> coefficients;
    double f_statistic = 0.0;
    double p_value = 1.0;
    double r_squared = 0.0;
};

/// Baselines. mean predicts the training average, null always 0, persistence
/// the last training value.
ModelPtr fit_mean(std::span<const double> training);
ModelPtr fit_null();
ModelPtr fit_persistence(std::span<const double> training);

/// Least squares on day-of-month dummies (reference 31) and day-of-week
/// dummies (largest observed weekday as reference); dummy columns never
/// observed in training are dropped. Solved by column-pivoted QR.
std::pair<ModelPtr, SeasonalRegressionReport> ols_seasonal_fit(
    std::span<const TrainingPair> training);

/// Random forest of regression trees over the two categorical features.
/// Split search orders a feature's categories by mean response and scans
/// cut points by variance reduction; leaves predict the mean.
ModelPtr forest_fit(std::span<const TrainingPair> training, const ForestParams& params);

}  // namespace cashflow
