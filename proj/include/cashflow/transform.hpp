#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "cashflow/dataset.hpp"

namespace cashflow {

/// Power-transform parameters: z = ((y + lambda2)^lambda1 - 1) / lambda1,
/// or log(y + lambda2) when lambda1 = 0.
struct BoxCoxParams {
    double lambda1 = 1.0;
    double lambda2 = 0.0;
};

/// What replace_outliers did: threshold used, which indices were replaced,
/// and the training-window statistics that defined the threshold.
struct OutlierTreatmentReport {
    double sigma_threshold = 0.0;
    std::vector<std::size_t> replaced_indices;
    double train_mean = 0.0;
    double train_std = 0.0;
};

class TransformError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Deletes observations with |y - mean| > k * std (mean/std over the full
/// input, sample std). Returns the surviving values in order.
std::vector<double> trim_sigma(std::span<const double> values, double k = 3.0);

/// Series variant of trim_sigma: drops the flagged observations, keeps dates.
CashFlowSeries trim_sigma_series(const CashFlowSeries& series, double k = 3.0);

std::vector<double> boxcox_apply(std::span<const double> values, const BoxCoxParams& params);
std::vector<double> boxcox_inverse(std::span<const double> values, const BoxCoxParams& params);
double boxcox_apply_one(double y, const BoxCoxParams& params);
double boxcox_inverse_one(double z, const BoxCoxParams& params);

/// Fits lambda2 by the shift rule (-2*min when min < 0; 1 when min = 0;
/// 0 otherwise) and lambda1 by maximizing the profile log-likelihood
/// -(n/2) log(RSS(l)/n) + (l - 1) sum log(y + lambda2) over the grid
/// [-2, 2] in steps of 0.01, with RSS from the day-of-month/day-of-week
/// dummy regression on the transformed series.
BoxCoxParams boxcox_fit_lambda(const CashFlowSeries& series);

/// Log-likelihood profile value at one lambda1 (exposed for grid checks).
double boxcox_profile_loglik(const CashFlowSeries& series, const BoxCoxParams& params);

/// First differences d_t = y_{t+1} - y_t.
std::vector<double> difference(std::span<const double> values);

/// Flags |y - train_mean| > k * train_std using the oldest
/// floor(train_fraction * n) observations, then replaces each flagged value
/// with the straight line between its nearest unflagged neighbors
/// (endpoints copy the single nearest unflagged value).
std::pair<CashFlowSeries, OutlierTreatmentReport> replace_outliers(const CashFlowSeries& series,
                                                                   double k,
                                                                   double train_fraction = 0.8);

}  // namespace cashflow
