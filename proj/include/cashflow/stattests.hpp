#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cashflow/dataset.hpp"

namespace cashflow {

/// Outcome of any hypothesis test at level alpha. rejected <=> p_value < alpha.
struct HypothesisTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool rejected = false;
};

struct AcfResult {
    std::size_t max_lag = 0;
    std::vector<double> coefficients;  // r_1..r_max_lag
};

/// Month-by-month mean/variance fluctuation check. The series counts as
/// stationary iff both the mean and the variance of every month stay inside
/// a 2-standard-error band around the overall values.
struct StationarityReport {
    std::vector<double> monthly_means;
    std::vector<double> monthly_variances;
    double overall_mean = 0.0;
    double overall_variance = 0.0;
    bool mean_within_errors = false;
    bool variance_within_errors = false;
    bool stationary = false;
};

class StatTestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sample autocorrelation at lags 1..max_lag (full-sample denominator).
AcfResult acf(std::span<const double> values, std::size_t max_lag);

/// Ljung-Box portmanteau test: Q = n(n+2) sum r_k^2/(n-k), chi-squared with
/// `lags` degrees of freedom.
HypothesisTestResult ljung_box(std::span<const double> values, std::size_t lags, double alpha);

/// Default lag count used by the report commands when none is given.
std::size_t default_ljung_box_lags(std::size_t n);

/// Shapiro-Wilk W with Royston's coefficient and p-value approximation,
/// valid for 3 <= n <= 5000.
HypothesisTestResult shapiro_wilk(std::span<const double> sample, double alpha);

/// Lilliefors (Kolmogorov-Smirnov with estimated mean/std) normality test.
/// The p-value is Monte Carlo under the null with a fixed seed, so equal
/// (n, replications, seed) calls share one simulated null distribution.
HypothesisTestResult lilliefors(std::span<const double> sample, double alpha,
                                std::size_t replications = 10000, std::uint64_t seed = 1);

/// Two-sided Wilcoxon signed-rank test on paired differences a_i - b_i.
/// Zero differences are discarded, ties get average ranks, and the p-value
/// is asymptotic normal with tie and continuity corrections. The statistic
/// is W+ = sum of ranks of positive differences.
HypothesisTestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                          double alpha);

/// Mean/variance fluctuation stationarity test over calendar months with at
/// least 2 observations; needs at least 2 such months.
StationarityReport stationarity_fluctuation(const CashFlowSeries& series);

/// Emery-style stationarity check: Lilliefors normality per calendar month
/// (months with >= 4 observations); the aggregate rejects iff any month
/// rejects. Reported statistic/p come from the worst month.
HypothesisTestResult stationarity_monthly_normality(const CashFlowSeries& series, double alpha,
                                                    std::size_t replications = 10000,
                                                    std::uint64_t seed = 1);

}  // namespace cashflow
