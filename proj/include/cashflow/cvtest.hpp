#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cashflow/dataset.hpp"
#include "cashflow/models.hpp"
#include "cashflow/transform.hpp"

namespace cashflow {

enum class SeriesLabel { Trivial, Linear, NonLinear };

std::string to_string(SeriesLabel label);

enum class BaselineKind { Mean, Null, Persistence };

struct CvConfig {
    double train_fraction = 0.8;
    std::size_t horizon = 20;
    double alpha = 0.05;
    std::uint64_t seed = 0;
};

/// Which concrete forecasters fill the baseline/linear/non-linear slots.
/// The forest's per-fold seeds are derived from CvConfig::seed, so the seed
/// inside ForestParams is ignored here.
struct CvModelSuite {
    BaselineKind baseline = BaselineKind::Mean;
    ForestParams forest{};
};

/// Average squared error per forecast step h = 1..horizon for one model.
struct CvErrorProfile {
    std::string model_name;
    std::vector<double> errors_by_horizon;

    double total() const;
};

struct CvProfiles {
    CvErrorProfile baseline;
    CvErrorProfile linear;
    CvErrorProfile nonlinear;
};

struct LabelReport {
    SeriesLabel label = SeriesLabel::Trivial;
    double reg_nse = 0.0;
    double rf_nse = 0.0;
    double wilcoxon_statistic = 0.0;  // linear-vs-nonlinear comparison
    double wilcoxon_p = 1.0;
};

/// Effect of one data treatment on the cross-validated labels.
/// noise_reduction > 0 means the treatment reduced total model error.
struct ImpactReport {
    SeriesLabel label_before = SeriesLabel::Trivial;
    SeriesLabel label_after = SeriesLabel::Trivial;
    double noise_reduction = 0.0;
};

class CvTestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rolling-origin (expanding window) cross-validation: with k =
/// floor(train_fraction * T), for each origin i = 1..T-k-H+1 fit all three
/// models on instances 1..k+i-1 and score squared errors on the H instances
/// k+i..k+H+i-1. When `transform` is given, models are fitted on the
/// transformed series and forecasts are mapped back before scoring, so the
/// profiles are always on the original scale.
CvProfiles rolling_cv(const CashFlowSeries& series, const CvModelSuite& suite,
                      const CvConfig& config,
                      const std::optional<BoxCoxParams>& transform = std::nullopt);

/// Total-error ratio against the baseline profile; < 1 beats the baseline.
double nse(const CvErrorProfile& model_profile, const CvErrorProfile& baseline_profile);

/// The flow-chart decision: Trivial when neither model significantly beats
/// the baseline, otherwise NonLinear when the non-linear model significantly
/// beats the linear one, otherwise Linear. "Significantly beats" = two-sided
/// Wilcoxon p < alpha on the per-horizon error pairs plus a positive mean
/// error difference in the candidate's favor.
LabelReport label_series(const CvProfiles& profiles, double alpha);

/// Progressive outlier replacement at each sigma level (thresholds from the
/// training window), re-running the cross-validated test after each level.
/// Each report compares against the previous level's run.
std::vector<ImpactReport> outlier_impact_experiment(const CashFlowSeries& series,
                                                    const CvConfig& config,
                                                    const std::vector<double>& sigma_levels =
                                                        {5.0, 4.0, 3.0},
                                                    const CvModelSuite& suite = {});

/// Outlier treatment, then a Box-Cox transform fitted on the training window
/// of the treated series; compares the transformed-space run against the
/// outlier-treated-only run.
ImpactReport boxcox_impact_experiment(const CashFlowSeries& series, const CvConfig& config,
                                      const std::vector<double>& sigma_levels = {5.0, 4.0, 3.0},
                                      const CvModelSuite& suite = {});

}  // namespace cashflow
