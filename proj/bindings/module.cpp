#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cashflow/cvtest.hpp"
#include "cashflow/dataset.hpp"
#include "cashflow/models.hpp"
#include "cashflow/stattests.hpp"
#include "cashflow/synth.hpp"
#include "cashflow/transform.hpp"

namespace py = pybind11;
using namespace cashflow;

namespace {

Date date_from_string(const std::string& text) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d", &y, &m, &d) != 3) {
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + text + "'");
    }
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw std::invalid_argument("invalid date '" + text + "'");
    return date;
}

CashFlowSeries make_series(int company_id, const std::vector<std::string>& dates,
                           const std::vector<double>& values) {
    if (dates.size() != values.size()) {
        throw std::invalid_argument("dates and values must have equal length");
    }
    CashFlowSeries series;
    series.company_id = company_id;
    series.observations.reserve(dates.size());
    for (std::size_t i = 0; i < dates.size(); ++i) {
        CashFlowObservation obs;
        obs.date = date_from_string(dates[i]);
        obs.net_flow = values[i];
        obs.day_of_month = static_cast<int>(static_cast<unsigned>(obs.date.day()));
        obs.day_of_week = static_cast<int>(
            std::chrono::weekday{std::chrono::sys_days{obs.date}}.iso_encoding());
        series.observations.push_back(obs);
    }
    return series;
}

std::vector<TrainingPair> pairs_from_tuples(
    const std::vector<std::tuple<int, int, double>>& rows) {
    std::vector<TrainingPair> pairs;
    pairs.reserve(rows.size());
    for (const auto& [dom, dow, y] : rows) pairs.push_back({FeatureRow{dom, dow}, y});
    return pairs;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Daily cash flow diagnostics: summaries, hypothesis tests, transformations "
              "and the cross-validated non-linearity label";

    py::register_exception<DatasetError>(m, "DatasetError");
    py::register_exception<StatTestError>(m, "StatTestError");
    py::register_exception<TransformError>(m, "TransformError");
    py::register_exception<ModelError>(m, "ModelError");
    py::register_exception<CvTestError>(m, "CvTestError");
    py::register_exception<SynthError>(m, "SynthError");

    py::class_<CashFlowObservation>(m, "CashFlowObservation")
        .def_property_readonly("date",
                               [](const CashFlowObservation& o) { return format_date(o.date); })
        .def_readonly("net_flow", &CashFlowObservation::net_flow)
        .def_readonly("day_of_month", &CashFlowObservation::day_of_month)
        .def_readonly("day_of_week", &CashFlowObservation::day_of_week);

    py::class_<CashFlowSeries>(m, "CashFlowSeries")
        .def_readonly("company_id", &CashFlowSeries::company_id)
        .def_readonly("observations", &CashFlowSeries::observations)
        .def("values", &CashFlowSeries::values)
        .def("__len__", &CashFlowSeries::size)
        .def("__repr__", [](const CashFlowSeries& s) {
            return "<CashFlowSeries company=" + std::to_string(s.company_id) + " length=" +
                   std::to_string(s.size()) + ">";
        });

    py::class_<SummaryStatistics>(m, "SummaryStatistics")
        .def_readonly("length", &SummaryStatistics::length)
        .def_readonly("null_share", &SummaryStatistics::null_share)
        .def_readonly("mean", &SummaryStatistics::mean)
        .def_readonly("std", &SummaryStatistics::std)
        .def_readonly("excess_kurtosis", &SummaryStatistics::excess_kurtosis)
        .def_readonly("skewness", &SummaryStatistics::skewness)
        .def_readonly("min", &SummaryStatistics::min)
        .def_readonly("max", &SummaryStatistics::max);

    py::class_<LaggedPairs>(m, "LaggedPairs")
        .def_readonly("lag", &LaggedPairs::lag)
        .def_readonly("pairs", &LaggedPairs::pairs);

    m.def("make_series", &make_series, py::arg("company_id"), py::arg("dates"),
          py::arg("values"), "Build a series from ISO dates and values");
    m.def("parse_dataset_file", &parse_dataset_file, py::arg("path"));
    m.def(
        "parse_dataset",
        [](const std::string& text) {
            std::istringstream in(text);
            return parse_dataset(in);
        },
        py::arg("csv_text"));
    m.def(
        "write_dataset",
        [](const std::vector<CashFlowSeries>& dataset) {
            std::ostringstream out;
            write_dataset(dataset, out);
            return out.str();
        },
        py::arg("dataset"));
    m.def("summarize", &summarize, py::arg("series"));
    m.def("poincare_pairs", &poincare_pairs, py::arg("series"), py::arg("lag") = 1);

    py::class_<HypothesisTestResult>(m, "HypothesisTestResult")
        .def_readonly("statistic", &HypothesisTestResult::statistic)
        .def_readonly("p_value", &HypothesisTestResult::p_value)
        .def_readonly("alpha", &HypothesisTestResult::alpha)
        .def_readonly("rejected", &HypothesisTestResult::rejected)
        .def("__repr__", [](const HypothesisTestResult& r) {
            return "<HypothesisTestResult statistic=" + std::to_string(r.statistic) +
                   " p=" + std::to_string(r.p_value) + ">";
        });

    py::class_<AcfResult>(m, "AcfResult")
        .def_readonly("max_lag", &AcfResult::max_lag)
        .def_readonly("coefficients", &AcfResult::coefficients);

    py::class_<StationarityReport>(m, "StationarityReport")
        .def_readonly("monthly_means", &StationarityReport::monthly_means)
        .def_readonly("monthly_variances", &StationarityReport::monthly_variances)
        .def_readonly("overall_mean", &StationarityReport::overall_mean)
        .def_readonly("overall_variance", &StationarityReport::overall_variance)
        .def_readonly("mean_within_errors", &StationarityReport::mean_within_errors)
        .def_readonly("variance_within_errors", &StationarityReport::variance_within_errors)
        .def_readonly("stationary", &StationarityReport::stationary);

    m.def(
        "acf", [](const std::vector<double>& v, std::size_t max_lag) { return acf(v, max_lag); },
        py::arg("values"), py::arg("max_lag"));
    m.def(
        "ljung_box",
        [](const std::vector<double>& v, std::size_t lags, double alpha) {
            return ljung_box(v, lags, alpha);
        },
        py::arg("values"), py::arg("lags"), py::arg("alpha") = 0.05);
    m.def(
        "shapiro_wilk",
        [](const std::vector<double>& v, double alpha) { return shapiro_wilk(v, alpha); },
        py::arg("sample"), py::arg("alpha") = 0.05);
    m.def(
        "lilliefors",
        [](const std::vector<double>& v, double alpha, std::size_t replications,
           std::uint64_t seed) { return lilliefors(v, alpha, replications, seed); },
        py::arg("sample"), py::arg("alpha") = 0.05, py::arg("replications") = 10000,
        py::arg("seed") = 1);
    m.def(
        "wilcoxon_signed_rank",
        [](const std::vector<double>& a, const std::vector<double>& b, double alpha) {
            return wilcoxon_signed_rank(a, b, alpha);
        },
        py::arg("a"), py::arg("b"), py::arg("alpha") = 0.05);
    m.def("stationarity_fluctuation", &stationarity_fluctuation, py::arg("series"));
    m.def("stationarity_monthly_normality", &stationarity_monthly_normality, py::arg("series"),
          py::arg("alpha") = 0.05, py::arg("replications") = 10000, py::arg("seed") = 1);

    py::class_<BoxCoxParams>(m, "BoxCoxParams")
        .def(py::init([](double lambda1, double lambda2) {
                 return BoxCoxParams{lambda1, lambda2};
             }),
             py::arg("lambda1"), py::arg("lambda2") = 0.0)
        .def_readwrite("lambda1", &BoxCoxParams::lambda1)
        .def_readwrite("lambda2", &BoxCoxParams::lambda2)
        .def("__repr__", [](const BoxCoxParams& p) {
            return "<BoxCoxParams lambda1=" + std::to_string(p.lambda1) +
                   " lambda2=" + std::to_string(p.lambda2) + ">";
        });

    py::class_<OutlierTreatmentReport>(m, "OutlierTreatmentReport")
        .def_readonly("sigma_threshold", &OutlierTreatmentReport::sigma_threshold)
        .def_readonly("replaced_indices", &OutlierTreatmentReport::replaced_indices)
        .def_readonly("train_mean", &OutlierTreatmentReport::train_mean)
        .def_readonly("train_std", &OutlierTreatmentReport::train_std);

    m.def(
        "trim_sigma", [](const std::vector<double>& v, double k) { return trim_sigma(v, k); },
        py::arg("values"), py::arg("k") = 3.0);
    m.def(
        "boxcox_apply",
        [](const std::vector<double>& v, const BoxCoxParams& p) { return boxcox_apply(v, p); },
        py::arg("values"), py::arg("params"));
    m.def(
        "boxcox_inverse",
        [](const std::vector<double>& v, const BoxCoxParams& p) { return boxcox_inverse(v, p); },
        py::arg("values"), py::arg("params"));
    m.def("boxcox_fit_lambda", &boxcox_fit_lambda, py::arg("series"));
    m.def("boxcox_profile_loglik", &boxcox_profile_loglik, py::arg("series"), py::arg("params"));
    m.def(
        "difference", [](const std::vector<double>& v) { return difference(v); },
        py::arg("values"));
    m.def("replace_outliers", &replace_outliers, py::arg("series"), py::arg("k"),
          py::arg("train_fraction") = 0.8);

    py::class_<FeatureRow>(m, "FeatureRow")
        .def(py::init([](int dom, int dow) { return FeatureRow{dom, dow}; }),
             py::arg("day_of_month"), py::arg("day_of_week"))
        .def_readwrite("day_of_month", &FeatureRow::day_of_month)
        .def_readwrite("day_of_week", &FeatureRow::day_of_week);

    py::class_<ForestParams>(m, "ForestParams")
        .def(py::init([](int n_trees, int min_leaf, bool bootstrap, std::uint64_t seed) {
                 return ForestParams{n_trees, min_leaf, bootstrap, seed};
             }),
             py::arg("n_trees") = 100, py::arg("min_leaf") = 5, py::arg("bootstrap") = true,
             py::arg("seed") = 0)
        .def_readwrite("n_trees", &ForestParams::n_trees)
        .def_readwrite("min_leaf", &ForestParams::min_leaf)
        .def_readwrite("bootstrap", &ForestParams::bootstrap)
        .def_readwrite("seed", &ForestParams::seed);

    py::class_<SeasonalRegressionReport>(m, "SeasonalRegressionReport")
        .def_readonly("term_names", &SeasonalRegressionReport::term_names)
        .def_readonly("coefficients", &SeasonalRegressionReport::coefficients)
        .def_readonly("f_statistic", &SeasonalRegressionReport::f_statistic)
        .def_readonly("p_value", &SeasonalRegressionReport::p_value)
        .def_readonly("r_squared", &SeasonalRegressionReport::r_squared);

    py::class_<ForecastModel, ModelPtr>(m, "ForecastModel")
        .def("predict", &ForecastModel::predict, py::arg("row"))
        .def_property_readonly("name", &ForecastModel::name);

    m.def(
        "fit_mean", [](const std::vector<double>& v) { return fit_mean(v); },
        py::arg("training"));
    m.def("fit_null", &fit_null);
    m.def(
        "fit_persistence", [](const std::vector<double>& v) { return fit_persistence(v); },
        py::arg("training"));
    m.def(
        "ols_seasonal_fit",
        [](const std::vector<std::tuple<int, int, double>>& rows) {
            return ols_seasonal_fit(pairs_from_tuples(rows));
        },
        py::arg("training"), "Training rows as (day_of_month, day_of_week, target) tuples");
    m.def(
        "forest_fit",
        [](const std::vector<std::tuple<int, int, double>>& rows, const ForestParams& params) {
            return forest_fit(pairs_from_tuples(rows), params);
        },
        py::arg("training"), py::arg("params") = ForestParams{});

    py::enum_<SeriesLabel>(m, "SeriesLabel")
        .value("Trivial", SeriesLabel::Trivial)
        .value("Linear", SeriesLabel::Linear)
        .value("NonLinear", SeriesLabel::NonLinear);

    py::enum_<BaselineKind>(m, "BaselineKind")
        .value("Mean", BaselineKind::Mean)
        .value("Null", BaselineKind::Null)
        .value("Persistence", BaselineKind::Persistence);

    py::class_<CvConfig>(m, "CvConfig")
        .def(py::init([](double train_fraction, std::size_t horizon, double alpha,
                         std::uint64_t seed) {
                 return CvConfig{train_fraction, horizon, alpha, seed};
             }),
             py::arg("train_fraction") = 0.8, py::arg("horizon") = 20, py::arg("alpha") = 0.05,
             py::arg("seed") = 0)
        .def_readwrite("train_fraction", &CvConfig::train_fraction)
        .def_readwrite("horizon", &CvConfig::horizon)
        .def_readwrite("alpha", &CvConfig::alpha)
        .def_readwrite("seed", &CvConfig::seed);

    py::class_<CvModelSuite>(m, "CvModelSuite")
        .def(py::init([](BaselineKind baseline, ForestParams forest) {
                 return CvModelSuite{baseline, forest};
             }),
             py::arg("baseline") = BaselineKind::Mean, py::arg("forest") = ForestParams{})
        .def_readwrite("baseline", &CvModelSuite::baseline)
        .def_readwrite("forest", &CvModelSuite::forest);

    py::class_<CvErrorProfile>(m, "CvErrorProfile")
        .def_readonly("model_name", &CvErrorProfile::model_name)
        .def_readonly("errors_by_horizon", &CvErrorProfile::errors_by_horizon)
        .def("total", &CvErrorProfile::total);

    py::class_<CvProfiles>(m, "CvProfiles")
        .def_readonly("baseline", &CvProfiles::baseline)
        .def_readonly("linear", &CvProfiles::linear)
        .def_readonly("nonlinear", &CvProfiles::nonlinear);

    py::class_<LabelReport>(m, "LabelReport")
        .def_readonly("label", &LabelReport::label)
        .def_readonly("reg_nse", &LabelReport::reg_nse)
        .def_readonly("rf_nse", &LabelReport::rf_nse)
        .def_readonly("wilcoxon_statistic", &LabelReport::wilcoxon_statistic)
        .def_readonly("wilcoxon_p", &LabelReport::wilcoxon_p)
        .def("__repr__", [](const LabelReport& r) {
            return "<LabelReport label=" + to_string(r.label) + ">";
        });

    py::class_<ImpactReport>(m, "ImpactReport")
        .def_readonly("label_before", &ImpactReport::label_before)
        .def_readonly("label_after", &ImpactReport::label_after)
        .def_readonly("noise_reduction", &ImpactReport::noise_reduction);

    m.def("rolling_cv", &rolling_cv, py::arg("series"), py::arg("suite") = CvModelSuite{},
          py::arg("config") = CvConfig{},
          py::arg("transform") = std::optional<BoxCoxParams>{});
    m.def("nse", &nse, py::arg("model_profile"), py::arg("baseline_profile"));
    m.def("label_series", &label_series, py::arg("profiles"), py::arg("alpha") = 0.05);
    m.def("outlier_impact_experiment", &outlier_impact_experiment, py::arg("series"),
          py::arg("config") = CvConfig{},
          py::arg("sigma_levels") = std::vector<double>{5.0, 4.0, 3.0},
          py::arg("suite") = CvModelSuite{});
    m.def("boxcox_impact_experiment", &boxcox_impact_experiment, py::arg("series"),
          py::arg("config") = CvConfig{},
          py::arg("sigma_levels") = std::vector<double>{5.0, 4.0, 3.0},
          py::arg("suite") = CvModelSuite{});

    py::enum_<SynthKind>(m, "SynthKind")
        .value("WhiteNoise", SynthKind::WhiteNoise)
        .value("Sinusoid", SynthKind::Sinusoid)
        .value("SeasonalLinear", SynthKind::SeasonalLinear)
        .value("NonLinearInteraction", SynthKind::NonLinearInteraction);

    py::class_<InteractionRegion>(m, "InteractionRegion")
        .def(py::init([](int dom_min, int dom_max, int dow_min, int dow_max, double value) {
                 return InteractionRegion{dom_min, dom_max, dow_min, dow_max, value};
             }),
             py::arg("dom_min") = 1, py::arg("dom_max") = 31, py::arg("dow_min") = 1,
             py::arg("dow_max") = 7, py::arg("value") = 0.0)
        .def_readwrite("dom_min", &InteractionRegion::dom_min)
        .def_readwrite("dom_max", &InteractionRegion::dom_max)
        .def_readwrite("dow_min", &InteractionRegion::dow_min)
        .def_readwrite("dow_max", &InteractionRegion::dow_max)
        .def_readwrite("value", &InteractionRegion::value);

    py::class_<SynthSpec>(m, "SynthSpec")
        .def(py::init())
        .def_readwrite("kind", &SynthSpec::kind)
        .def_readwrite("length", &SynthSpec::length)
        .def_readwrite("seed", &SynthSpec::seed)
        .def_readwrite("level", &SynthSpec::level)
        .def_readwrite("noise_std", &SynthSpec::noise_std)
        .def_readwrite("period", &SynthSpec::period)
        .def_readwrite("amplitude", &SynthSpec::amplitude)
        .def_readwrite("dom_effects", &SynthSpec::dom_effects)
        .def_readwrite("dow_effects", &SynthSpec::dow_effects)
        .def_readwrite("regions", &SynthSpec::regions)
        .def_readwrite("default_value", &SynthSpec::default_value);

    m.def("month_end_interaction_rule", &month_end_interaction_rule);
    m.def("generate", &generate, py::arg("spec"), py::arg("company_id") = 1);
}
