#include "cli.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cashflow/rng.hpp"
#include "cashflow/stattests.hpp"
#include "cashflow/synth.hpp"
#include "cashflow/transform.hpp"

namespace cashflow::cli {

namespace {

using nlohmann::ordered_json;

std::string shortest_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string two_decimals(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

// Runs `work(i)` for i = 0..n-1 on `workers` threads; results land in a
// pre-sized vector, so output order never depends on scheduling.
template <typename Row>
std::vector<Row> parallel_rows(std::size_t n, std::size_t workers,
                               const std::function<Row(std::size_t)>& work) {
    std::vector<Row> rows(n);
    if (n == 0) return rows;
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) rows[i] = work(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                rows[i] = work(i);
            }
        });
    }
    for (auto& t : pool) t.join();
    return rows;
}

struct Warnings {
    std::string text;
    void add(const std::string& w) {
        if (!text.empty()) text += "; ";
        text += w;
    }
};

Cell opt_cell(const std::optional<double>& v) {
    if (v) return Cell{*v};
    return Cell{};
}

void push_test_cells(std::vector<Cell>& row, const std::function<HypothesisTestResult()>& test,
                     Warnings& warnings, const std::string& tag) {
    try {
        const auto result = test();
        row.emplace_back(result.statistic);
        row.emplace_back(result.p_value);
        row.emplace_back(result.rejected);
    } catch (const std::exception& e) {
        row.emplace_back();
        row.emplace_back();
        row.emplace_back();
        warnings.add(tag + ": " + e.what());
    }
}

std::vector<CashFlowSeries> load_input(const RunConfig& config) {
    if (config.input_path.empty()) throw DatasetError("no --input file given");
    auto dataset = parse_dataset_file(config.input_path);
    dataset = select_companies(std::move(dataset), config.companies);
    if (dataset.empty()) throw DatasetError("no series selected");
    return dataset;
}

CashFlowSeries differenced_series(const CashFlowSeries& series) {
    CashFlowSeries out;
    out.company_id = series.company_id;
    const auto diff = difference(series.values());
    out.observations.assign(series.observations.begin() + 1, series.observations.end());
    for (std::size_t i = 0; i < diff.size(); ++i) out.observations[i].net_flow = diff[i];
    return out;
}

}  // namespace

std::vector<CashFlowSeries> select_companies(std::vector<CashFlowSeries> dataset,
                                             const std::vector<int>& ids) {
    if (ids.empty()) return dataset;
    std::vector<CashFlowSeries> selected;
    for (auto& series : dataset) {
        if (std::find(ids.begin(), ids.end(), series.company_id) != ids.end()) {
            selected.push_back(std::move(series));
        }
    }
    return selected;
}

std::string render_csv(const ReportTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += csv_escape(table.columns[c]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) out += shortest_double(v);
                    else if constexpr (std::is_same_v<T, long long>) out += std::to_string(v);
                    else if constexpr (std::is_same_v<T, std::string>) out += csv_escape(v);
                    else if constexpr (std::is_same_v<T, bool>) out += v ? "true" : "false";
                },
                row[c]);
        }
        out += '\n';
    }
    return out;
}

std::string render_json(const ReportTable& table) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : table.rows) {
        ordered_json obj = ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::monostate>) {
                        obj[table.columns[c]] = nullptr;
                    } else {
                        obj[table.columns[c]] = v;
                    }
                },
                row[c]);
        }
        rows.push_back(std::move(obj));
    }
    ordered_json doc = ordered_json::object();
    doc[table.name] = std::move(rows);
    return doc.dump(2) + "\n";
}

std::string render_markdown(const ReportTable& table) {
    std::string out = "| ";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += " | ";
        out += table.columns[c];
    }
    out += " |\n|";
    for (std::size_t c = 0; c < table.columns.size(); ++c) out += " --- |";
    out += '\n';
    for (const auto& row : table.rows) {
        out += "| ";
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += " | ";
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) out += two_decimals(v);
                    else if constexpr (std::is_same_v<T, long long>) out += std::to_string(v);
                    else if constexpr (std::is_same_v<T, std::string>) out += v;
                    else if constexpr (std::is_same_v<T, bool>) out += v ? "yes" : "no";
                },
                row[c]);
        }
        out += " |\n";
    }
    return out;
}

std::string write_report(const ReportTable& table, const RunConfig& config) {
    std::string ext, body;
    if (config.format == "json") {
        ext = ".json";
        body = render_json(table);
    } else if (config.format == "markdown") {
        ext = ".md";
        body = render_markdown(table);
    } else if (config.format == "csv") {
        ext = ".csv";
        body = render_csv(table);
    } else {
        throw std::runtime_error("unknown format '" + config.format + "'");
    }
    std::filesystem::create_directories(config.out_dir);
    const auto path = (std::filesystem::path(config.out_dir) / (table.name + ext)).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << body;
    return path;
}

// ---------------------------------------------------------------------------
// summary
// ---------------------------------------------------------------------------

ReportTable summary_table(const std::vector<CashFlowSeries>& dataset, const RunConfig& config) {
    ReportTable table;
    table.name = "summary";
    table.columns = {"company", "length",   "null_pct", "mean", "std",
                     "kurtosis", "skewness", "min",      "max",  "warnings"};
    table.rows = parallel_rows<std::vector<Cell>>(
        dataset.size(), config.workers, [&](std::size_t i) {
            const auto& series = dataset[i];
            Warnings warnings;
            std::vector<Cell> row;
            row.emplace_back(static_cast<long long>(series.company_id));
            const auto stats = summarize(series);
            row.emplace_back(static_cast<long long>(stats.length));
            row.emplace_back(100.0 * stats.null_share);
            row.emplace_back(stats.mean);
            row.push_back(opt_cell(stats.std));
            row.push_back(opt_cell(stats.excess_kurtosis));
            row.push_back(opt_cell(stats.skewness));
            row.emplace_back(stats.min);
            row.emplace_back(stats.max);
            if (!stats.std) warnings.add("length < 2: no moment statistics");
            else if (!stats.excess_kurtosis) warnings.add("zero variance: no kurtosis/skewness");
            row.emplace_back(warnings.text);
            return row;
        });
    return table;
}

int cmd_summary(const RunConfig& config) {
    const auto dataset = load_input(config);
    const auto path = write_report(summary_table(dataset, config), config);
    std::cout << "wrote " << path << " (" << dataset.size() << " series)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

ReportTable tests_table(const std::vector<CashFlowSeries>& dataset, const RunConfig& config) {
    ReportTable table;
    table.name = "tests";
    table.columns = {"company", "length"};
    for (const std::string test : {"shapiro_raw", "shapiro_trim", "lilliefors_raw",
                                   "lilliefors_trim", "lilliefors_boxcox",
                                   "lilliefors_boxcox_trim", "ljung_box"}) {
        table.columns.push_back(test + "_stat");
        table.columns.push_back(test + "_p");
        table.columns.push_back(test + "_rejected");
    }
    table.columns.insert(table.columns.end(),
                         {"boxcox_lambda1", "boxcox_lambda2", "f_statistic", "f_p", "r_squared",
                          "fluct_stationary_raw", "fluct_stationary_diff",
                          "monthly_normal_stationary_raw", "monthly_normal_stationary_diff",
                          "warnings"});

    table.rows = parallel_rows<std::vector<Cell>>(
        dataset.size(), config.workers, [&](std::size_t i) {
            const auto& series = dataset[i];
            const auto values = series.values();
            Warnings warnings;
            std::vector<Cell> row;
            row.emplace_back(static_cast<long long>(series.company_id));
            row.emplace_back(static_cast<long long>(values.size()));

            const std::uint64_t lf_seed = derive_seed(config.seed, {0x11F0ull,
                                                      static_cast<std::uint64_t>(series.company_id)});
            const auto lf = [&](std::span<const double> sample) {
                return lilliefors(sample, config.alpha, config.lilliefors_replications, lf_seed);
            };

            std::optional<std::vector<double>> trimmed;
            try {
                trimmed = trim_sigma(values, 3.0);
            } catch (const std::exception& e) {
                warnings.add(std::string("trim: ") + e.what());
            }

            push_test_cells(row, [&] { return shapiro_wilk(values, config.alpha); }, warnings,
                            "shapiro_raw");
            push_test_cells(row, [&] {
                if (!trimmed) throw TransformError("no trimmed series");
                return shapiro_wilk(*trimmed, config.alpha);
            }, warnings, "shapiro_trim");
            push_test_cells(row, [&] { return lf(values); }, warnings, "lilliefors_raw");
            push_test_cells(row, [&] {
                if (!trimmed) throw TransformError("no trimmed series");
                return lf(*trimmed);
            }, warnings, "lilliefors_trim");

            std::optional<BoxCoxParams> params;
            try {
                params = boxcox_fit_lambda(series);
            } catch (const std::exception& e) {
                warnings.add(std::string("boxcox: ") + e.what());
            }
            push_test_cells(row, [&] {
                if (!params) throw TransformError("no box-cox fit");
                return lf(boxcox_apply(values, *params));
            }, warnings, "lilliefors_boxcox");
            push_test_cells(row, [&] {
                if (!params) throw TransformError("no box-cox fit");
                const auto trimmed_series = trim_sigma_series(series, 3.0);
                const auto trim_params = boxcox_fit_lambda(trimmed_series);
                return lf(boxcox_apply(trimmed_series.values(), trim_params));
            }, warnings, "lilliefors_boxcox_trim");

            const std::size_t lags = config.ljung_box_lags
                                         ? config.ljung_box_lags
                                         : default_ljung_box_lags(values.size());
            push_test_cells(row, [&] { return ljung_box(values, lags, config.alpha); }, warnings,
                            "ljung_box");

            if (params) {
                row.emplace_back(params->lambda1);
                row.emplace_back(params->lambda2);
            } else {
                row.emplace_back();
                row.emplace_back();
            }

            try {
                std::vector<TrainingPair> pairs;
                pairs.reserve(values.size());
                for (const auto& obs : series.observations) {
                    pairs.push_back({FeatureRow{obs.day_of_month, obs.day_of_week}, obs.net_flow});
                }
                const auto [model, report] = ols_seasonal_fit(pairs);
                row.emplace_back(report.f_statistic);
                row.emplace_back(report.p_value);
                row.emplace_back(report.r_squared);
            } catch (const std::exception& e) {
                row.emplace_back();
                row.emplace_back();
                row.emplace_back();
                warnings.add(std::string("regression: ") + e.what());
            }

            const auto fluct_cell = [&](const char* tag, auto make_series) -> Cell {
                try {
                    return Cell{stationarity_fluctuation(make_series()).stationary};
                } catch (const std::exception& e) {
                    warnings.add(std::string(tag) + ": " + e.what());
                    return Cell{};
                }
            };
            row.push_back(fluct_cell("fluct_raw", [&] { return series; }));
            row.push_back(fluct_cell("fluct_diff", [&] { return differenced_series(series); }));

            const auto monthly_cell = [&](const char* tag, auto make_series) -> Cell {
                try {
                    const auto result = stationarity_monthly_normality(
                        make_series(), config.alpha, config.lilliefors_replications, lf_seed);
                    return Cell{!result.rejected};
                } catch (const std::exception& e) {
                    warnings.add(std::string(tag) + ": " + e.what());
                    return Cell{};
                }
            };
            row.push_back(monthly_cell("monthly_raw", [&] { return series; }));
            row.push_back(monthly_cell("monthly_diff", [&] { return differenced_series(series); }));

            row.emplace_back(warnings.text);
            return row;
        });
    return table;
}

int cmd_tests(const RunConfig& config) {
    const auto dataset = load_input(config);
    const auto path = write_report(tests_table(dataset, config), config);
    std::cout << "wrote " << path << " (" << dataset.size() << " series)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// label
// ---------------------------------------------------------------------------

namespace {

struct LabelRow {
    std::vector<Cell> cells;
    std::optional<SeriesLabel> raw;
    std::optional<SeriesLabel> after_outliers;
    std::optional<SeriesLabel> after_boxcox;
};

// Compound error reduction across chained stages: the reduction of the final
// run relative to the first.
double compound_reduction(const std::vector<ImpactReport>& stages) {
    double remaining = 1.0;
    for (const auto& stage : stages) remaining *= 1.0 - stage.noise_reduction;
    return 1.0 - remaining;
}

}  // namespace

std::pair<ReportTable, ReportTable> label_tables(const std::vector<CashFlowSeries>& dataset,
                                                 const RunConfig& config) {
    ReportTable table;
    table.name = "label";
    table.columns = {"company", "length",     "reg_nse",   "rf_nse",
                     "statistic", "p_value",  "triviality", "linearity"};
    if (config.treat_outliers || config.boxcox) {
        table.columns.insert(table.columns.end(),
                             {"ot_triviality", "ot_linearity", "ot_noise_reduction"});
    }
    if (config.boxcox) {
        table.columns.insert(table.columns.end(),
                             {"boxcox_triviality", "boxcox_linearity", "boxcox_noise_reduction"});
    }
    table.columns.push_back("warnings");

    const auto label_cells = [](SeriesLabel label) {
        std::vector<Cell> cells;
        cells.emplace_back(std::string(label == SeriesLabel::Trivial ? "Trivial" : "Non-Trivial"));
        cells.emplace_back(label == SeriesLabel::Trivial ? std::string("-")
                                                         : to_string(label));
        return cells;
    };

    auto rows = parallel_rows<LabelRow>(dataset.size(), config.workers, [&](std::size_t i) {
        const auto& series = dataset[i];
        LabelRow out;
        Warnings warnings;
        out.cells.emplace_back(static_cast<long long>(series.company_id));
        out.cells.emplace_back(static_cast<long long>(series.size()));

        CvConfig cv;
        cv.train_fraction = config.train_fraction;
        cv.horizon = config.horizon;
        cv.alpha = config.alpha;
        cv.seed = derive_seed(config.seed, {0xCFull, static_cast<std::uint64_t>(series.company_id)});

        try {
            const auto profiles = rolling_cv(series, {}, cv);
            const auto report = label_series(profiles, cv.alpha);
            out.raw = report.label;
            out.cells.emplace_back(report.reg_nse);
            out.cells.emplace_back(report.rf_nse);
            out.cells.emplace_back(report.wilcoxon_statistic);
            out.cells.emplace_back(report.wilcoxon_p);
            for (auto& c : label_cells(report.label)) out.cells.push_back(std::move(c));
        } catch (const std::exception& e) {
            warnings.add(e.what());
            for (int c = 0; c < 6; ++c) out.cells.emplace_back();
        }

        if (config.treat_outliers || config.boxcox) {
            try {
                const auto stages = outlier_impact_experiment(series, cv, config.sigma_levels);
                const SeriesLabel after = stages.empty() ? *out.raw : stages.back().label_after;
                out.after_outliers = after;
                for (auto& c : label_cells(after)) out.cells.push_back(std::move(c));
                out.cells.emplace_back(compound_reduction(stages));
            } catch (const std::exception& e) {
                warnings.add(std::string("outlier treatment: ") + e.what());
                for (int c = 0; c < 3; ++c) out.cells.emplace_back();
            }
        }
        if (config.boxcox) {
            try {
                const auto impact = boxcox_impact_experiment(series, cv, config.sigma_levels);
                out.after_boxcox = impact.label_after;
                for (auto& c : label_cells(impact.label_after)) out.cells.push_back(std::move(c));
                out.cells.emplace_back(impact.noise_reduction);
            } catch (const std::exception& e) {
                warnings.add(std::string("boxcox: ") + e.what());
                for (int c = 0; c < 3; ++c) out.cells.emplace_back();
            }
        }
        out.cells.emplace_back(warnings.text);
        return out;
    });

    ReportTable counts;
    counts.name = "label_counts";
    counts.columns = {"label", "raw"};
    if (config.treat_outliers || config.boxcox) counts.columns.push_back("after_outliers");
    if (config.boxcox) counts.columns.push_back("after_outliers_boxcox");

    const auto count_stage = [&](const std::function<std::optional<SeriesLabel>(const LabelRow&)>&
                                     pick) {
        std::array<long long, 4> c{};  // trivial, non-trivial, linear, non-linear
        for (const auto& row : rows) {
            const auto label = pick(row);
            if (!label) continue;
            if (*label == SeriesLabel::Trivial) ++c[0];
            else {
                ++c[1];
                ++c[*label == SeriesLabel::Linear ? 2 : 3];
            }
        }
        return c;
    };
    std::vector<std::array<long long, 4>> stage_counts;
    stage_counts.push_back(count_stage([](const LabelRow& r) { return r.raw; }));
    if (config.treat_outliers || config.boxcox) {
        stage_counts.push_back(count_stage([](const LabelRow& r) { return r.after_outliers; }));
    }
    if (config.boxcox) {
        stage_counts.push_back(count_stage([](const LabelRow& r) { return r.after_boxcox; }));
    }
    const char* label_names[4] = {"Trivial", "Non-trivial", "-Linear", "-Non-linear"};
    for (int k = 0; k < 4; ++k) {
        std::vector<Cell> row;
        row.emplace_back(std::string(label_names[k]));
        for (const auto& c : stage_counts) row.emplace_back(c[static_cast<std::size_t>(k)]);
        counts.rows.push_back(std::move(row));
    }

    table.rows.reserve(rows.size());
    for (auto& row : rows) table.rows.push_back(std::move(row.cells));
    return {std::move(table), std::move(counts)};
}

int cmd_label(const RunConfig& config) {
    const auto dataset = load_input(config);
    auto [table, counts] = label_tables(dataset, config);
    const auto path = write_report(table, config);
    const auto counts_path = write_report(counts, config);
    std::cout << "wrote " << path << " and " << counts_path << " (" << dataset.size()
              << " series)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

namespace {

SynthSpec parse_synth_spec(const ordered_json& obj, std::uint64_t fallback_seed) {
    SynthSpec spec;
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "white_noise") spec.kind = SynthKind::WhiteNoise;
    else if (kind == "sinusoid") spec.kind = SynthKind::Sinusoid;
    else if (kind == "seasonal_linear") spec.kind = SynthKind::SeasonalLinear;
    else if (kind == "interaction") spec.kind = SynthKind::NonLinearInteraction;
    else throw SynthError("unknown synth kind '" + kind + "'");

    spec.length = obj.at("length").get<std::size_t>();
    spec.seed = obj.value("seed", fallback_seed);
    spec.level = obj.value("level", 0.0);
    spec.noise_std = obj.value("noise_std", spec.kind == SynthKind::Sinusoid ? 0.0 : 1.0);
    spec.period = obj.value("period", 12.0);
    spec.amplitude = obj.value("amplitude", 1.0);
    if (obj.contains("dom_effects")) {
        spec.dom_effects = obj.at("dom_effects").get<std::vector<double>>();
    }
    if (obj.contains("dow_effects")) {
        spec.dow_effects = obj.at("dow_effects").get<std::vector<double>>();
    }
    spec.default_value = obj.value("default_value", 2.0);
    if (obj.contains("regions")) {
        for (const auto& region : obj.at("regions")) {
            spec.regions.push_back({region.value("dom_min", 1), region.value("dom_max", 31),
                                    region.value("dow_min", 1), region.value("dow_max", 7),
                                    region.at("value").get<double>()});
        }
    } else if (spec.kind == SynthKind::NonLinearInteraction) {
        spec.regions = month_end_interaction_rule();
    }
    return spec;
}

}  // namespace

int cmd_synth(const RunConfig& config) {
    if (config.synth_spec_path.empty()) {
        throw SynthError("synth needs --spec <file.json>");
    }
    std::ifstream in(config.synth_spec_path);
    if (!in) throw SynthError("cannot open '" + config.synth_spec_path + "'");
    ordered_json doc = ordered_json::parse(in);
    if (!doc.is_array()) throw SynthError("spec file must hold a JSON array of specs");

    std::vector<CashFlowSeries> dataset;
    int company_id = 1;
    for (const auto& obj : doc) {
        const auto spec = parse_synth_spec(
            obj, derive_seed(config.seed, {0x5E5ull, static_cast<std::uint64_t>(company_id)}));
        dataset.push_back(generate(spec, company_id));
        ++company_id;
    }

    std::filesystem::create_directories(config.out_dir);
    const auto path = (std::filesystem::path(config.out_dir) / "synthetic.csv").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_dataset(dataset, out);
    std::cout << "wrote " << path << " (" << dataset.size() << " series)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// poincare
// ---------------------------------------------------------------------------

int cmd_poincare(const RunConfig& config) {
    const auto dataset = load_input(config);
    for (const auto& series : dataset) {
        const auto lagged = poincare_pairs(series, config.poincare_lag);
        ReportTable table;
        table.name = "poincare_" + std::to_string(series.company_id);
        table.columns = {"value_t", "value_t_plus_lag"};
        for (const auto& [a, b] : lagged.pairs) {
            table.rows.push_back({Cell{a}, Cell{b}});
        }
        write_report(table, config);
    }
    std::cout << "wrote " << dataset.size() << " pair files to " << config.out_dir << "\n";
    return 0;
}

}  // namespace cashflow::cli
