#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cashflow/cvtest.hpp"
#include "cashflow/dataset.hpp"

namespace cashflow::cli {

/// Everything a command run needs; filled from the command line.
struct RunConfig {
    std::string input_path;
    std::string out_dir = ".";
    std::string format = "csv";  // csv | json | markdown
    double train_fraction = 0.8;
    std::size_t horizon = 20;
    double alpha = 0.05;
    std::vector<double> sigma_levels = {5.0, 4.0, 3.0};
    bool treat_outliers = false;
    bool boxcox = false;
    std::size_t ljung_box_lags = 0;  // 0 = min(20, n/4)
    std::size_t lilliefors_replications = 10000;
    std::uint64_t seed = 0;
    std::vector<int> companies;  // empty = all
    std::size_t workers = 1;
    std::size_t poincare_lag = 1;
    std::string synth_spec_path;
};

/// One report cell: empty, real, integer, text, or boolean. Kept typed so
/// each output format can render natively and all formats carry the same
/// values.
using Cell = std::variant<std::monostate, double, long long, std::string, bool>;

struct ReportTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string render_csv(const ReportTable& table);
std::string render_json(const ReportTable& table);
std::string render_markdown(const ReportTable& table);

/// Renders with the configured format and writes <out_dir>/<name>.<ext>;
/// returns the path written.
std::string write_report(const ReportTable& table, const RunConfig& config);

int cmd_summary(const RunConfig& config);
int cmd_tests(const RunConfig& config);
int cmd_label(const RunConfig& config);
int cmd_synth(const RunConfig& config);
int cmd_poincare(const RunConfig& config);

/// Table builders behind the commands, exposed for tests.
ReportTable summary_table(const std::vector<CashFlowSeries>& dataset, const RunConfig& config);
ReportTable tests_table(const std::vector<CashFlowSeries>& dataset, const RunConfig& config);
std::pair<ReportTable, ReportTable> label_tables(const std::vector<CashFlowSeries>& dataset,
                                                 const RunConfig& config);

/// Applies the --companies filter (keeps everything when empty).
std::vector<CashFlowSeries> select_companies(std::vector<CashFlowSeries> dataset,
                                             const std::vector<int>& ids);

}  // namespace cashflow::cli
