#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cashflow {

using Date = std::chrono::year_month_day;

/// One daily net cash flow record. day_of_month / day_of_week are carried
/// explicitly because the input format carries them; they always agree with
/// the date after parsing.
struct CashFlowObservation {
    Date date{};
    double net_flow = 0.0;
    int day_of_month = 0;  // 1..31, calendar day of `date`
    int day_of_week = 0;   // 1..7 ISO, Monday = 1
};

/// Ordered daily cash flow history for one company. Dates strictly increase.
struct CashFlowSeries {
    int company_id = 0;
    std::vector<CashFlowObservation> observations;

    std::size_t size() const { return observations.size(); }
    std::vector<double> values() const;
};

/// Table-1 style summary. Statistics that are undefined for the input
/// (std for length < 2; kurtosis/skewness additionally for zero variance)
/// come back empty rather than fabricated.
struct SummaryStatistics {
    std::size_t length = 0;
    double null_share = 0.0;  // fraction of exactly-zero flows
    double mean = 0.0;
    std::optional<double> std;  // sample standard deviation (n-1)
    std::optional<double> excess_kurtosis;
    std::optional<double> skewness;
    double min = 0.0;
    double max = 0.0;
};

/// Poincare-map pairs (y_t, y_{t+lag}) in time order.
struct LaggedPairs {
    std::size_t lag = 0;
    std::vector<std::pair<double, double>> pairs;
};

/// Parse/validation failure; carries the 1-based input row when applicable.
class DatasetError : public std::runtime_error {
public:
    explicit DatasetError(const std::string& message, std::size_t row = 0)
        : std::runtime_error(row ? "row " + std::to_string(row) + ": " + message : message),
          row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

/// Reads the five-column CSV (Date, Company, NetCF, DayMonth, DayWeek in any
/// order; ',' or ';' separated, sniffed from the header). Returns one series
/// per company, sorted by company id, observations sorted by date.
/// DayMonth/DayWeek are cross-checked against the parsed date and duplicate
/// (company, date) rows are rejected, both reported with their row number.
std::vector<CashFlowSeries> parse_dataset(std::istream& source);
std::vector<CashFlowSeries> parse_dataset_file(const std::string& path);

/// Writes the same CSV format (comma separated, '.' decimals, full-precision
/// shortest round-trip numbers). parse(write(x)) == x.
void write_dataset(const std::vector<CashFlowSeries>& dataset, std::ostream& out);
std::string format_date(const Date& date);

SummaryStatistics summarize(const CashFlowSeries& series);

/// Pairs (y_t, y_{t+lag}); empty when lag >= length.
LaggedPairs poincare_pairs(const CashFlowSeries& series, std::size_t lag);

}  // namespace cashflow
