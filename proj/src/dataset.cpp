#include "cashflow/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace cashflow {

namespace {

// Splits one CSV line on `sep` with minimal double-quote handling, enough
// for quoted decimal-comma numbers like "3,5" inside a comma-separated file.
std::vector<std::string> split_csv_line(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == sep) {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

Date parse_date_field(const std::string& text, std::size_t row) {
    int y = 0, m = 0, d = 0;
    char extra = '\0';
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3) {
        throw DatasetError("malformed date '" + text + "' (expected YYYY-MM-DD)", row);
    }
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        throw DatasetError("invalid calendar date '" + text + "'", row);
    }
    return date;
}

double parse_number_field(const std::string& raw, std::size_t row) {
    // Accept both '.' and ',' decimal marks.
    std::string text = trimmed(raw);
    if (std::count(text.begin(), text.end(), ',') == 1 &&
        text.find('.') == std::string::npos) {
        text[text.find(',')] = '.';
    }
    if (text.empty()) throw DatasetError("empty numeric field", row);
    const char* begin = text.data();
    const char* end = begin + text.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw DatasetError("non-numeric value '" + raw + "'", row);
    }
    return value;
}

long parse_int_field(const std::string& raw, std::size_t row) {
    const std::string text = trimmed(raw);
    long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw DatasetError("non-integer value '" + raw + "'", row);
    }
    return value;
}

std::string shortest_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

std::vector<double> CashFlowSeries::values() const {
    std::vector<double> out;
    out.reserve(observations.size());
    for (const auto& obs : observations) out.push_back(obs.net_flow);
    return out;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::vector<CashFlowSeries> parse_dataset(std::istream& source) {
    std::string header_line;
    if (!std::getline(source, header_line)) {
        throw DatasetError("empty input: missing header row");
    }
    if (header_line.size() >= 3 && header_line.compare(0, 3, "\xef\xbb\xbf") == 0) {
        header_line.erase(0, 3);  // UTF-8 BOM
    }
    const char sep = header_line.find(';') != std::string::npos ? ';' : ',';

    const auto header = split_csv_line(header_line, sep);
    int col_date = -1, col_company = -1, col_netcf = -1, col_daymonth = -1, col_dayweek = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = lower(trimmed(header[i]));
        if (name == "date") col_date = static_cast<int>(i);
        else if (name == "company") col_company = static_cast<int>(i);
        else if (name == "netcf") col_netcf = static_cast<int>(i);
        else if (name == "daymonth") col_daymonth = static_cast<int>(i);
        else if (name == "dayweek") col_dayweek = static_cast<int>(i);
    }
    if (col_date < 0 || col_company < 0 || col_netcf < 0 || col_daymonth < 0 || col_dayweek < 0) {
        throw DatasetError(
            "header must name the columns Date, Company, NetCF, DayMonth, DayWeek");
    }

    std::map<int, CashFlowSeries> by_company;
    std::string line;
    std::size_t row = 1;  // header was row 1
    while (std::getline(source, line)) {
        ++row;
        if (trimmed(line).empty()) continue;
        const auto fields = split_csv_line(line, sep);
        if (fields.size() != header.size()) {
            throw DatasetError("expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(fields.size()),
                               row);
        }

        CashFlowObservation obs;
        obs.date = parse_date_field(trimmed(fields[col_date]), row);
        obs.net_flow = parse_number_field(fields[col_netcf], row);

        const long day_month = parse_int_field(fields[col_daymonth], row);
        const long day_week = parse_int_field(fields[col_dayweek], row);
        const int calendar_day = static_cast<int>(static_cast<unsigned>(obs.date.day()));
        const int iso_weekday = static_cast<int>(
            std::chrono::weekday{std::chrono::sys_days{obs.date}}.iso_encoding());
        if (day_month != calendar_day) {
            throw DatasetError("DayMonth " + std::to_string(day_month) + " does not match date " +
                                   format_date(obs.date) + " (day " +
                                   std::to_string(calendar_day) + ")",
                               row);
        }
        if (day_week != iso_weekday) {
            throw DatasetError("DayWeek " + std::to_string(day_week) + " does not match date " +
                                   format_date(obs.date) + " (ISO weekday " +
                                   std::to_string(iso_weekday) + ")",
                               row);
        }
        obs.day_of_month = calendar_day;
        obs.day_of_week = iso_weekday;

        const long company = parse_int_field(fields[col_company], row);
        by_company[static_cast<int>(company)].observations.push_back(obs);
    }

    std::vector<CashFlowSeries> dataset;
    dataset.reserve(by_company.size());
    for (auto& [id, series] : by_company) {
        series.company_id = id;
        std::stable_sort(series.observations.begin(), series.observations.end(),
                         [](const CashFlowObservation& a, const CashFlowObservation& b) {
                             return std::chrono::sys_days{a.date} < std::chrono::sys_days{b.date};
                         });
        for (std::size_t i = 1; i < series.observations.size(); ++i) {
            if (series.observations[i].date == series.observations[i - 1].date) {
                throw DatasetError("duplicate (company " + std::to_string(id) + ", date " +
                                   format_date(series.observations[i].date) + ") rows");
            }
        }
        dataset.push_back(std::move(series));
    }
    return dataset;
}

std::vector<CashFlowSeries> parse_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open '" + path + "'");
    return parse_dataset(in);
}

void write_dataset(const std::vector<CashFlowSeries>& dataset, std::ostream& out) {
    out << "Date,Company,NetCF,DayMonth,DayWeek\n";
    for (const auto& series : dataset) {
        for (const auto& obs : series.observations) {
            out << format_date(obs.date) << ',' << series.company_id << ','
                << shortest_double(obs.net_flow) << ',' << obs.day_of_month << ','
                << obs.day_of_week << '\n';
        }
    }
}

SummaryStatistics summarize(const CashFlowSeries& series) {
    const auto y = series.values();
    const std::size_t n = y.size();
    if (n == 0) throw DatasetError("cannot summarize an empty series");

    SummaryStatistics s;
    s.length = n;
    double sum = 0.0;
    std::size_t zeros = 0;
    s.min = y[0];
    s.max = y[0];
    for (double v : y) {
        sum += v;
        if (v == 0.0) ++zeros;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(n);
    s.null_share = static_cast<double>(zeros) / static_cast<double>(n);
    if (n < 2) return s;

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : y) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    s.std = std::sqrt(m2 / static_cast<double>(n - 1));
    // Plain moment estimators: m4/m2^2 - 3 and m3/m2^(3/2) with n-averaged
    // central moments.
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (m2 > 0.0) {
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
        s.skewness = m3 / std::pow(m2, 1.5);
    }
    return s;
}

LaggedPairs poincare_pairs(const CashFlowSeries& series, std::size_t lag) {
    if (lag == 0) throw DatasetError("lag must be >= 1");
    LaggedPairs out;
    out.lag = lag;
    const auto y = series.values();
    if (y.size() > lag) {
        out.pairs.reserve(y.size() - lag);
        for (std::size_t t = 0; t + lag < y.size(); ++t) {
            out.pairs.emplace_back(y[t], y[t + lag]);
        }
    }
    return out;
}

}  // namespace cashflow
