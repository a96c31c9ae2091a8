#include "cashflow/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "cashflow/rng.hpp"
#include "distributions.hpp"

namespace cashflow {

namespace {

constexpr int kMaxDayOfMonth = 31;
constexpr int kMaxDayOfWeek = 7;

void check_feature_row(const FeatureRow& row) {
    if (row.day_of_month < 1 || row.day_of_month > kMaxDayOfMonth ||
        row.day_of_week < 1 || row.day_of_week > kMaxDayOfWeek) {
        throw ModelError("feature row out of range (day_of_month 1..31, day_of_week 1..7)");
    }
}

class ConstantModel final : public ForecastModel {
public:
    ConstantModel(double value, std::string name) : value_(value), name_(std::move(name)) {}
    double predict(const FeatureRow&) const override { return value_; }
    std::string name() const override { return name_; }

private:
    double value_;
    std::string name_;
};

class SeasonalOlsModel final : public ForecastModel {
public:
    SeasonalOlsModel(double intercept, std::array<double, kMaxDayOfMonth + 1> dom_effect,
                     std::array<double, kMaxDayOfWeek + 1> dow_effect)
        : intercept_(intercept), dom_effect_(dom_effect), dow_effect_(dow_effect) {}

    double predict(const FeatureRow& row) const override {
        check_feature_row(row);
        return intercept_ + dom_effect_[row.day_of_month] + dow_effect_[row.day_of_week];
    }
    std::string name() const override { return "ols_seasonal"; }

private:
    double intercept_;
    std::array<double, kMaxDayOfMonth + 1> dom_effect_;  // reference/unseen levels stay 0
    std::array<double, kMaxDayOfWeek + 1> dow_effect_;
};

// ---------------------------------------------------------------------------
// Regression tree over the two categorical features.
// ---------------------------------------------------------------------------

struct TreeNode {
    bool leaf = true;
    double value = 0.0;
    int feature = 0;             // 0 = day_of_month, 1 = day_of_week
    std::uint32_t left_mask = 0; // category bits sent to the left child
    int left = -1;
    int right = -1;
};

class RegressionTree {
public:
    // rows: indices into `training` (a bootstrap bag); values are centered on
    // the bag mean before split scoring so scores are shift-stable.
    RegressionTree(std::span<const TrainingPair> training, std::vector<std::size_t> rows,
                   int min_leaf) {
        double bag_sum = 0.0;
        for (std::size_t r : rows) bag_sum += training[r].target;
        center_ = bag_sum / static_cast<double>(rows.size());
        build(training, rows, min_leaf);
    }

    double predict(const FeatureRow& row) const {
        int node = 0;
        while (!nodes_[node].leaf) {
            const int category =
                nodes_[node].feature == 0 ? row.day_of_month : row.day_of_week;
            const bool go_left = (nodes_[node].left_mask >> category) & 1u;
            node = go_left ? nodes_[node].left : nodes_[node].right;
        }
        return nodes_[node].value;
    }

private:
    int build(std::span<const TrainingPair> training, std::vector<std::size_t>& rows,
              int min_leaf) {
        const int index = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        double sum = 0.0;
        for (std::size_t r : rows) sum += training[r].target - center_;
        const auto n = static_cast<double>(rows.size());

        std::uint32_t best_mask = 0;
        int best_feature = -1;
        double best_score = sum * sum / n;  // score of not splitting
        if (rows.size() >= 2 * static_cast<std::size_t>(min_leaf)) {
            for (int feature = 0; feature < 2; ++feature) {
                std::array<double, kMaxDayOfMonth + 1> cat_sum{};
                std::array<int, kMaxDayOfMonth + 1> cat_count{};
                for (std::size_t r : rows) {
                    const int c = feature == 0 ? training[r].features.day_of_month
                                               : training[r].features.day_of_week;
                    cat_sum[c] += training[r].target - center_;
                    ++cat_count[c];
                }
                std::vector<int> observed;
                for (int c = 1; c <= kMaxDayOfMonth; ++c) {
                    if (cat_count[c] > 0) observed.push_back(c);
                }
                if (observed.size() < 2) continue;
                std::sort(observed.begin(), observed.end(), [&](int a, int b) {
                    const double ma = cat_sum[a] / cat_count[a];
                    const double mb = cat_sum[b] / cat_count[b];
                    return ma != mb ? ma < mb : a < b;
                });

                double left_sum = 0.0;
                int left_count = 0;
                std::uint32_t mask = 0;
                for (std::size_t cut = 0; cut + 1 < observed.size(); ++cut) {
                    const int c = observed[cut];
                    left_sum += cat_sum[c];
                    left_count += cat_count[c];
                    mask |= 1u << c;
                    const int right_count = static_cast<int>(rows.size()) - left_count;
                    if (left_count < min_leaf || right_count < min_leaf) continue;
                    const double right_sum = sum - left_sum;
                    const double score = left_sum * left_sum / left_count +
                                         right_sum * right_sum / right_count;
                    if (score > best_score) {
                        best_score = score;
                        best_feature = feature;
                        best_mask = mask;
                    }
                }
            }
        }

        if (best_feature < 0) {
            nodes_[index].leaf = true;
            double raw_sum = 0.0;
            for (std::size_t r : rows) raw_sum += training[r].target;
            nodes_[index].value = raw_sum / n;
            return index;
        }

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (std::size_t r : rows) {
            const int c = best_feature == 0 ? training[r].features.day_of_month
                                            : training[r].features.day_of_week;
            ((best_mask >> c) & 1u ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        nodes_[index].leaf = false;
        nodes_[index].feature = best_feature;
        nodes_[index].left_mask = best_mask;
        const int left = build(training, left_rows, min_leaf);
        const int right = build(training, right_rows, min_leaf);
        nodes_[index].left = left;
        nodes_[index].right = right;
        return index;
    }

    std::vector<TreeNode> nodes_;
    double center_ = 0.0;
};

class ForestModel final : public ForecastModel {
public:
    ForestModel(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {}

    double predict(const FeatureRow& row) const override {
        check_feature_row(row);
        double sum = 0.0;
        for (const auto& tree : trees_) sum += tree.predict(row);
        return sum / static_cast<double>(trees_.size());
    }
    std::string name() const override { return "random_forest"; }

private:
    std::vector<RegressionTree> trees_;
};

}  // namespace

ModelPtr fit_mean(std::span<const double> training) {
    if (training.empty()) throw ModelError("fit_mean: empty training set");
    const double mean =
        std::accumulate(training.begin(), training.end(), 0.0) /
        static_cast<double>(training.size());
    return std::make_shared<ConstantModel>(mean, "mean");
}

ModelPtr fit_null() { return std::make_shared<ConstantModel>(0.0, "null"); }

ModelPtr fit_persistence(std::span<const double> training) {
    if (training.empty()) throw ModelError("fit_persistence: empty training set");
    return std::make_shared<ConstantModel>(training.back(), "persistence");
}

std::pair<ModelPtr, SeasonalRegressionReport> ols_seasonal_fit(
    std::span<const TrainingPair> training) {
    std::array<bool, kMaxDayOfMonth + 1> dom_seen{};
    std::array<bool, kMaxDayOfWeek + 1> dow_seen{};
    for (const auto& pair : training) {
        check_feature_row(pair.features);
        dom_seen[pair.features.day_of_month] = true;
        dow_seen[pair.features.day_of_week] = true;
    }

    // Reference levels: day-of-month 31 when observed (else the largest
    // observed day), day-of-week the largest observed weekday. Levels never
    // observed get no column.
    int dom_ref = kMaxDayOfMonth;
    while (dom_ref > 1 && !dom_seen[dom_ref]) --dom_ref;
    int dow_ref = kMaxDayOfWeek;
    while (dow_ref > 1 && !dow_seen[dow_ref]) --dow_ref;

    std::vector<int> dom_levels, dow_levels;
    for (int c = 1; c <= kMaxDayOfMonth; ++c) {
        if (dom_seen[c] && c != dom_ref) dom_levels.push_back(c);
    }
    for (int c = 1; c <= kMaxDayOfWeek; ++c) {
        if (dow_seen[c] && c != dow_ref) dow_levels.push_back(c);
    }

    const auto n = static_cast<Eigen::Index>(training.size());
    const auto n_cols = static_cast<Eigen::Index>(1 + dom_levels.size() + dow_levels.size());
    if (n <= n_cols) {
        throw ModelError("ols_seasonal_fit: need more training rows than parameters (" +
                         std::to_string(n_cols) + ")");
    }

    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, n_cols);
    Eigen::VectorXd target(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& pair = training[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        for (std::size_t j = 0; j < dom_levels.size(); ++j) {
            if (pair.features.day_of_month == dom_levels[j]) {
                design(i, static_cast<Eigen::Index>(1 + j)) = 1.0;
            }
        }
        for (std::size_t j = 0; j < dow_levels.size(); ++j) {
            if (pair.features.day_of_week == dow_levels[j]) {
                design(i, static_cast<Eigen::Index>(1 + dom_levels.size() + j)) = 1.0;
            }
        }
        target(i) = pair.target;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < n_cols) {
        throw ModelError("ols_seasonal_fit: rank-deficient design matrix");
    }
    const Eigen::VectorXd beta = qr.solve(target);

    const Eigen::VectorXd residuals = target - design * beta;
    const double rss = residuals.squaredNorm();
    const double tss = (target.array() - target.mean()).matrix().squaredNorm();
    if (tss <= 0.0) throw ModelError("ols_seasonal_fit: zero variance target");

    const auto p = static_cast<double>(n_cols - 1);  // slope parameters
    const auto resid_dof = static_cast<double>(n) - p - 1.0;
    const double ess = tss - rss;
    const double f_stat = std::max(0.0, (ess / p) / (rss / resid_dof));

    SeasonalRegressionReport report;
    report.term_names.push_back("intercept");
    report.coefficients.push_back(beta(0));
    for (std::size_t j = 0; j < dom_levels.size(); ++j) {
        report.term_names.push_back("dom_" + std::to_string(dom_levels[j]));
        report.coefficients.push_back(beta(static_cast<Eigen::Index>(1 + j)));
    }
    for (std::size_t j = 0; j < dow_levels.size(); ++j) {
        report.term_names.push_back("dow_" + std::to_string(dow_levels[j]));
        report.coefficients.push_back(beta(static_cast<Eigen::Index>(1 + dom_levels.size() + j)));
    }
    report.f_statistic = f_stat;
    report.p_value = rss > 0.0 ? dist::fisher_f_sf(f_stat, p, resid_dof) : 0.0;
    report.r_squared = std::clamp(1.0 - rss / tss, 0.0, 1.0);

    std::array<double, kMaxDayOfMonth + 1> dom_effect{};
    std::array<double, kMaxDayOfWeek + 1> dow_effect{};
    for (std::size_t j = 0; j < dom_levels.size(); ++j) {
        dom_effect[dom_levels[j]] = beta(static_cast<Eigen::Index>(1 + j));
    }
    for (std::size_t j = 0; j < dow_levels.size(); ++j) {
        dow_effect[dow_levels[j]] = beta(static_cast<Eigen::Index>(1 + dom_levels.size() + j));
    }
    auto model = std::make_shared<SeasonalOlsModel>(beta(0), dom_effect, dow_effect);
    return {std::move(model), std::move(report)};
}

ModelPtr forest_fit(std::span<const TrainingPair> training, const ForestParams& params) {
    if (params.n_trees < 1) throw ModelError("forest_fit: n_trees must be >= 1");
    if (params.min_leaf < 1) throw ModelError("forest_fit: min_leaf must be >= 1");
    if (training.size() < 2 * static_cast<std::size_t>(params.min_leaf)) {
        throw ModelError("forest_fit: need at least 2*min_leaf training rows");
    }
    for (const auto& pair : training) check_feature_row(pair.features);

    const std::size_t n = training.size();
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        std::vector<std::size_t> rows(n);
        if (params.bootstrap) {
            std::mt19937_64 rng(derive_seed(params.seed, {0xF03E57ull, static_cast<std::uint64_t>(t)}));
            for (auto& r : rows) r = uniform_index(rng, n);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        trees.emplace_back(training, std::move(rows), params.min_leaf);
    }
    return std::make_shared<ForestModel>(std::move(trees));
}

}  // namespace cashflow
