#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Daily cash flow diagnostics: summaries, statistical tests, and the "
                 "cross-validated non-linearity label"};
    app.require_subcommand(1);

    cashflow::cli::RunConfig config;

    const auto add_io = [&](CLI::App* cmd, bool needs_input) {
        auto* input = cmd->add_option("-i,--input", config.input_path,
                                      "Input dataset CSV (Date, Company, NetCF, DayMonth, DayWeek)");
        if (needs_input) input->required()->check(CLI::ExistingFile);
        cmd->add_option("-o,--out-dir", config.out_dir, "Output directory")
            ->capture_default_str();
        cmd->add_option("-f,--format", config.format, "Report format")
            ->check(CLI::IsMember({"csv", "json", "markdown"}))
            ->capture_default_str();
        cmd->add_option("--seed", config.seed, "Master seed for all randomized procedures")
            ->capture_default_str();
        cmd->add_option("--companies", config.companies,
                        "Only process these company ids (default: all)");
        cmd->add_option("--workers", config.workers, "Parallel worker threads")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };

    auto* summary = app.add_subcommand("summary", "Per-company statistical summary");
    add_io(summary, true);

    auto* tests = app.add_subcommand(
        "tests", "Normality, autocorrelation, seasonality and stationarity test battery");
    add_io(tests, true);
    tests->add_option("--alpha", config.alpha, "Significance level")->capture_default_str();
    tests->add_option("--lags", config.ljung_box_lags,
                      "Ljung-Box lag count (default min(20, n/4))");
    tests->add_option("--lilliefors-reps", config.lilliefors_replications,
                      "Monte Carlo replications for Lilliefors p-values")
        ->capture_default_str();

    auto* label = app.add_subcommand(
        "label", "Cross-validated Trivial/Linear/Non-linear labeling per company");
    add_io(label, true);
    label->add_option("--alpha", config.alpha, "Significance level")->capture_default_str();
    label->add_option("--train-fraction", config.train_fraction,
                      "Fraction of oldest observations forming the first training window")
        ->capture_default_str();
    label->add_option("--horizon", config.horizon, "Forecast horizon in days")
        ->capture_default_str();
    label->add_option("--sigma-levels", config.sigma_levels,
                      "Progressive outlier thresholds in training-std units")
        ->capture_default_str();
    label->add_flag("--treat-outliers", config.treat_outliers,
                    "Also report labels after progressive outlier replacement");
    label->add_flag("--boxcox", config.boxcox,
                    "Also report labels after outlier treatment plus Box-Cox transformation");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset CSV from a spec file");
    add_io(synth, false);
    synth->add_option("--spec", config.synth_spec_path, "JSON array of series specs")
        ->required()
        ->check(CLI::ExistingFile);

    auto* poincare = app.add_subcommand("poincare", "Lagged-pair CSVs per company");
    add_io(poincare, true);
    poincare->add_option("--lag", config.poincare_lag, "Lag in observations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (summary->parsed()) return cashflow::cli::cmd_summary(config);
        if (tests->parsed()) return cashflow::cli::cmd_tests(config);
        if (label->parsed()) return cashflow::cli::cmd_label(config);
        if (synth->parsed()) return cashflow::cli::cmd_synth(config);
        if (poincare->parsed()) return cashflow::cli::cmd_poincare(config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
