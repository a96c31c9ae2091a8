#include "cashflow/synth.hpp"

#include <cmath>
#include <numbers>

#include "cashflow/rng.hpp"

namespace cashflow {

std::vector<InteractionRegion> month_end_interaction_rule() {
    return {
        {25, 29, 5, 7, -1.0},
        {25, 29, 1, 4, -2.0},
    };
}

double interaction_value(const SynthSpec& spec, int day_of_month, int day_of_week) {
    for (const auto& region : spec.regions) {
        if (day_of_month >= region.dom_min && day_of_month <= region.dom_max &&
            day_of_week >= region.dow_min && day_of_week <= region.dow_max) {
            return region.value;
        }
    }
    return spec.default_value;
}

CashFlowSeries generate(const SynthSpec& spec, int company_id) {
    if (spec.length < 1) throw SynthError("generate: length must be >= 1");
    if (spec.noise_std < 0.0) throw SynthError("generate: noise_std must be >= 0");
    if (spec.kind == SynthKind::Sinusoid && spec.period <= 0.0) {
        throw SynthError("generate: period must be > 0");
    }
    if (spec.kind == SynthKind::SeasonalLinear &&
        (spec.dom_effects.size() != 31 || spec.dow_effects.size() != 7)) {
        throw SynthError("generate: SeasonalLinear needs 31 dom effects and 7 dow effects");
    }

    NormalSampler normal(derive_seed(spec.seed, {static_cast<std::uint64_t>(spec.kind)}));

    CashFlowSeries series;
    series.company_id = company_id;
    series.observations.reserve(spec.length);

    std::chrono::sys_days day{Date{std::chrono::year{2009}, std::chrono::month{1},
                                   std::chrono::day{1}}};
    for (std::size_t t = 0; t < spec.length; ++t) {
        while (std::chrono::weekday{day}.iso_encoding() > 5) day += std::chrono::days{1};

        CashFlowObservation obs;
        obs.date = Date{day};
        obs.day_of_month = static_cast<int>(static_cast<unsigned>(obs.date.day()));
        obs.day_of_week = static_cast<int>(std::chrono::weekday{day}.iso_encoding());

        switch (spec.kind) {
            case SynthKind::WhiteNoise:
                obs.net_flow = spec.level + spec.noise_std * normal();
                break;
            case SynthKind::Sinusoid:
                obs.net_flow = spec.amplitude *
                               std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                                        spec.period);
                break;
            case SynthKind::SeasonalLinear:
                obs.net_flow = spec.dom_effects[static_cast<std::size_t>(obs.day_of_month - 1)] +
                               spec.dow_effects[static_cast<std::size_t>(obs.day_of_week - 1)] +
                               spec.noise_std * normal();
                break;
            case SynthKind::NonLinearInteraction:
                obs.net_flow = interaction_value(spec, obs.day_of_month, obs.day_of_week) +
                               spec.noise_std * normal();
                break;
        }
        series.observations.push_back(obs);
        day += std::chrono::days{1};
    }
    return series;
}

}  // namespace cashflow
