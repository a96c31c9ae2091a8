#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cashflow/dataset.hpp"

namespace cashflow {

enum class SynthKind { WhiteNoise, Sinusoid, SeasonalLinear, NonLinearInteraction };

/// One rectangle of the piecewise-constant (day-of-month, day-of-week) rule;
/// the first matching region wins, unmatched rows take the default value.
struct InteractionRegion {
    int dom_min = 1;
    int dom_max = 31;
    int dow_min = 1;
    int dow_max = 7;
    double value = 0.0;
};

/// Synthetic series recipe. `length` working days starting 2009-01-01,
/// weekends skipped, so day_of_week stays in 1..5. Gaussian noise comes from
/// the Marsaglia polar sampler seeded by `seed`; equal specs generate
/// identical series.
struct SynthSpec {
    SynthKind kind = SynthKind::WhiteNoise;
    std::size_t length = 1;
    std::uint64_t seed = 0;

    // WhiteNoise: level + noise
    double level = 0.0;
    // WhiteNoise / SeasonalLinear / NonLinearInteraction noise scale
    double noise_std = 1.0;

    // Sinusoid: amplitude * sin(2*pi*t / period)
    double period = 12.0;
    double amplitude = 1.0;

    // SeasonalLinear: dom_effects[day_of_month-1] + dow_effects[day_of_week-1]
    std::vector<double> dom_effects;  // size 31
    std::vector<double> dow_effects;  // size 7

    // NonLinearInteraction
    std::vector<InteractionRegion> regions;
    double default_value = 0.0;
};

class SynthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The month-end/Friday interaction rule used as the stock non-additive
/// example: days 25..29 predict -1 on Fridays and -2 earlier in the week,
/// everything else 2.
std::vector<InteractionRegion> month_end_interaction_rule();

double interaction_value(const SynthSpec& spec, int day_of_month, int day_of_week);

CashFlowSeries generate(const SynthSpec& spec, int company_id = 1);

}  // namespace cashflow
