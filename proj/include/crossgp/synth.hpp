#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace crossgp {

struct SynthConfig {
    int n_subjects = 30;
    int days_per_subject = 90;
    std::uint64_t seed = 42;
    // Target day-class proportions Good/Moderate/Poor; must sum to 1.
    std::array<double, 3> control_mix = {0.6, 0.2, 0.2};
    // Day-to-day class persistence in [0,1): higher means a day's control
    // quality carries over more strongly, making next-day prediction easier.
    double persistence = 0.6;
    // Scale of the within-class TIR shift driven by the previous day's
    // total insulin.
    double insulin_tir_gain = 0.03;
};

void validateSynthConfig(const SynthConfig& cfg);

// Writes cgm.csv, bolus.csv and meal.csv under out_dir. Pure function of
// cfg; per-subject derived seeds keep subjects independent.
void generateSynthetic(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace crossgp
