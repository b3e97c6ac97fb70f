#include "crossgp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "crossgp/csv.hpp"
#include "crossgp/error.hpp"
#include "crossgp/log.hpp"
#include "crossgp/rng.hpp"
#include "crossgp/time.hpp"
#include "crossgp/types.hpp"

namespace crossgp {

namespace {

constexpr int kReadingsPerDay = 288;

// Target TIR bands per class, comfortably inside the label thresholds so the
// generated class is exactly the featurized label.
struct TirBand {
    double lo, hi;
};
constexpr TirBand kTirBand[3] = {{0.74, 0.96}, {0.57, 0.69}, {0.32, 0.53}};

// In-range reading-count bands implied by the TIR bands; counts are kept
// inside these so quantized CGM values cannot push a day across a label
// threshold.
struct CountBand {
    int lo, hi;
};
constexpr CountBand kCountBand[3] = {{214, 276}, {160, 198}, {92, 152}};

constexpr double kMealCarbsMean = 48.66;  // 3.5 meals/day -> ~170 g/day
constexpr double kMealCarbsStd = 15.0;
constexpr double kCarbsPerUnit = 11.0;
constexpr double kTotalBolusBase = 42.4;
constexpr double kTotalBolusFactor[3] = {0.9, 1.0, 1.15};
constexpr double kDipProbFirst[3] = {0.3, 0.5, 0.7};
constexpr double kDipProbSecond[3] = {0.0, 0.15, 0.3};

double quant(double x, double step) { return std::round(x / step) * step; }

// Fixed-decimal CSV cell matching the quantization step of the value.
std::string fmtFixed(double v, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

int sampleMix(Rng& rng, const std::array<double, 3>& mix) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int k = 0; k < 2; ++k) {
        acc += mix[static_cast<std::size_t>(k)];
        if (u < acc) return k;
    }
    return 2;
}

std::string subjectName(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%03d", i + 1);
    return buf;
}

struct DayOutput {
    std::vector<double> bg;  // 288 readings
    std::vector<std::pair<int, double>> meals;        // (minute, carbs)
    std::vector<std::pair<int, double>> meal_bolus;   // (minute, units)
    std::vector<std::pair<int, double>> corrections;  // (minute, units)
    std::vector<std::pair<int, double>> totals;       // (minute, units)
    double total_units = 0.0;
};

// One subject-day: a mean-reverting CGM deviation path whose level is solved
// so that exactly the target number of readings lies in [70, 180], plus the
// day's meal and insulin events.
DayOutput generateDay(Rng& rng, int cls, double tir_target) {
    DayOutput day;

    // Low excursions are fixed windows independent of the level solve.
    std::vector<bool> dip(kReadingsPerDay, false);
    std::vector<double> dip_val(kReadingsPerDay, 0.0);
    const bool want1 = rng.uniform() < kDipProbFirst[cls];
    const bool want2 = rng.uniform() < kDipProbSecond[cls];
    int first_start = -1, first_end = -1;
    for (int d = 0; d < 2; ++d) {
        if ((d == 0 && !want1) || (d == 1 && !want2)) continue;
        const int len = 3 + static_cast<int>(rng.uniformInt(10));
        const int start = static_cast<int>(rng.uniformInt(kReadingsPerDay - len));
        if (d == 1 && first_start >= 0 && start < first_end && start + len > first_start)
            continue;  // overlapping second dip dropped
        if (d == 0) {
            first_start = start;
            first_end = start + len;
        }
        for (int t = start; t < start + len; ++t) {
            dip[t] = true;
            dip_val[t] = quant(rng.uniform(50.0, 69.0), 0.1);
        }
    }

    // Discrete mean-reverting deviations, clamped and put on a 0.1 grid.
    std::vector<double> dev(kReadingsPerDay);
    double x = 10.0 * rng.normal();
    for (int t = 0; t < kReadingsPerDay; ++t) {
        if (t > 0) x = 0.97 * x + 6.0 * rng.normal();
        dev[t] = quant(std::clamp(x, -54.0, 54.0), 0.1);
    }
    std::vector<double> free_dev;
    for (int t = 0; t < kReadingsPerDay; ++t)
        if (!dip[t]) free_dev.push_back(dev[t]);
    std::sort(free_dev.begin(), free_dev.end());
    const int m = static_cast<int>(free_dev.size());

    const CountBand band = kCountBand[cls];
    int target = static_cast<int>(std::llround(tir_target * kReadingsPerDay));
    target = std::clamp(target, band.lo, std::min(band.hi, m));
    // A count c is realizable only when the order statistics around it
    // differ; scan outward inside the band for the nearest such count.
    auto realizable = [&](int c) {
        if (c < band.lo || c > band.hi || c > m) return false;
        if (c == 0 || c == m) return true;
        return free_dev[c - 1] < free_dev[c] - 1e-9;
    };
    int chosen = -1;
    for (int off = 0; off < kReadingsPerDay && chosen < 0; ++off) {
        if (realizable(target + off)) chosen = target + off;
        else if (realizable(target - off)) chosen = target - off;
    }
    double mu;
    if (chosen < 0) {
        chosen = std::min(target, m);
        mu = 180.0 - free_dev[std::max(chosen - 1, 0)] - 0.05;
    } else if (chosen == 0) {
        mu = 180.0 - free_dev[0] + 2.0;
    } else if (chosen == m) {
        mu = 180.0 - free_dev[m - 1] - 2.0;
    } else {
        mu = 180.0 - (free_dev[chosen - 1] + free_dev[chosen]) / 2.0;
    }

    day.bg.resize(kReadingsPerDay);
    for (int t = 0; t < kReadingsPerDay; ++t) {
        const double v = dip[t] ? dip_val[t] : mu + dev[t];
        day.bg[t] = std::clamp(v, 39.0, 401.0);
    }

    // Meals on jittered slots; each meal carries a proportional bolus.
    static constexpr int kSlots[10] = {360, 450, 540, 630, 720, 810, 900, 990, 1080, 1170};
    const int n_meals = 2 + static_cast<int>(rng.uniformInt(4));
    std::vector<int> slots = rng.sampleIndices(10, n_meals);
    for (int s : slots) {
        const int minute =
            std::clamp(kSlots[s] + static_cast<int>(rng.uniformInt(61)) - 30, 0, 1439);
        const double carbs =
            quant(std::clamp(kMealCarbsMean + kMealCarbsStd * rng.normal(), 10.0, 120.0), 0.1);
        const double units =
            quant(std::clamp(carbs / kCarbsPerUnit * rng.uniform(0.9, 1.1), 0.5, 30.0), 0.01);
        day.meals.emplace_back(minute, carbs);
        day.meal_bolus.emplace_back(minute, units);
    }

    int n_corr = 0;
    if (cls == 0) n_corr = static_cast<int>(rng.uniformInt(3));
    else if (cls == 1) n_corr = 1 + static_cast<int>(rng.uniformInt(4));
    else n_corr = 2 + static_cast<int>(rng.uniformInt(5));
    for (int i = 0; i < n_corr; ++i) {
        const int minute = static_cast<int>(rng.uniformInt(1440));
        day.corrections.emplace_back(minute, quant(rng.uniform(2.0, 6.0), 0.01));
    }

    // Micro-dose stream at 15-minute cadence scaled to a class-dependent
    // daily total.
    const double total_target =
        std::max(5.0, kTotalBolusBase * kTotalBolusFactor[cls] + 8.0 * rng.normal());
    std::vector<double> w(96);
    double wsum = 0.0;
    for (int i = 0; i < 96; ++i) {
        w[i] = rng.uniform(0.5, 1.5);
        wsum += w[i];
    }
    for (int i = 0; i < 96; ++i) {
        const double units = quant(total_target * w[i] / wsum, 0.001);
        day.totals.emplace_back(15 * i, units);
        day.total_units += units;
    }
    return day;
}

}  // namespace

void validateSynthConfig(const SynthConfig& cfg) {
    if (cfg.n_subjects < 1) throw ValidationError("n_subjects must be >= 1");
    if (cfg.days_per_subject < 2)
        throw ValidationError("days_per_subject must be >= 2 (pairing needs consecutive days)");
    double sum = 0.0;
    for (double f : cfg.control_mix) {
        if (f < 0.0) throw ValidationError("control_mix fractions must be non-negative");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("control_mix must sum to 1");
    if (cfg.persistence < 0.0 || cfg.persistence >= 1.0)
        throw ValidationError("persistence must lie in [0, 1)");
    if (cfg.insulin_tir_gain < 0.0 || cfg.insulin_tir_gain > 0.1)
        throw ValidationError("insulin_tir_gain must lie in [0, 0.1]");
}

void generateSynthetic(const SynthConfig& cfg, const std::string& out_dir) {
    validateSynthConfig(cfg);
    CsvWriter cgm(out_dir + "/cgm.csv");
    cgm.row({"subject", "timestamp", "bg"});
    CsvWriter bolus(out_dir + "/bolus.csv");
    bolus.row({"subject", "timestamp", "kind", "units"});
    CsvWriter meal(out_dir + "/meal.csv");
    meal.row({"subject", "timestamp", "carbs"});

    const Date start = Date::fromYmd(2021, 3, 1);
    for (int s = 0; s < cfg.n_subjects; ++s) {
        const std::string subject = subjectName(s);
        Rng rng(deriveSeed(cfg.seed, "synth:" + subject));
        int cls = sampleMix(rng, cfg.control_mix);
        double carry = 0.0;  // next-day TIR shift from today's insulin
        Date date = start;
        for (int d = 0; d < cfg.days_per_subject; ++d) {
            if (d > 0)
                cls = rng.uniform() < cfg.persistence ? cls : sampleMix(rng, cfg.control_mix);
            const TirBand band = kTirBand[cls];
            double tir = rng.uniform(band.lo, band.hi) + carry;
            tir = std::clamp(tir, band.lo, band.hi);
            DayOutput day = generateDay(rng, cls, tir);

            const double expect = kTotalBolusBase * kTotalBolusFactor[cls];
            carry = cfg.insulin_tir_gain * std::tanh((day.total_units - expect) / 15.0);

            for (int t = 0; t < kReadingsPerDay; ++t) {
                const DateTime ts{date, 5 * t};
                cgm.row({subject, ts.str(), fmtFixed(day.bg[t], 1)});
            }
            for (const auto& [minute, carbs] : day.meals)
                meal.row({subject, DateTime{date, minute}.str(), fmtFixed(carbs, 1)});
            for (const auto& [minute, units] : day.meal_bolus)
                bolus.row({subject, DateTime{date, minute}.str(), "meal", fmtFixed(units, 2)});
            for (const auto& [minute, units] : day.corrections)
                bolus.row({subject, DateTime{date, minute}.str(), "correction",
                           fmtFixed(units, 2)});
            for (const auto& [minute, units] : day.totals)
                bolus.row({subject, DateTime{date, minute}.str(), "total", fmtFixed(units, 3)});
            date = date.next();
        }
    }
    logInfo("synthetic data for " + std::to_string(cfg.n_subjects) + " subjects x " +
            std::to_string(cfg.days_per_subject) + " days written to " + out_dir);
}

}  // namespace crossgp
