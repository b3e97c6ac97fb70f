#pragma once

#include <string>
#include <vector>

#include "crossgp/types.hpp"

namespace crossgp {

// A day must carry at least this many CGM readings (>= 50% of the 288
// expected at 5-minute cadence) to be featurized.
constexpr int kDefaultMinCgm = 144;

struct RangeFractions {
    double tir = 0.0;
    double tbr = 0.0;
    double tar = 0.0;
};

// Fractions of readings in / below / above the 70-180 mg/dL band; both
// boundaries count as in-range. Throws ValidationError on an empty day.
RangeFractions computeRanges(const std::vector<double>& bg);

// Table-style daily aggregates of one bundle. Pre: bundle has >= 1 CGM
// reading; missing event streams aggregate to 0.
DailyFeatures dailyFeatures(const SubjectDayBundle& bundle);

struct CoverageSkip {
    SubjectId subject;
    Date date;
    int cgm_count = 0;
};

// Featurizes every bundle meeting the coverage threshold; the rest are
// collected in `skipped`, never fabricated.
std::vector<DailyFeatures> featurizeBundles(const std::vector<SubjectDayBundle>& bundles,
                                            int min_cgm = kDefaultMinCgm,
                                            std::vector<CoverageSkip>* skipped = nullptr);

// Good: tir > 0.7; Moderate: 0.55 <= tir <= 0.7; Poor: tir < 0.55.
// Throws ValidationError if tir is outside [0, 1].
GlycemicClass labelOf(double tir);

// One example per consecutive calendar-day pair of the same subject:
// day-d features, day-(d+1) label. Gaps produce no example.
std::vector<LabeledExample> pairCrossDay(const std::vector<DailyFeatures>& days);

// Per-subject chronological split: the last ceil(test_fraction * n) examples
// of each subject go to test. Normalization (mean and population std per
// feature) is fitted on train only; a zero-std feature throws.
SplitDataset splitAndNormalize(const std::vector<LabeledExample>& examples,
                               double test_fraction);

// features.csv: subject,date,tir,tbr,tar,correction_bolus,meal,meal_bolus,total_bolus,cgm_count
void writeFeaturesCsv(const std::string& path, const std::vector<DailyFeatures>& days);
std::vector<DailyFeatures> readFeaturesCsv(const std::string& path);

// examples.csv: the features.csv columns plus label (class code) and label_date.
void writeExamplesCsv(const std::string& path, const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> readExamplesCsv(const std::string& path);

}  // namespace crossgp
