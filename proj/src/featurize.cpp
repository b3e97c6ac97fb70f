#include "crossgp/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "crossgp/csv.hpp"
#include "crossgp/error.hpp"

namespace crossgp {

RangeFractions computeRanges(const std::vector<double>& bg) {
    if (bg.empty()) throw ValidationError("empty day: no CGM readings");
    int in = 0, below = 0, above = 0;
    for (double v : bg) {
        if (v < 70.0) {
            ++below;
        } else if (v > 180.0) {
            ++above;
        } else {
            ++in;
        }
    }
    const double n = static_cast<double>(bg.size());
    return {in / n, below / n, above / n};
}

DailyFeatures dailyFeatures(const SubjectDayBundle& bundle) {
    std::vector<double> bg;
    bg.reserve(bundle.cgm.size());
    for (const auto& r : bundle.cgm) bg.push_back(r.bg);
    const RangeFractions ranges = computeRanges(bg);

    DailyFeatures f;
    f.subject = bundle.subject;
    f.date = bundle.date;
    f.tir = ranges.tir;
    f.tbr = ranges.tbr;
    f.tar = ranges.tar;
    f.cgm_count = static_cast<int>(bundle.cgm.size());
    for (const auto& e : bundle.insulin) {
        switch (e.kind) {
            case BolusKind::Correction: f.correction_bolus += e.units; break;
            case BolusKind::Meal: f.meal_bolus += e.units; break;
            case BolusKind::Total: f.total_bolus += e.units; break;
        }
    }
    for (const auto& m : bundle.meals) f.meal += m.carbs;
    return f;
}

std::vector<DailyFeatures> featurizeBundles(const std::vector<SubjectDayBundle>& bundles,
                                            int min_cgm, std::vector<CoverageSkip>* skipped) {
    std::vector<DailyFeatures> out;
    out.reserve(bundles.size());
    for (const auto& b : bundles) {
        int count = static_cast<int>(b.cgm.size());
        if (count < min_cgm) {
            if (skipped) skipped->push_back({b.subject, b.date, count});
            continue;
        }
        out.push_back(dailyFeatures(b));
    }
    return out;
}

GlycemicClass labelOf(double tir) {
    if (!(tir >= 0.0 && tir <= 1.0)) {
        throw ValidationError("tir " + formatDouble(tir) + " outside [0,1]");
    }
    if (tir > 0.7) return GlycemicClass::Good;
    if (tir >= 0.55) return GlycemicClass::Moderate;
    return GlycemicClass::Poor;
}

std::vector<LabeledExample> pairCrossDay(const std::vector<DailyFeatures>& days) {
    std::vector<LabeledExample> out;
    for (std::size_t i = 0; i + 1 < days.size(); ++i) {
        const auto& d0 = days[i];
        const auto& d1 = days[i + 1];
        if (d0.subject != d1.subject) continue;
        if (d1.date != d0.date.next()) continue;
        out.push_back({d0, labelOf(d1.tir), d1.date});
    }
    return out;
}

SplitDataset splitAndNormalize(const std::vector<LabeledExample>& examples,
                               double test_fraction) {
    if (examples.size() < 10) {
        throw ValidationError("need at least 10 examples to split, got " +
                              std::to_string(examples.size()));
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ValidationError("test fraction must be in (0,1)");
    }

    std::map<SubjectId, std::vector<LabeledExample>> per_subject;
    for (const auto& e : examples) per_subject[e.features.subject].push_back(e);

    SplitDataset split;
    for (auto& [subject, list] : per_subject) {
        std::sort(list.begin(), list.end(), [](const LabeledExample& a, const LabeledExample& b) {
            return a.features.date < b.features.date;
        });
        const std::size_t n = list.size();
        const std::size_t n_test =
            static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n)));
        const std::size_t n_train = n - n_test;
        for (std::size_t i = 0; i < n; ++i) {
            (i < n_train ? split.train : split.test).push_back(list[i]);
        }
    }

    const Eigen::MatrixXd x = featureMatrix(split.train);
    if (x.rows() == 0) throw ValidationError("train split is empty");
    split.norm.mean = x.colwise().mean();
    Eigen::VectorXd var =
        (x.rowwise() - split.norm.mean.transpose()).array().square().colwise().mean();
    split.norm.std = var.array().sqrt();
    for (int j = 0; j < kNumFeatures; ++j) {
        if (!(split.norm.std[j] > 0.0)) {
            throw ValidationError(std::string("degenerate feature: ") + featureNames()[j] +
                                  " has zero std on train");
        }
    }
    return split;
}

void writeFeaturesCsv(const std::string& path, const std::vector<DailyFeatures>& days) {
    CsvWriter w(path);
    w.row({"subject", "date", "tir", "tbr", "tar", "correction_bolus", "meal", "meal_bolus",
           "total_bolus", "cgm_count"});
    for (const auto& d : days) {
        w.row({d.subject, d.date.str(), formatDouble(d.tir), formatDouble(d.tbr),
               formatDouble(d.tar), formatDouble(d.correction_bolus), formatDouble(d.meal),
               formatDouble(d.meal_bolus), formatDouble(d.total_bolus),
               std::to_string(d.cgm_count)});
    }
}

namespace {

DailyFeatures parseFeatureRow(const std::vector<std::string>& f, const std::string& path,
                              int line) {
    auto bad = [&](const std::string& what) -> ValidationError {
        return ValidationError(path + ":" + std::to_string(line) + ": " + what);
    };
    if (f[0].empty()) throw bad("empty subject");
    auto date = parseDate(f[1]);
    if (!date) throw bad("bad date `" + f[1] + "`");
    double vals[7];
    for (int j = 0; j < 7; ++j) {
        auto v = parseDouble(f[2 + static_cast<std::size_t>(j)]);
        if (!v || !std::isfinite(*v)) throw bad("bad numeric field");
        vals[j] = *v;
    }
    auto count = parseLong(f[9]);
    if (!count || *count < 0) throw bad("bad cgm_count");
    DailyFeatures d;
    d.subject = f[0];
    d.date = *date;
    d.setVec(Eigen::Map<Eigen::Matrix<double, 7, 1>>(vals));
    d.cgm_count = static_cast<int>(*count);
    return d;
}

}  // namespace

std::vector<DailyFeatures> readFeaturesCsv(const std::string& path) {
    CsvReader reader(path, {"subject", "date", "tir", "tbr", "tar", "correction_bolus", "meal",
                            "meal_bolus", "total_bolus", "cgm_count"});
    std::vector<DailyFeatures> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != 10) {
            throw ValidationError(path + ":" + std::to_string(reader.line()) +
                                  ": expected 10 fields");
        }
        out.push_back(parseFeatureRow(f, path, reader.line()));
    }
    return out;
}

void writeExamplesCsv(const std::string& path, const std::vector<LabeledExample>& examples) {
    CsvWriter w(path);
    w.row({"subject", "date", "tir", "tbr", "tar", "correction_bolus", "meal", "meal_bolus",
           "total_bolus", "cgm_count", "label", "label_date"});
    for (const auto& e : examples) {
        const auto& d = e.features;
        w.row({d.subject, d.date.str(), formatDouble(d.tir), formatDouble(d.tbr),
               formatDouble(d.tar), formatDouble(d.correction_bolus), formatDouble(d.meal),
               formatDouble(d.meal_bolus), formatDouble(d.total_bolus),
               std::to_string(d.cgm_count), std::to_string(static_cast<int>(e.label)),
               e.label_date.str()});
    }
}

std::vector<LabeledExample> readExamplesCsv(const std::string& path) {
    CsvReader reader(path, {"subject", "date", "tir", "tbr", "tar", "correction_bolus", "meal",
                            "meal_bolus", "total_bolus", "cgm_count", "label", "label_date"});
    std::vector<LabeledExample> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const int line = reader.line();
        if (f.size() != 12) {
            throw ValidationError(path + ":" + std::to_string(line) + ": expected 12 fields");
        }
        LabeledExample e;
        e.features = parseFeatureRow(f, path, line);
        auto code = parseLong(f[10]);
        if (!code || *code < 0 || *code >= kNumClasses) {
            throw ValidationError(path + ":" + std::to_string(line) + ": bad label `" + f[10] + "`");
        }
        e.label = static_cast<GlycemicClass>(*code);
        auto label_date = parseDate(f[11]);
        if (!label_date) {
            throw ValidationError(path + ":" + std::to_string(line) + ": bad label_date");
        }
        if (*label_date != e.features.date.next()) {
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": label_date is not the day after date");
        }
        e.label_date = *label_date;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace crossgp
