#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "crossgp/time.hpp"

namespace crossgp {

// Opaque per-patient identifier, non-empty.
using SubjectId = std::string;

constexpr int kNumFeatures = 7;
constexpr int kNumClasses = 3;

// Sanity bands slightly outside the observed data extremes; rows beyond
// them are rejected at ingestion.
constexpr double kBgMin = 20.0;
constexpr double kBgMax = 600.0;
constexpr double kUnitsMax = 300.0;
constexpr double kCarbsMax = 500.0;

enum class BolusKind { Correction = 0, Meal = 1, Total = 2 };

const char* bolusKindName(BolusKind k);

struct CgmReading {
    SubjectId subject;
    DateTime t;
    double bg = 0.0;  // mg/dL
};

struct InsulinEvent {
    SubjectId subject;
    DateTime t;
    BolusKind kind = BolusKind::Correction;
    double units = 0.0;
};

struct MealEvent {
    SubjectId subject;
    DateTime t;
    double carbs = 0.0;  // grams
};

// All events of one subject on one calendar day; CGM sorted by timestamp,
// strictly increasing after duplicate collapse.
struct SubjectDayBundle {
    SubjectId subject;
    Date date;
    std::vector<CgmReading> cgm;
    std::vector<InsulinEvent> insulin;
    std::vector<MealEvent> meals;
};

// The seven model features of one subject-day.
struct DailyFeatures {
    SubjectId subject;
    Date date;
    double tir = 0.0;
    double tbr = 0.0;
    double tar = 0.0;
    double correction_bolus = 0.0;
    double meal = 0.0;
    double meal_bolus = 0.0;
    double total_bolus = 0.0;
    int cgm_count = 0;

    Eigen::Matrix<double, kNumFeatures, 1> vec() const {
        Eigen::Matrix<double, kNumFeatures, 1> v;
        v << tir, tbr, tar, correction_bolus, meal, meal_bolus, total_bolus;
        return v;
    }

    void setVec(const Eigen::Matrix<double, kNumFeatures, 1>& v) {
        tir = v[0];
        tbr = v[1];
        tar = v[2];
        correction_bolus = v[3];
        meal = v[4];
        meal_bolus = v[5];
        total_bolus = v[6];
    }
};

const std::array<const char*, kNumFeatures>& featureNames();

enum class GlycemicClass : int { Good = 0, Moderate = 1, Poor = 2 };

const char* className(GlycemicClass c);

// Day-d feature vector paired with the day-(d+1) control class.
struct LabeledExample {
    DailyFeatures features;     // day d
    GlycemicClass label;        // class of day d + 1
    Date label_date;            // always features.date + 1
};

// Per-feature z-score statistics, fitted on the training split only.
struct Normalization {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

struct SplitDataset {
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> test;
    Normalization norm;
};

// Dense views over an example list: X is n x 7 raw features, y the class codes.
Eigen::MatrixXd featureMatrix(const std::vector<LabeledExample>& examples);
Eigen::VectorXi labelVector(const std::vector<LabeledExample>& examples);

}  // namespace crossgp
