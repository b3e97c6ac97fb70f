#include "crossgp/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "crossgp/csv.hpp"
#include "crossgp/error.hpp"

namespace crossgp {

namespace {

void report(std::vector<IngestIssue>& issues, bool strict, const std::string& file, int line,
            const std::string& reason) {
    if (strict) {
        throw ValidationError(file + ":" + std::to_string(line) + ": " + reason);
    }
    issues.push_back({file, line, reason});
}

}  // namespace

std::vector<CgmReading> parseCgmFile(const std::string& path, std::vector<IngestIssue>& issues,
                                     bool strict) {
    CsvReader reader(path, {"subject", "timestamp", "bg"});
    std::vector<CgmReading> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != 3) {
            report(issues, strict, path, reader.line(), "malformed row: expected 3 fields");
            continue;
        }
        if (f[0].empty()) {
            report(issues, strict, path, reader.line(), "malformed row: empty subject");
            continue;
        }
        auto t = parseDateTime(f[1]);
        if (!t) {
            report(issues, strict, path, reader.line(), "malformed row: bad timestamp `" + f[1] + "`");
            continue;
        }
        auto bg = parseDouble(f[2]);
        if (!bg || !std::isfinite(*bg)) {
            report(issues, strict, path, reader.line(), "malformed row: bad bg `" + f[2] + "`");
            continue;
        }
        if (*bg < kBgMin || *bg > kBgMax) {
            report(issues, strict, path, reader.line(),
                   "out of range: bg " + f[2] + " outside [20,600]");
            continue;
        }
        out.push_back({f[0], *t, *bg});
    }
    return out;
}

std::vector<InsulinEvent> parseBolusFile(const std::string& path,
                                         std::vector<IngestIssue>& issues, bool strict) {
    CsvReader reader(path, {"subject", "timestamp", "kind", "units"});
    std::vector<InsulinEvent> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != 4) {
            report(issues, strict, path, reader.line(), "malformed row: expected 4 fields");
            continue;
        }
        if (f[0].empty()) {
            report(issues, strict, path, reader.line(), "malformed row: empty subject");
            continue;
        }
        auto t = parseDateTime(f[1]);
        if (!t) {
            report(issues, strict, path, reader.line(), "malformed row: bad timestamp `" + f[1] + "`");
            continue;
        }
        BolusKind kind;
        if (f[2] == "correction") {
            kind = BolusKind::Correction;
        } else if (f[2] == "meal") {
            kind = BolusKind::Meal;
        } else if (f[2] == "total") {
            kind = BolusKind::Total;
        } else {
            report(issues, strict, path, reader.line(), "malformed row: bad kind `" + f[2] + "`");
            continue;
        }
        auto units = parseDouble(f[3]);
        if (!units || !std::isfinite(*units)) {
            report(issues, strict, path, reader.line(), "malformed row: bad units `" + f[3] + "`");
            continue;
        }
        if (*units < 0.0 || *units > kUnitsMax) {
            report(issues, strict, path, reader.line(),
                   "out of range: units " + f[3] + " outside [0,300]");
            continue;
        }
        out.push_back({f[0], *t, kind, *units});
    }
    return out;
}

std::vector<MealEvent> parseMealFile(const std::string& path, std::vector<IngestIssue>& issues,
                                     bool strict) {
    CsvReader reader(path, {"subject", "timestamp", "carbs"});
    std::vector<MealEvent> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != 3) {
            report(issues, strict, path, reader.line(), "malformed row: expected 3 fields");
            continue;
        }
        if (f[0].empty()) {
            report(issues, strict, path, reader.line(), "malformed row: empty subject");
            continue;
        }
        auto t = parseDateTime(f[1]);
        if (!t) {
            report(issues, strict, path, reader.line(), "malformed row: bad timestamp `" + f[1] + "`");
            continue;
        }
        auto carbs = parseDouble(f[2]);
        if (!carbs || !std::isfinite(*carbs)) {
            report(issues, strict, path, reader.line(), "malformed row: bad carbs `" + f[2] + "`");
            continue;
        }
        if (*carbs < 0.0 || *carbs > kCarbsMax) {
            report(issues, strict, path, reader.line(),
                   "out of range: carbs " + f[2] + " outside [0,500]");
            continue;
        }
        out.push_back({f[0], *t, *carbs});
    }
    return out;
}

RawEvents parseEventFiles(const std::string& cgm_path, const std::string& bolus_path,
                          const std::string& meal_path, std::vector<IngestIssue>& issues,
                          bool strict) {
    RawEvents events;
    events.cgm = parseCgmFile(cgm_path, issues, strict);
    events.insulin = parseBolusFile(bolus_path, issues, strict);
    events.meals = parseMealFile(meal_path, issues, strict);
    return events;
}

std::vector<SubjectDayBundle> bundleByDay(const RawEvents& events) {
    std::map<std::pair<SubjectId, std::int32_t>, SubjectDayBundle> groups;
    auto bundleFor = [&groups](const SubjectId& subject, Date date) -> SubjectDayBundle& {
        auto key = std::make_pair(subject, date.serial);
        auto it = groups.find(key);
        if (it == groups.end()) {
            it = groups.emplace(key, SubjectDayBundle{subject, date, {}, {}, {}}).first;
        }
        return it->second;
    };

    for (const auto& r : events.cgm) bundleFor(r.subject, r.t.date).cgm.push_back(r);
    for (const auto& e : events.insulin) bundleFor(e.subject, e.t.date).insulin.push_back(e);
    for (const auto& m : events.meals) bundleFor(m.subject, m.t.date).meals.push_back(m);

    std::vector<SubjectDayBundle> out;
    out.reserve(groups.size());
    for (auto& [key, bundle] : groups) {
        // Stable sort keeps input order among equal timestamps, so the
        // last occurrence of a duplicate is the one that survives.
        std::stable_sort(bundle.cgm.begin(), bundle.cgm.end(),
                         [](const CgmReading& a, const CgmReading& b) { return a.t < b.t; });
        std::vector<CgmReading> dedup;
        dedup.reserve(bundle.cgm.size());
        for (const auto& r : bundle.cgm) {
            if (!dedup.empty() && dedup.back().t == r.t) {
                dedup.back() = r;
            } else {
                dedup.push_back(r);
            }
        }
        bundle.cgm = std::move(dedup);
        std::stable_sort(bundle.insulin.begin(), bundle.insulin.end(),
                         [](const InsulinEvent& a, const InsulinEvent& b) { return a.t < b.t; });
        std::stable_sort(bundle.meals.begin(), bundle.meals.end(),
                         [](const MealEvent& a, const MealEvent& b) { return a.t < b.t; });
        out.push_back(std::move(bundle));
    }
    return out;
}

void writeBundleFiles(const std::string& dir, const std::vector<SubjectDayBundle>& bundles) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir);

    std::map<SubjectId, std::ofstream> files;
    for (const auto& b : bundles) {
        auto it = files.find(b.subject);
        if (it == files.end()) {
            std::string path = (fs::path(dir) / (b.subject + ".jsonl")).string();
            it = files.emplace(b.subject, std::ofstream(path)).first;
            if (!it->second) throw IoError("cannot open " + path + " for writing");
        }
        nlohmann::json j;
        j["subject"] = b.subject;
        j["date"] = b.date.str();
        auto& cgm = j["cgm"] = nlohmann::json::array();
        for (const auto& r : b.cgm) cgm.push_back({{"t", r.t.str()}, {"bg", r.bg}});
        auto& insulin = j["insulin"] = nlohmann::json::array();
        for (const auto& e : b.insulin)
            insulin.push_back({{"t", e.t.str()}, {"kind", bolusKindName(e.kind)}, {"units", e.units}});
        auto& meals = j["meals"] = nlohmann::json::array();
        for (const auto& m : b.meals) meals.push_back({{"t", m.t.str()}, {"carbs", m.carbs}});
        it->second << j.dump() << '\n';
    }
}

}  // namespace crossgp
