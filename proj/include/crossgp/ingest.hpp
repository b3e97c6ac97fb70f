#pragma once

#include <string>
#include <vector>

#include "crossgp/types.hpp"

namespace crossgp {

// A rejected input row. `reason` distinguishes malformed fields from
// sanity-band violations.
struct IngestIssue {
    std::string file;
    int line = 0;
    std::string reason;
};

struct RawEvents {
    std::vector<CgmReading> cgm;
    std::vector<InsulinEvent> insulin;
    std::vector<MealEvent> meals;
};

// CSV schemas (header row required):
//   cgm.csv:   subject,timestamp,bg        timestamp = YYYY-MM-DDTHH:MM
//   bolus.csv: subject,timestamp,kind,units  kind in {correction,meal,total}
//   meal.csv:  subject,timestamp,carbs
// In strict mode the first bad row throws ValidationError; otherwise bad rows
// are appended to `issues` and skipped. Row order within a file is preserved.
std::vector<CgmReading> parseCgmFile(const std::string& path, std::vector<IngestIssue>& issues,
                                     bool strict = false);
std::vector<InsulinEvent> parseBolusFile(const std::string& path,
                                         std::vector<IngestIssue>& issues, bool strict = false);
std::vector<MealEvent> parseMealFile(const std::string& path, std::vector<IngestIssue>& issues,
                                     bool strict = false);

RawEvents parseEventFiles(const std::string& cgm_path, const std::string& bolus_path,
                          const std::string& meal_path, std::vector<IngestIssue>& issues,
                          bool strict = false);

// Groups validated events into one bundle per (subject, calendar date),
// sorted by (subject, date). Within a bundle the CGM sequence is sorted by
// timestamp with duplicate timestamps collapsed last-wins.
std::vector<SubjectDayBundle> bundleByDay(const RawEvents& events);

// One JSON-lines file per subject (<subject>.jsonl) under `dir`.
void writeBundleFiles(const std::string& dir, const std::vector<SubjectDayBundle>& bundles);

}  // namespace crossgp
