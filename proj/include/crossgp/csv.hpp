#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crossgp {

std::vector<std::string> splitCsvLine(std::string_view line);

// Round-trip (shortest) representation; deterministic across runs.
std::string formatDouble(double v);

// Strict full-width parse; rejects trailing garbage, accepts inf/nan spellings not at all.
std::optional<double> parseDouble(std::string_view s);
std::optional<long> parseLong(std::string_view s);

// Header-checked CSV reader over a UTF-8 file with `\n` (or `\r\n`) line endings.
class CsvReader {
public:
    CsvReader(const std::string& path, const std::vector<std::string>& expected_header);

    // Next data row; false at end of file. Blank lines are skipped.
    bool next(std::vector<std::string>& fields);

    int line() const { return line_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    int line_ = 0;
};

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);

    void row(const std::vector<std::string>& fields);

private:
    std::string path_;
    std::ofstream out_;
};

}  // namespace crossgp
