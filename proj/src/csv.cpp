#include "crossgp/csv.hpp"

#include <charconv>
#include <cmath>

#include "crossgp/error.hpp"

namespace crossgp {

std::vector<std::string> splitCsvLine(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string formatDouble(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

std::optional<double> parseDouble(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<long> parseLong(std::string_view s) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

CsvReader::CsvReader(const std::string& path, const std::vector<std::string>& expected_header)
    : path_(path), in_(path) {
    if (!in_) throw IoError("cannot open " + path);
    std::string header;
    if (!std::getline(in_, header)) throw ValidationError(path + ": missing header row");
    ++line_;
    if (splitCsvLine(header) != expected_header) {
        std::string want;
        for (const auto& h : expected_header) {
            if (!want.empty()) want += ',';
            want += h;
        }
        throw ValidationError(path + ": unexpected header, want `" + want + "`");
    }
}

bool CsvReader::next(std::vector<std::string>& fields) {
    std::string row;
    while (std::getline(in_, row)) {
        ++line_;
        if (row.empty() || row == "\r") continue;
        fields = splitCsvLine(row);
        return true;
    }
    return false;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open " + path + " for writing");
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
    if (!out_) throw IoError("write failed on " + path_);
}

}  // namespace crossgp
