#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crossgp/types.hpp"

namespace crossgp::testing {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0;; ++i) {
            path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(path_, ec)) break;
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void writeFile(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

// Runs a shell command, capturing combined output.
inline CommandResult runCommand(const std::string& cmd) {
    CommandResult res;
    FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return res;
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) res.output.append(buf.data(), n);
    const int status = ::pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

// A labeled example with the pairing invariant already satisfied.
inline LabeledExample makeExample(const std::string& subject, Date date, double tir, double tbr,
                                  double tar, double corr, double meal, double meal_bolus,
                                  double total, GlycemicClass label) {
    LabeledExample e;
    e.features.subject = subject;
    e.features.date = date;
    e.features.tir = tir;
    e.features.tbr = tbr;
    e.features.tar = tar;
    e.features.correction_bolus = corr;
    e.features.meal = meal;
    e.features.meal_bolus = meal_bolus;
    e.features.total_bolus = total;
    e.features.cgm_count = 288;
    e.label = label;
    e.label_date = date.next();
    return e;
}

inline Normalization identityNorm(int d) {
    Normalization n;
    n.mean = Eigen::VectorXd::Zero(d);
    n.std = Eigen::VectorXd::Ones(d);
    return n;
}

}  // namespace crossgp::testing
