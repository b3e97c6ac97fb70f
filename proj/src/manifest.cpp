#include "crossgp/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "crossgp/error.hpp"
#include "crossgp/rng.hpp"

namespace crossgp {

std::string fileDigest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for digesting");
    std::uint64_t h = 14695981039346656037ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void addInput(RunManifest& m, const std::string& path) {
    m.inputs[path] = fileDigest(path);
}

void writeManifest(const RunManifest& m, const std::string& dir) {
    nlohmann::json doc;
    doc["command"] = m.command;
    doc["flags"] = m.flags;
    doc["inputs"] = m.inputs;
    doc["outputs"] = m.outputs;
    doc["seed"] = m.seed;
    doc["version"] = kToolVersion;
    const std::string path = (dir.empty() ? std::string(".") : dir) + "/crossgp-manifest.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path);
}

std::string parentDir(const std::string& path) {
    const auto pos = path.find_last_of('/');
    return pos == std::string::npos ? std::string() : path.substr(0, pos);
}

}  // namespace crossgp
