#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace crossgp {

inline constexpr const char* kToolVersion = "0.1.0";

// Provenance record written beside every subcommand's outputs. Contains no
// timestamps, so identical runs produce identical manifests.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> flags;   // resolved flag values
    std::map<std::string, std::string> inputs;  // input path -> content digest
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
};

// FNV-1a 64 over the file bytes, as 16 hex digits.
std::string fileDigest(const std::string& path);

void addInput(RunManifest& m, const std::string& path);

// Writes <dir>/crossgp-manifest.json; dir defaults to "." when empty.
void writeManifest(const RunManifest& m, const std::string& dir);

// Directory part of a file path ("" when the path has no slash).
std::string parentDir(const std::string& path);

}  // namespace crossgp
