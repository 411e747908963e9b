#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace convnote {

// One named file a run reads or writes. Inputs carry the checksum of the
// bytes that were actually consumed; outputs are declared by path only,
// since the manifest is written before they exist.
struct ManifestFile {
    std::string name;
    std::string path;
    std::string checksum;
};

bool operator==(const ManifestFile& a, const ManifestFile& b);

// Reproducibility record for one harness invocation: the effective config
// snapshot, the seed, checksummed inputs, declared outputs, and module
// format versions. Saved atomically before any result file, so the recorded
// wall time covers everything up to that point (loading, training,
// generation) but not the final writes.
struct ExperimentManifest {
    std::string command;
    std::string tool_version;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, std::string>> versions;
    std::vector<ManifestFile> inputs;
    std::vector<ManifestFile> outputs;
};

bool operator==(const ExperimentManifest& a, const ExperimentManifest& b);

std::string tool_version();

// Format versions of every artifact the toolkit reads or writes, so a
// manifest pins the build it was produced with.
std::vector<std::pair<std::string, std::string>> module_versions();

// FNV-1a 64 of the bytes as 16 lowercase hex digits.
std::string checksum_hex(const std::string& data);
std::string file_checksum(const std::string& path);  // ParseError if unreadable

// Structured text: [run]/[config]/[versions]/[inputs]/[outputs] sections of
// flat `key = value` lines. Inputs use two lines, `name = path` followed by
// `name.fnv1a64 = checksum`. Full-line '#' comments and blank lines are
// ignored; values keep inner whitespace.
std::string render_manifest(const ExperimentManifest& manifest);
ExperimentManifest parse_manifest(const std::string& text);  // ParseError

void save_manifest(const ExperimentManifest& manifest, const std::string& path);
ExperimentManifest load_manifest(const std::string& path);

// Flat key=value reader for config files: '#' starts a comment anywhere,
// blank lines are skipped, pairs keep file order. ConfigError naming the
// line on a line without '='. Typed interpretation is the caller's job.
std::vector<std::pair<std::string, std::string>> parse_flat_kv(const std::string& text);

}  // namespace convnote
