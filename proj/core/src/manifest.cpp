#include "convnote/manifest.hpp"

#include <cstdio>
#include <sstream>

#include "convnote/error.hpp"
#include "convnote/tsv.hpp"

namespace convnote {

namespace {

constexpr char kToolVersion[] = "0.1.0";

std::string trimmed(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t z = s.find_last_not_of(" \t\r");
    return s.substr(a, z - a + 1);
}

// Splits "key = value" at the first '='; returns false when there is none.
bool split_kv(const std::string& line, std::string& key, std::string& value) {
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) return false;
    key = trimmed(line.substr(0, eq));
    value = trimmed(line.substr(eq + 1));
    return true;
}

}  // namespace

bool operator==(const ManifestFile& a, const ManifestFile& b) {
    return a.name == b.name && a.path == b.path && a.checksum == b.checksum;
}

bool operator==(const ExperimentManifest& a, const ExperimentManifest& b) {
    return a.command == b.command && a.tool_version == b.tool_version && a.seed == b.seed &&
           a.wall_seconds == b.wall_seconds && a.config == b.config &&
           a.versions == b.versions && a.inputs == b.inputs && a.outputs == b.outputs;
}

std::string tool_version() { return kToolVersion; }

std::vector<std::pair<std::string, std::string>> module_versions() {
    return {
        {"abstractor_bundle", "1"},
        {"corpus_jsonl", "1"},
        {"extractor_checkpoint", "1"},
        {"manifest", "1"},
        {"seq2seq_block", "1"},
        {"tool", kToolVersion},
    };
}

std::string checksum_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

std::string file_checksum(const std::string& path) { return checksum_hex(read_file(path)); }

std::string render_manifest(const ExperimentManifest& manifest) {
    std::ostringstream out;
    out << "[run]\n";
    out << "command = " << manifest.command << "\n";
    out << "tool_version = " << manifest.tool_version << "\n";
    out << "seed = " << manifest.seed << "\n";
    out << "wall_seconds = " << format_fixed(manifest.wall_seconds) << "\n";
    out << "\n[config]\n";
    for (const auto& [key, value] : manifest.config) out << key << " = " << value << "\n";
    out << "\n[versions]\n";
    for (const auto& [key, value] : manifest.versions) out << key << " = " << value << "\n";
    out << "\n[inputs]\n";
    for (const ManifestFile& file : manifest.inputs) {
        out << file.name << " = " << file.path << "\n";
        out << file.name << ".fnv1a64 = " << file.checksum << "\n";
    }
    out << "\n[outputs]\n";
    for (const ManifestFile& file : manifest.outputs) out << file.name << " = " << file.path << "\n";
    return out.str();
}

ExperimentManifest parse_manifest(const std::string& text) {
    ExperimentManifest manifest;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError("manifest line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        line = trimmed(line);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            section = line.substr(1, line.size() - 2);
            if (section != "run" && section != "config" && section != "versions" &&
                section != "inputs" && section != "outputs")
                fail("unknown section [" + section + "]");
            continue;
        }
        std::string key, value;
        if (!split_kv(line, key, value)) fail("expected key = value");
        if (section.empty()) fail("key before any section");
        if (section == "run") {
            if (key == "command") manifest.command = value;
            else if (key == "tool_version") manifest.tool_version = value;
            else if (key == "seed") {
                try {
                    manifest.seed = std::stoull(value);
                } catch (const std::exception&) {
                    fail("bad seed: " + value);
                }
            } else if (key == "wall_seconds") {
                try {
                    manifest.wall_seconds = std::stod(value);
                } catch (const std::exception&) {
                    fail("bad wall_seconds: " + value);
                }
            } else fail("unknown run key '" + key + "'");
        } else if (section == "config") {
            manifest.config.emplace_back(key, value);
        } else if (section == "versions") {
            manifest.versions.emplace_back(key, value);
        } else if (section == "inputs") {
            const std::string suffix = ".fnv1a64";
            if (key.size() > suffix.size() &&
                key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0) {
                std::string name = key.substr(0, key.size() - suffix.size());
                if (manifest.inputs.empty() || manifest.inputs.back().name != name)
                    fail("checksum before path for input '" + name + "'");
                manifest.inputs.back().checksum = value;
            } else {
                manifest.inputs.push_back({key, value, ""});
            }
        } else {
            manifest.outputs.push_back({key, value, ""});
        }
    }
    return manifest;
}

void save_manifest(const ExperimentManifest& manifest, const std::string& path) {
    atomic_write_file(path, render_manifest(manifest));
}

ExperimentManifest load_manifest(const std::string& path) {
    return parse_manifest(read_file(path));
}

std::vector<std::pair<std::string, std::string>> parse_flat_kv(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trimmed(line);
        if (line.empty()) continue;
        std::string key, value;
        if (!split_kv(line, key, value) || key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        pairs.emplace_back(key, value);
    }
    return pairs;
}

}  // namespace convnote
