#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace convnote {

using TsvRow = std::vector<std::string>;

// Reads a TSV file into rows of cells. Empty lines are skipped.
// Throws ParseError naming the line number on IO failure.
std::vector<TsvRow> read_tsv(const std::string& path);

// Same splitting rules applied to an in-memory string.
std::vector<TsvRow> parse_tsv(const std::string& text);

std::string render_tsv(const std::vector<TsvRow>& rows);

// Writes content to path atomically (temp file + rename).
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);  // throws ParseError if unreadable

// Fixed-point formatting used by all emitted tables so that identical runs
// produce byte-identical files.
std::string format_fixed(double value, int decimals = 6);

// FNV-1a 64-bit, used for input checksums and per-record seed derivation.
std::uint64_t fnv1a64(const std::string& data);

}  // namespace convnote
