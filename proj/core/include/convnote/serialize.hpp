#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace convnote {

// Little-endian binary checkpoint helpers. A checkpoint file is the magic,
// a format version, then a caller-defined sequence of fields written and
// read in the same order.

void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, const std::string& s);
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
void write_string_list(std::ostream& out, const std::vector<std::string>& v);

std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
Eigen::MatrixXd read_matrix(std::istream& in);
std::vector<std::string> read_string_list(std::istream& in);

void write_magic(std::ostream& out, const char magic[4], std::uint32_t version);
std::uint32_t read_magic(std::istream& in, const char magic[4]);

}  // namespace convnote
