#include "convnote/serialize.hpp"

#include <cstring>
#include <istream>
#include <ostream>

#include "convnote/error.hpp"

namespace convnote {

namespace {

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw ParseError("checkpoint write failed");
}

void get_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw ParseError("checkpoint truncated");
}

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { put_bytes(out, &v, 4); }
void write_u64(std::ostream& out, std::uint64_t v) { put_bytes(out, &v, 8); }
void write_f64(std::ostream& out, double v) { put_bytes(out, &v, 8); }

void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    put_bytes(out, s.data(), s.size());
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    write_u64(out, static_cast<std::uint64_t>(m.rows()));
    write_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) write_f64(out, m(r, c));
}

void write_string_list(std::ostream& out, const std::vector<std::string>& v) {
    write_u64(out, v.size());
    for (const std::string& s : v) write_string(out, s);
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v;
    get_bytes(in, &v, 4);
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v;
    get_bytes(in, &v, 8);
    return v;
}

double read_f64(std::istream& in) {
    double v;
    get_bytes(in, &v, 8);
    return v;
}

std::string read_string(std::istream& in) {
    std::uint64_t n = read_u64(in);
    std::string s(n, '\0');
    if (n) get_bytes(in, s.data(), n);
    return s;
}

Eigen::MatrixXd read_matrix(std::istream& in) {
    std::uint64_t rows = read_u64(in);
    std::uint64_t cols = read_u64(in);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = read_f64(in);
    return m;
}

std::vector<std::string> read_string_list(std::istream& in) {
    std::uint64_t n = read_u64(in);
    std::vector<std::string> v;
    v.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) v.push_back(read_string(in));
    return v;
}

void write_magic(std::ostream& out, const char magic[4], std::uint32_t version) {
    put_bytes(out, magic, 4);
    write_u32(out, version);
}

std::uint32_t read_magic(std::istream& in, const char magic[4]) {
    char got[4];
    get_bytes(in, got, 4);
    if (std::memcmp(got, magic, 4) != 0) throw ParseError("bad checkpoint magic");
    return read_u32(in);
}

}  // namespace convnote
