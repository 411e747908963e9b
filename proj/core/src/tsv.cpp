#include "convnote/tsv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "convnote/error.hpp"

namespace convnote {

namespace {

void append_tsv_line(std::vector<TsvRow>& rows, std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) return;
    TsvRow row;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            row.push_back(line.substr(start));
            break;
        }
        row.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    rows.push_back(std::move(row));
}

}  // namespace

std::vector<TsvRow> read_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::vector<TsvRow> rows;
    std::string line;
    while (std::getline(in, line)) append_tsv_line(rows, std::move(line));
    return rows;
}

std::vector<TsvRow> parse_tsv(const std::string& text) {
    std::vector<TsvRow> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) append_tsv_line(rows, std::move(line));
    return rows;
}

std::string render_tsv(const std::vector<TsvRow>& rows) {
    std::string out;
    for (const TsvRow& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out.push_back('\t');
            out += row[i];
        }
        out.push_back('\n');
    }
    return out;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot write file: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ParseError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ParseError("cannot rename " + tmp + " to " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace convnote
