#include "dwl/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "dwl/errors.hpp"

namespace dwl {

namespace {

void put_u64_le(std::ofstream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64_le(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void write_dwlm(const RealMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("dwlm: cannot write " + path);
    out.write("DWLM", 4);
    const char version = 1;
    out.write(&version, 1);
    put_u64_le(out, m.rows());
    put_u64_le(out, m.cols());
    for (double v : m.values()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i)
            buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        out.write(reinterpret_cast<const char*>(buf), 8);
    }
    if (!out) throw IoError("dwlm: write failed for " + path);
}

RealMatrix read_dwlm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("dwlm: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DWLM", 4) != 0)
        throw IoError("dwlm: bad magic in " + path);
    char version = 0;
    in.read(&version, 1);
    if (version != 1) throw IoError("dwlm: unsupported version in " + path);
    const std::uint64_t rows = get_u64_le(in);
    const std::uint64_t cols = get_u64_le(in);
    RealMatrix m(rows, cols);
    for (double& v : m.values()) {
        unsigned char buf[8];
        in.read(reinterpret_cast<char*>(buf), 8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        std::memcpy(&v, &bits, 8);
    }
    if (!in) throw IoError("dwlm: truncated file " + path);
    if (has_nonfinite(m)) throw IoError("dwlm: non-finite values in " + path);
    return m;
}

void write_matrix_csv(const RealMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("csv: cannot write " + path);
    char buf[64];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << buf;
            if (j + 1 < m.cols()) out << ',';
        }
        out << '\n';
    }
}

RealMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p <= end) {
            const char* field_end = p;
            while (field_end < end && *field_end != ',') ++field_end;
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(p, field_end, value);
            if (ec != std::errc{} || ptr != field_end)
                throw ParseError("matrix csv: bad number at line " + std::to_string(line_no));
            row.push_back(value);
            if (field_end == end) break;
            p = field_end + 1;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyFile("matrix csv: " + path);
    RealMatrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw RaggedRow("matrix csv: ragged row " + std::to_string(i + 1));
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

void write_labels_csv(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("labels: cannot write " + path);
    out << "label\n";
    for (int v : labels) out << v << '\n';
}

std::vector<int> read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("labels: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw EmptyFile("labels: " + path);
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        labels.push_back(std::stoi(line));
    }
    return labels;
}

}  // namespace dwl
