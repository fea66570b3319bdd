#include "lorma/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

namespace lorma {

namespace {

constexpr char kMagic[4] = {'L', 'R', 'M', 'A'};
constexpr unsigned char kVersion = 0x01;

void put_u32_le(std::ostream& out, std::uint32_t v) {
    const std::array<unsigned char, 4> bytes = {
        static_cast<unsigned char>(v & 0xFF),
        static_cast<unsigned char>((v >> 8) & 0xFF),
        static_cast<unsigned char>((v >> 16) & 0xFF),
        static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(bytes.data()), 4);
}

void put_f64_le(std::ostream& out, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    std::array<unsigned char, 8> bytes;
    for (int i = 0; i < 8; ++i)
        bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(bytes.data()), 8);
}

std::uint32_t get_u32_le(std::istream& in, std::uint64_t offset) {
    std::array<unsigned char, 4> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), 4)) {
        throw FormatError("truncated snapshot while reading a 32-bit field", offset);
    }
    return static_cast<std::uint32_t>(bytes[0]) |
           (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

double get_f64_le(std::istream& in, std::uint64_t offset) {
    std::array<unsigned char, 8> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), 8)) {
        throw FormatError("truncated snapshot while reading a value", offset);
    }
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_matrix(std::ostream& out, const Matrix& m) {
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    put_u32_le(out, static_cast<std::uint32_t>(m.rows()));
    put_u32_le(out, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) put_f64_le(out, v);
}

Matrix read_matrix(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4)) throw FormatError("truncated snapshot: missing magic", 0);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        std::uint64_t bad = 0;
        while (bad < 4 && magic[bad] == kMagic[bad]) ++bad;
        throw FormatError("bad magic bytes, expected \"LRMA\"", bad);
    }
    const int version = in.get();
    if (version == std::char_traits<char>::eof())
        throw FormatError("truncated snapshot: missing version byte", 4);
    if (version != kVersion) {
        throw FormatError("unsupported snapshot version " + std::to_string(version), 4);
    }
    const std::uint32_t rows = get_u32_le(in, 5);
    const std::uint32_t cols = get_u32_le(in, 9);
    if (rows == 0 || cols == 0) {
        throw FormatError("snapshot declares empty dimensions " + std::to_string(rows) +
                              "x" + std::to_string(cols),
                          5);
    }
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(rows) * cols);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(rows) * cols; ++i) {
        const std::uint64_t offset = 13 + 8 * i;
        const double v = get_f64_le(in, offset);
        if (!std::isfinite(v)) {
            throw FormatError("non-finite value in snapshot payload", offset);
        }
        data.push_back(v);
    }
    return Matrix(rows, cols, std::move(data));
}

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_matrix(out, m);
    if (!out) throw IoError("write failed for " + path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return read_matrix(in);
}

std::string format_double(double value) {
    std::array<char, 64> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out.put(',');
            out << format_double(m(i, j));
        }
        out.put('\n');
    }
}

Matrix read_matrix_csv(std::istream& in) {
    std::vector<double> data;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t row_cols = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            while (p < end && *p == ' ') ++p;
            double v = 0.0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc()) {
                throw IoError("csv: cannot parse value in row " + std::to_string(rows) +
                              ": '" + line + "'");
            }
            if (!std::isfinite(v))
                throw IoError("csv: non-finite value in row " + std::to_string(rows));
            data.push_back(v);
            ++row_cols;
            p = res.ptr;
            while (p < end && *p == ' ') ++p;
            if (p < end) {
                if (*p != ',')
                    throw IoError("csv: expected ',' in row " + std::to_string(rows));
                ++p;
            }
        }
        if (rows == 0) {
            cols = row_cols;
        } else if (row_cols != cols) {
            throw IoError("csv: row " + std::to_string(rows) + " has " +
                          std::to_string(row_cols) + " values, expected " +
                          std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0) throw IoError("csv: no data rows");
    return Matrix(rows, cols, std::move(data));
}

void save_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_matrix_csv(out, m);
    if (!out) throw IoError("write failed for " + path.string());
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return read_matrix_csv(in);
}

}  // namespace lorma
