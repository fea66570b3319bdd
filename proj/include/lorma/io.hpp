#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "lorma/matrix.hpp"

namespace lorma {

// Binary snapshot layout: magic "LRMA", version byte 0x01, then rows and
// cols as unsigned 32-bit little-endian, then rows*cols doubles as 64-bit
// little-endian IEEE-754, row-major.

void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

void save_matrix(const Matrix& m, const std::filesystem::path& path);
Matrix load_matrix(const std::filesystem::path& path);

/// Headerless CSV, '.' decimal separator, shortest round-trip formatting,
/// LF line endings.
void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);

void save_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Matrix load_matrix_csv(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace lorma
