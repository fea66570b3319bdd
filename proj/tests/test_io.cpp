#include <doctest.h>

#include <sstream>

#include "lorma/io.hpp"
#include "oracles.hpp"

using namespace lorma;

TEST_CASE("snapshot: header layout is bit-exact") {
    const Matrix m = Matrix::from_rows({{1.0}});
    std::ostringstream out(std::ios::binary);
    write_matrix(out, m);
    const std::string bytes = out.str();
    REQUIRE(bytes.size() == 4 + 1 + 4 + 4 + 8);
    CHECK(bytes.substr(0, 4) == "LRMA");
    CHECK(bytes[4] == 0x01);
    CHECK(static_cast<unsigned char>(bytes[5]) == 1);  // rows = 1 LE
    CHECK(bytes[6] == 0);
    CHECK(static_cast<unsigned char>(bytes[9]) == 1);  // cols = 1 LE
    // 1.0 in little-endian IEEE-754: 00 00 00 00 00 00 f0 3f
    CHECK(static_cast<unsigned char>(bytes[19]) == 0xf0);
    CHECK(static_cast<unsigned char>(bytes[20]) == 0x3f);
}

TEST_CASE("snapshot: round trip is exact for random matrices") {
    Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        const Matrix m = oracles::gaussian_matrix(rng, 1 + rng.below(20),
                                                  1 + rng.below(20));
        std::stringstream buffer(std::ios::in | std::ios::out | std::ios::binary);
        write_matrix(buffer, m);
        CHECK(read_matrix(buffer) == m);
    }
}

TEST_CASE("snapshot: corrupted magic names the offending byte offset") {
    const Matrix m = Matrix::from_rows({{2.5, -1.0}});
    std::ostringstream out(std::ios::binary);
    write_matrix(out, m);
    std::string bytes = out.str();
    bytes[2] = 'X';
    std::istringstream in(bytes, std::ios::binary);
    try {
        (void)read_matrix(in);
        FAIL("expected a FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset == 2);
        CHECK(std::string(e.what()).find("offset 2") != std::string::npos);
    }
}

TEST_CASE("snapshot: truncation and non-finite payloads are rejected") {
    const Matrix m = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    std::ostringstream out(std::ios::binary);
    write_matrix(out, m);
    const std::string full = out.str();

    std::istringstream truncated(full.substr(0, full.size() - 3), std::ios::binary);
    CHECK_THROWS_AS((void)read_matrix(truncated), FormatError);

    std::string poisoned = full;
    poisoned[13 + 7] = '\x7f';  // flips the first value's exponent to the NaN range
    poisoned[13 + 6] = '\xf8';
    std::istringstream bad(poisoned, std::ios::binary);
    CHECK_THROWS_AS((void)read_matrix(bad), FormatError);
}

TEST_CASE("csv: round trip with negative and exponent-formatted values") {
    const Matrix m = Matrix::from_rows({{-1.5, 3.25e-17}, {0.0, 12345.678}});
    std::stringstream buffer;
    write_matrix_csv(buffer, m);
    CHECK(read_matrix_csv(buffer) == m);
}

TEST_CASE("csv: ragged rows are rejected") {
    std::istringstream in("1,2,3\n4,5\n");
    CHECK_THROWS_AS((void)read_matrix_csv(in), IoError);
}

TEST_CASE("format_double: shortest round-trip formatting") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-3.0) == "-3");
    const double tricky = 0.1 + 0.2;
    CHECK(std::stod(format_double(tricky)) == tricky);
}
