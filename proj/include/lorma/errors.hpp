#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lorma {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions are incompatible (matmul, add, inflation of non-square, ...).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An iterative routine hit its iteration cap without converging.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A rank precondition was violated; carries the rank actually observed.
class RankError : public Error {
public:
    RankError(const std::string& what, int observed_rank)
        : Error(what), observed_rank(observed_rank) {}
    int observed_rank;
};

/// Invalid configuration (bad rank/alpha/dims, unknown enum value, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss; carries the offending step index.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, long step) : Error(what), step(step) {}
    long step;
};

/// Filesystem or stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// Config-file syntax error with source position.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(what + " at line " + std::to_string(line) + ", column " +
                std::to_string(column)),
          line(line),
          column(column) {}
    int line;
    int column;
};

/// Snapshot-format violation; carries the byte offset of the defect.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : Error(what + " at byte offset " + std::to_string(offset)), offset(offset) {}
    std::uint64_t offset;
};

}  // namespace lorma
