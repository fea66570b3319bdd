#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "lorma/errors.hpp"

namespace lorma {

/// Tallies work done by instrumented operations. Opt-in: operations only
/// count when handed a non-null counter, so uninstrumented paths pay nothing.
struct FlopCounter {
    std::uint64_t matmul_flops = 0;     // 2*m*n*p per m-by-n times n-by-p product
    std::uint64_t elementwise_ops = 0;  // one per scalar add / multiply

    std::uint64_t flops() const { return matmul_flops + elementwise_ops; }
    /// Complexity-table accounting: one unit per fused multiply-add in a
    /// product, one unit per elementwise scalar op.
    std::uint64_t multiply_adds() const { return matmul_flops / 2 + elementwise_ops; }
    void reset() { matmul_flops = elementwise_ops = 0; }
};

/// Dense row-major matrix of 64-bit reals. Value type: copies are deep,
/// operations return fresh matrices, and a constructed Matrix is safe to
/// share across threads as long as nobody mutates it.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);  // zero-initialized
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
    static Matrix ones(std::size_t rows, std::size_t cols);
    static Matrix filled(std::size_t rows, std::size_t cols, double value);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    /// Column vector u times row vector v.
    static Matrix outer(const std::vector<double>& u, const std::vector<double>& v);
    static Matrix diagonal(const std::vector<double>& entries);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }

    Matrix transposed() const;
    Matrix column(std::size_t j) const;

    bool all_finite() const;
    double frobenius_norm() const;
    double max_abs() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double scalar);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Exact (bitwise) equality; used by determinism contracts.
bool operator==(const Matrix& a, const Matrix& b);
inline bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double scalar, const Matrix& m);

/// Standard dense product. When `counter` is non-null the product adds
/// 2*a.rows*a.cols*b.cols to the active flop tally.
Matrix matmul(const Matrix& a, const Matrix& b, FlopCounter* counter = nullptr);

/// <A, B>_F = sum_ij A_ij * B_ij.
double frobenius_inner(const Matrix& a, const Matrix& b);

/// Largest absolute entry of a - b; shapes must match.
double max_abs_diff(const Matrix& a, const Matrix& b);

void require_same_shape(const Matrix& a, const Matrix& b, const char* op);

}  // namespace lorma
