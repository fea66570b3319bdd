#include "lorma/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lorma {

namespace {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("matrix dimensions must be positive, got " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("matrix dimensions must be positive, got " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (data_.size() != rows * cols) {
        throw ShapeError("data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::ones(std::size_t rows, std::size_t cols) {
    return filled(rows, cols, 1.0);
}

Matrix Matrix::filled(std::size_t rows, std::size_t cols, double value) {
    Matrix m(rows, cols);
    std::fill(m.data_.begin(), m.data_.end(), value);
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw ShapeError("ragged initializer: row " + std::to_string(i) + " has " +
                             std::to_string(row.size()) + " entries, expected " +
                             std::to_string(c));
        }
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix Matrix::outer(const std::vector<double>& u, const std::vector<double>& v) {
    Matrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

Matrix Matrix::diagonal(const std::vector<double>& entries) {
    Matrix m(entries.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::column(std::size_t j) const {
    Matrix c(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
    return c;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

double Matrix::frobenius_norm() const {
    double acc = 0.0;
    for (double v : data_) acc += v * v;
    return std::sqrt(acc);
}

double Matrix::max_abs() const {
    double acc = 0.0;
    for (double v : data_) acc = std::max(acc, std::abs(v));
    return acc;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) +
                         " vs " + shape_str(b));
    }
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other, "add");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other, "subtract");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double scalar) {
    for (double& v : data_) v *= scalar;
    return *this;
}

bool operator==(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    out += b;
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    out -= b;
    return out;
}

Matrix operator*(double scalar, const Matrix& m) {
    Matrix out = m;
    out *= scalar;
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b, FlopCounter* counter) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a) +
                         " times " + shape_str(b));
    }
    const std::size_t m = a.rows(), n = a.cols(), p = b.cols();
    Matrix out(m, p);
    // ikj order keeps the inner loop contiguous in both b and out.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data().data() + k * p;
            double* orow = out.data().data() + i * p;
            for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
        }
    }
    if (counter) counter->matmul_flops += 2ull * m * n * p;
    return out;
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "frobenius_inner");
    double acc = 0.0;
    const auto da = a.data(), db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) acc += da[i] * db[i];
    return acc;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double acc = 0.0;
    const auto da = a.data(), db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i)
        acc = std::max(acc, std::abs(da[i] - db[i]));
    return acc;
}

}  // namespace lorma
