#pragma once

#include <cmath>
#include <initializer_list>
#include <span>
#include <vector>

#include "triad/errors.hpp"

namespace triad {

/// Dense row-major matrix of doubles. The only shapes this project needs are
/// small matrices and vectors (a vector is a 1xN or Nx1 matrix), so there is
/// no striding, no views, no broadcasting machinery.
class Matrix {
public:
    Matrix() = default;

    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(size_checked(rows, cols), 0.0) {}

    static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const;

    void fill(double v) { data_.assign(data_.size(), v); }

    /// this += other, shapes must match.
    void add_in_place(const Matrix& other);
    /// this *= s.
    void scale_in_place(double s);

    bool operator==(const Matrix& other) const = default;

private:
    static std::size_t size_checked(int rows, int cols);

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// a(m x k) * b(k x n) -> m x n
Matrix matmul(const Matrix& a, const Matrix& b);
/// a(m x k) * b(n x k)^T -> m x n
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// a(k x m)^T * b(k x n) -> m x n
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Column sums as a 1 x cols matrix.
Matrix col_sums(const Matrix& a);

double row_dot(const Matrix& a, int i, const Matrix& b, int j);
double row_norm(const Matrix& a, int i);

/// Euclidean norm over all entries.
double frobenius_norm(const Matrix& a);

double max_abs_diff(const Matrix& a, const Matrix& b);

} // namespace triad
