#include "triad/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace triad {

std::size_t Matrix::size_checked(int rows, int cols) {
    if (rows < 0 || cols < 0) {
        throw ShapeMismatch("matrix dimensions must be non-negative");
    }
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    Matrix m(r, c);
    int i = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != c) {
            throw ShapeMismatch("ragged initializer rows");
        }
        int j = 0;
        for (double v : row) {
            m(i, j++) = v;
        }
        ++i;
    }
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::add_in_place(const Matrix& other) {
    if (!same_shape(other)) {
        throw ShapeMismatch("add_in_place: shapes differ");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
}

void Matrix::scale_in_place(double s) {
    for (double& v : data_) {
        v *= s;
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeMismatch("matmul: inner dimensions differ");
    }
    Matrix out(a.rows(), b.cols());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                out(i, j) += aip * b(p, j);
            }
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeMismatch("matmul_nt: inner dimensions differ");
    }
    Matrix out(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < b.rows(); ++j) {
            out(i, j) = row_dot(a, i, b, j);
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeMismatch("matmul_tn: inner dimensions differ");
    }
    Matrix out(a.cols(), b.cols());
    const int k = a.rows(), m = a.cols(), n = b.cols();
    for (int p = 0; p < k; ++p) {
        for (int i = 0; i < m; ++i) {
            const double api = a(p, i);
            if (api == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                out(i, j) += api * b(p, j);
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

Matrix col_sums(const Matrix& a) {
    Matrix out(1, a.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            out(0, j) += a(i, j);
        }
    }
    return out;
}

double row_dot(const Matrix& a, int i, const Matrix& b, int j) {
    if (a.cols() != b.cols()) {
        throw ShapeMismatch("row_dot: row lengths differ");
    }
    double s = 0.0;
    for (int c = 0; c < a.cols(); ++c) {
        s += a(i, c) * b(j, c);
    }
    return s;
}

double row_norm(const Matrix& a, int i) { return std::sqrt(row_dot(a, i, a, i)); }

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.flat()) {
        s += v * v;
    }
    return std::sqrt(s);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeMismatch("max_abs_diff: shapes differ");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a.flat()[i] - b.flat()[i]));
    }
    return m;
}

} // namespace triad
