#include "triad/features.hpp"

#include <algorithm>
#include <cmath>

namespace triad {

namespace {
constexpr double kMinRowNorm = 1e-12;
}

Matrix l2_normalize_rows(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i) {
        const double n = row_norm(x, i);
        if (!(n >= kMinRowNorm)) {
            throw ZeroRowNorm("l2_normalize: row " + std::to_string(i) +
                              " has norm below 1e-12");
        }
        for (int j = 0; j < x.cols(); ++j) {
            out(i, j) = x(i, j) / n;
        }
    }
    return out;
}

Matrix l2_normalize_rows_clamped(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i) {
        const double n = std::max(row_norm(x, i), kMinRowNorm);
        for (int j = 0; j < x.cols(); ++j) {
            out(i, j) = x(i, j) / n;
        }
    }
    return out;
}

FeatureMatrix l2_normalize(const FeatureMatrix& x) {
    FeatureMatrix out;
    out.values = l2_normalize_rows(x.values);
    out.modality = x.modality;
    out.normalized = true;
    return out;
}

std::vector<double> cosine_similarity_rows(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeMismatch("cosine_similarity_rows: shapes differ");
    }
    std::vector<double> out(static_cast<std::size_t>(a.rows()));
    for (int i = 0; i < a.rows(); ++i) {
        const double na = row_norm(a, i);
        const double nb = row_norm(b, i);
        if (!(na >= kMinRowNorm) || !(nb >= kMinRowNorm)) {
            throw ZeroRowNorm("cosine_similarity_rows: zero-norm row " + std::to_string(i));
        }
        const double c = row_dot(a, i, b, i) / (na * nb);
        // Rounding can push the quotient a hair outside [-1, 1].
        out[static_cast<std::size_t>(i)] = std::clamp(c, -1.0, 1.0);
    }
    return out;
}

std::vector<double> cosine_similarity_rows(const FeatureMatrix& a, const FeatureMatrix& b) {
    return cosine_similarity_rows(a.values, b.values);
}

} // namespace triad
