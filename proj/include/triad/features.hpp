#pragma once

#include <vector>

#include "triad/matrix.hpp"
#include "triad/modality.hpp"

namespace triad {

/// A batch of embeddings: one sample per row, one embedding dimension per
/// column. This is the currency passed between encoders, losses and the
/// balance machinery.
struct FeatureMatrix {
    Matrix values;
    Modality modality = Modality::Eeg;
    /// Set by l2_normalize; rows are promised to have unit Euclidean norm.
    bool normalized = false;

    int batch() const { return values.rows(); }
    int dim() const { return values.cols(); }
};

/// Row-wise Euclidean normalization. Direction of every row is preserved.
/// Throws ZeroRowNorm when a row's norm is below 1e-12.
FeatureMatrix l2_normalize(const FeatureMatrix& x);

/// Same operation on a bare matrix.
Matrix l2_normalize_rows(const Matrix& x);

/// Normalization with the norm floored at 1e-12: all-zero rows pass through
/// as zeros instead of raising. This is the semantics used inside the model
/// forward pass, where a ReLU-dead encoder row is a legitimate transient
/// state rather than invalid input.
Matrix l2_normalize_rows_clamped(const Matrix& x);

/// Cosine similarity between matched rows of a and b; one value per row,
/// each in [-1, 1].
std::vector<double> cosine_similarity_rows(const FeatureMatrix& a, const FeatureMatrix& b);
std::vector<double> cosine_similarity_rows(const Matrix& a, const Matrix& b);

} // namespace triad
