#pragma once

#include "triad/features.hpp"

namespace triad {

struct LossConfig {
    /// Softmax temperature for the contrastive terms.
    double tau = 0.07;
    /// Weight on the adapter consistency term.
    double lambda_r = 1.0;

    void validate() const {
        if (!(tau > 0.0)) throw InvalidConfig("loss.tau must be > 0");
        if (!(lambda_r >= 0.0)) throw InvalidConfig("loss.lambda_r must be >= 0");
    }
};

/// Per-term breakdown of one loss evaluation. Unused terms (text modality or
/// adapter disabled) are zero and excluded from total.
struct LossReport {
    double ce_eeg_img = 0.0;
    double ce_img_eeg = 0.0;
    double ce_eeg_text = 0.0;
    double ce_text_eeg = 0.0;
    double cos_img_text = 0.0;
    double adapter_consistency = 0.0;
    double total = 0.0;
    bool text_active = true;

    bool operator==(const LossReport&) const = default;
};

/// Contrastive cross-entropy over matched rows: softmax over the batch of
/// candidate targets per anchor, temperature tau. Inputs are expected
/// row-normalized so the logits are cosines / tau.
double info_nce(const FeatureMatrix& anchor, const FeatureMatrix& target, double tau);

/// 1 - mean row-wise cosine between image and text features. Range [0, 2].
double cosine_alignment_loss(const FeatureMatrix& img, const FeatureMatrix& text);

/// 1 - mean row-wise cosine between adapter output and original features.
/// Minimizing it keeps the adapted features close in direction to the input.
double adapter_consistency_loss(const FeatureMatrix& adapted, const FeatureMatrix& original);

/// The full objective: mean of the four contrastive terms and the image-text
/// cosine term, plus lambda_r times the consistency between f_text and
/// f_text_raw.
LossReport total_loss(const FeatureMatrix& f_eeg, const FeatureMatrix& f_img,
                      const FeatureMatrix& f_text, const FeatureMatrix& f_text_raw,
                      const LossConfig& cfg);

/// Assemble a report's total from its parts. With text off only the two
/// eeg-image terms participate (their mean); otherwise the five-term mean
/// plus lambda_r * adapter_consistency.
LossReport combine_loss_report(double ce_eeg_img, double ce_img_eeg, double ce_eeg_text,
                               double ce_text_eeg, double cos_img_text,
                               double adapter_consistency, bool text_active, double lambda_r);

namespace loss_detail {

/// Forward pass shared by the public function and the autodiff tape.
/// If probs is non-null it receives the row softmax matrix (B x B) needed by
/// the backward pass.
double info_nce_forward(const Matrix& anchor, const Matrix& target, double tau, Matrix* probs);

struct CosineCache {
    std::vector<double> cos;    // per-row cosine
    std::vector<double> inv_na; // 1 / ||a_i||
    std::vector<double> inv_nb; // 1 / ||b_i||
};

/// 1 - mean row cosine; fills cache for the backward pass when non-null.
double cosine_distance_forward(const Matrix& a, const Matrix& b, CosineCache* cache);

} // namespace loss_detail

} // namespace triad
