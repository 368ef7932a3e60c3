#include "triad/loss.hpp"

#include <cmath>

namespace triad {

namespace loss_detail {

double info_nce_forward(const Matrix& anchor, const Matrix& target, double tau, Matrix* probs) {
    if (!anchor.same_shape(target)) {
        throw ShapeMismatch("info_nce: anchor and target shapes differ");
    }
    if (!anchor.all_finite() || !target.all_finite()) {
        throw NonFiniteInput("info_nce: non-finite input");
    }
    const int b = anchor.rows();
    Matrix logits = matmul_nt(anchor, target);
    logits.scale_in_place(1.0 / tau);

    if (probs != nullptr) {
        *probs = Matrix(b, b);
    }
    double loss = 0.0;
    for (int i = 0; i < b; ++i) {
        double row_max = logits(i, 0);
        for (int j = 1; j < b; ++j) {
            row_max = std::max(row_max, logits(i, j));
        }
        double denom = 0.0;
        for (int j = 0; j < b; ++j) {
            denom += std::exp(logits(i, j) - row_max);
        }
        // log-sum-exp with max subtraction; tau = 0.07 puts raw logits near 14.
        const double lse = row_max + std::log(denom);
        loss += lse - logits(i, i);
        if (probs != nullptr) {
            for (int j = 0; j < b; ++j) {
                (*probs)(i, j) = std::exp(logits(i, j) - row_max) / denom;
            }
        }
    }
    return loss / b;
}

double cosine_distance_forward(const Matrix& a, const Matrix& b, CosineCache* cache) {
    if (!a.same_shape(b)) {
        throw ShapeMismatch("cosine loss: shapes differ");
    }
    const int n = a.rows();
    if (cache != nullptr) {
        cache->cos.resize(n);
        cache->inv_na.resize(n);
        cache->inv_nb.resize(n);
    }
    double mean_cos = 0.0;
    for (int i = 0; i < n; ++i) {
        const double na = row_norm(a, i);
        const double nb = row_norm(b, i);
        if (!(na >= 1e-12) || !(nb >= 1e-12)) {
            throw ZeroRowNorm("cosine loss: zero-norm row " + std::to_string(i));
        }
        const double c = row_dot(a, i, b, i) / (na * nb);
        mean_cos += c;
        if (cache != nullptr) {
            cache->cos[i] = c;
            cache->inv_na[i] = 1.0 / na;
            cache->inv_nb[i] = 1.0 / nb;
        }
    }
    return 1.0 - mean_cos / n;
}

} // namespace loss_detail

double info_nce(const FeatureMatrix& anchor, const FeatureMatrix& target, double tau) {
    if (!(tau > 0.0)) throw InvalidConfig("info_nce: tau must be > 0");
    return loss_detail::info_nce_forward(anchor.values, target.values, tau, nullptr);
}

double cosine_alignment_loss(const FeatureMatrix& img, const FeatureMatrix& text) {
    return loss_detail::cosine_distance_forward(img.values, text.values, nullptr);
}

double adapter_consistency_loss(const FeatureMatrix& adapted, const FeatureMatrix& original) {
    return loss_detail::cosine_distance_forward(adapted.values, original.values, nullptr);
}

LossReport combine_loss_report(double ce_eeg_img, double ce_img_eeg, double ce_eeg_text,
                               double ce_text_eeg, double cos_img_text,
                               double adapter_consistency, bool text_active, double lambda_r) {
    LossReport r;
    r.text_active = text_active;
    r.ce_eeg_img = ce_eeg_img;
    r.ce_img_eeg = ce_img_eeg;
    if (text_active) {
        r.ce_eeg_text = ce_eeg_text;
        r.ce_text_eeg = ce_text_eeg;
        r.cos_img_text = cos_img_text;
        r.adapter_consistency = adapter_consistency;
        r.total = (ce_eeg_img + ce_img_eeg + ce_eeg_text + ce_text_eeg + cos_img_text) / 5.0 +
                  lambda_r * adapter_consistency;
    } else {
        r.total = (ce_eeg_img + ce_img_eeg) / 2.0;
    }
    return r;
}

LossReport total_loss(const FeatureMatrix& f_eeg, const FeatureMatrix& f_img,
                      const FeatureMatrix& f_text, const FeatureMatrix& f_text_raw,
                      const LossConfig& cfg) {
    cfg.validate();
    return combine_loss_report(info_nce(f_eeg, f_img, cfg.tau), info_nce(f_img, f_eeg, cfg.tau),
                               info_nce(f_eeg, f_text, cfg.tau), info_nce(f_text, f_eeg, cfg.tau),
                               cosine_alignment_loss(f_img, f_text),
                               adapter_consistency_loss(f_text, f_text_raw),
                               /*text_active=*/true, cfg.lambda_r);
}

} // namespace triad
