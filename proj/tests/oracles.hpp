#pragma once

// Test-only reference implementations, written independently of the library
// code paths they check: direct-summation loss evaluation, a scalar Adam
// loop, and central finite differences over a ParamStore.

#include <cmath>
#include <functional>
#include <vector>

#include "triad/features.hpp"
#include "triad/matrix.hpp"
#include "triad/param_store.hpp"
#include "triad/rng.hpp"

namespace oracle {

using triad::Matrix;

/// Contrastive cross-entropy -(1/B) sum_i log softmax_i(ii), written with
/// plain loops and no max subtraction (tiny instances only).
inline double info_nce_direct(const Matrix& anchor, const Matrix& target, double tau) {
    const int b = anchor.rows();
    double total = 0.0;
    for (int i = 0; i < b; ++i) {
        double num = 0.0;
        for (int c = 0; c < anchor.cols(); ++c) {
            num += anchor(i, c) * target(i, c);
        }
        double denom = 0.0;
        for (int j = 0; j < b; ++j) {
            double dot = 0.0;
            for (int c = 0; c < anchor.cols(); ++c) {
                dot += anchor(i, c) * target(j, c);
            }
            denom += std::exp(dot / tau);
        }
        total += -std::log(std::exp(num / tau) / denom);
    }
    return total / b;
}

inline double mean_cosine_direct(const Matrix& a, const Matrix& b) {
    double acc = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (int c = 0; c < a.cols(); ++c) {
            dot += a(i, c) * b(i, c);
            na += a(i, c) * a(i, c);
            nb += b(i, c) * b(i, c);
        }
        acc += dot / (std::sqrt(na) * std::sqrt(nb));
    }
    return acc / a.rows();
}

/// Term-by-term recomputation of the full objective.
inline double total_loss_direct(const Matrix& f_eeg, const Matrix& f_img, const Matrix& f_text,
                                const Matrix& f_text_raw, double tau, double lambda_r) {
    const double ce_ei = info_nce_direct(f_eeg, f_img, tau);
    const double ce_ie = info_nce_direct(f_img, f_eeg, tau);
    const double ce_et = info_nce_direct(f_eeg, f_text, tau);
    const double ce_te = info_nce_direct(f_text, f_eeg, tau);
    const double cos_it = 1.0 - mean_cosine_direct(f_img, f_text);
    const double lr = 1.0 - mean_cosine_direct(f_text, f_text_raw);
    return (ce_ei + ce_ie + ce_et + ce_te + cos_it) / 5.0 + lambda_r * lr;
}

/// Central finite difference of loss_fn with respect to one parameter scalar.
inline double central_diff(triad::ParamEntry& entry, std::size_t k, double h,
                           const std::function<double()>& loss_fn) {
    const double saved = entry.value.flat()[k];
    entry.value.flat()[k] = saved + h;
    const double up = loss_fn();
    entry.value.flat()[k] = saved - h;
    const double down = loss_fn();
    entry.value.flat()[k] = saved;
    return (up - down) / (2.0 * h);
}

/// Gradient check over every scalar of a store. Passes when
/// |analytic - fd| <= rel_tol * max(|analytic|, |fd|) or both are tiny.
struct GradCheckResult {
    bool ok = true;
    std::string worst_param;
    double worst_rel = 0.0;
};

inline GradCheckResult check_gradients(triad::ParamStore& store,
                                       const std::function<double()>& loss_fn,
                                       double h = 1e-5, double rel_tol = 1e-4,
                                       double abs_floor = 1e-8) {
    GradCheckResult result;
    for (std::size_t i = 0; i < store.count(); ++i) {
        triad::ParamEntry& e = store.entry(i);
        for (std::size_t k = 0; k < e.value.size(); ++k) {
            const double analytic = e.grad.flat()[k];
            const double fd = central_diff(e, k, h, loss_fn);
            const double diff = std::fabs(analytic - fd);
            const double scale = std::max(std::fabs(analytic), std::fabs(fd));
            if (diff > abs_floor && diff > rel_tol * scale) {
                const double rel = scale > 0.0 ? diff / scale : diff;
                if (rel > result.worst_rel) {
                    result.worst_rel = rel;
                    result.worst_param = e.key() + "[" + std::to_string(k) + "]";
                }
                result.ok = false;
            }
        }
    }
    return result;
}

/// Plain Adam without bias correction, one scalar at a time.
struct ScalarAdam {
    double beta1, beta2, eta, eps;
    std::vector<double> m, v;

    ScalarAdam(std::size_t n, double eta_, double b1, double b2, double eps_)
        : beta1(b1), beta2(b2), eta(eta_), eps(eps_), m(n, 0.0), v(n, 0.0) {}

    void step(std::vector<double>& theta, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            theta[i] -= eta * m[i] / (std::sqrt(v[i]) + eps);
        }
    }
};

/// Random row-normalized feature matrix.
inline Matrix random_normalized(triad::RngStream& rng, int rows, int cols) {
    Matrix m(rows, cols);
    for (double& v : m.flat()) {
        v = rng.gauss();
    }
    return triad::l2_normalize_rows(m);
}

inline Matrix random_matrix(triad::RngStream& rng, int rows, int cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.flat()) {
        v = rng.gauss() * scale;
    }
    return m;
}

} // namespace oracle
