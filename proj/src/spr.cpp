#include "triad/spr.hpp"

#include <cmath>

namespace triad {

double noise_sigma(long t, const SprConfig& cfg) {
    cfg.validate();
    if (t < 0 || t > cfg.total_steps) {
        throw StepOutOfRange("noise_sigma: step " + std::to_string(t) + " outside [0, " +
                             std::to_string(cfg.total_steps) + "]");
    }
    const double frac = 1.0 - static_cast<double>(t) / static_cast<double>(cfg.total_steps);
    return cfg.sigma_max * std::pow(frac, cfg.beta_decay);
}

Matrix sample_noise(int rows, int cols, double sigma, RngStream& rng) {
    if (!(sigma >= 0.0)) throw InvalidConfig("sample_noise: sigma must be >= 0");
    Matrix out(rows, cols);
    if (sigma == 0.0) {
        return out;
    }
    for (double& v : out.flat()) {
        v = rng.gauss(0.0, sigma);
    }
    return out;
}

SprAdam::SprAdam(const ParamStore& store, OptimConfig ocfg, SprConfig scfg)
    : ocfg_(ocfg), scfg_(scfg) {
    ocfg_.validate();
    scfg_.validate();
    m_.reserve(store.count());
    v_.reserve(store.count());
    for (std::size_t i = 0; i < store.count(); ++i) {
        const Matrix& value = store.entry(i).value;
        m_.emplace_back(value.rows(), value.cols());
        v_.emplace_back(value.rows(), value.cols());
    }
}

double SprAdam::current_sigma() const {
    if (!scfg_.enabled) return 0.0;
    return noise_sigma(t_, scfg_);
}

void SprAdam::step(ParamStore& store, RngStream& rng) {
    if (store.count() != m_.size()) {
        throw ShapeMismatch("SprAdam::step: store entry count changed");
    }
    // Validate every gradient before mutating anything, so a bad step aborts
    // cleanly instead of half-updating.
    for (std::size_t i = 0; i < store.count(); ++i) {
        const ParamEntry& e = store.entry(i);
        if (!e.grad.all_finite()) {
            throw NonFiniteGradient("non-finite gradient in " + e.key());
        }
        if (!e.grad.same_shape(m_[i])) {
            throw ShapeMismatch("SprAdam::step: gradient shape changed for " + e.key());
        }
    }

    const double sigma = current_sigma();
    const long step_index = t_ + 1; // 1-based for the optional bias correction
    const double corr1 = 1.0 - std::pow(ocfg_.beta1, static_cast<double>(step_index));
    const double corr2 = 1.0 - std::pow(ocfg_.beta2, static_cast<double>(step_index));

    for (std::size_t i = 0; i < store.count(); ++i) {
        ParamEntry& e = store.entry(i);
        Matrix& m = m_[i];
        Matrix& v = v_[i];
        for (std::size_t k = 0; k < e.value.size(); ++k) {
            double g = e.grad.flat()[k];
            if (sigma > 0.0) {
                g += rng.gauss(0.0, sigma);
            }
            m.flat()[k] = ocfg_.beta1 * m.flat()[k] + (1.0 - ocfg_.beta1) * g;
            v.flat()[k] = ocfg_.beta2 * v.flat()[k] + (1.0 - ocfg_.beta2) * g * g;
            double mh = m.flat()[k];
            double vh = v.flat()[k];
            if (ocfg_.bias_correction) {
                mh /= corr1;
                vh /= corr2;
            }
            e.value.flat()[k] -= ocfg_.eta * mh / (std::sqrt(vh) + ocfg_.eps);
        }
    }
    ++t_;
}

} // namespace triad
