#pragma once

#include <vector>

#include "triad/matrix.hpp"
#include "triad/param_store.hpp"
#include "triad/rng.hpp"

namespace triad {

/// Schedule of the injected gradient noise: sigma_t = sigma_max * (1 - t/T)^beta.
struct SprConfig {
    double sigma_max = 0.01;
    double beta_decay = 1.0;
    long total_steps = 1; // T
    bool enabled = true;

    void validate() const {
        if (!(sigma_max >= 0.0)) throw InvalidConfig("spr.sigma_max must be >= 0");
        if (!(beta_decay > 0.0)) throw InvalidConfig("spr.beta_decay must be > 0");
        if (total_steps < 1) throw InvalidConfig("spr.total_steps must be >= 1");
    }
};

struct OptimConfig {
    double eta = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
    /// The update rule omits Adam's bias correction; this switch turns the
    /// standard correction back on for comparison runs.
    bool bias_correction = false;

    void validate() const {
        if (!(eta > 0.0)) throw InvalidConfig("optim.eta must be > 0");
        if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidConfig("optim.beta1 must be in [0, 1)");
        if (!(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidConfig("optim.beta2 must be in [0, 1)");
        if (!(eps > 0.0)) throw InvalidConfig("optim.eps must be > 0");
    }
};

/// Noise intensity at step t; non-negative, non-increasing, exactly 0 at t = T.
double noise_sigma(long t, const SprConfig& cfg);

/// I.i.d. Gaussian tensor with mean 0 and std sigma. sigma = 0 yields exact
/// zeros without consuming the stream.
Matrix sample_noise(int rows, int cols, double sigma, RngStream& rng);

/// Adam-style optimizer with per-step Gaussian gradient perturbation. The
/// same perturbed gradient feeds both momentum accumulators, and the update
/// applies no bias correction unless configured otherwise. Gradients are
/// expected to be kappa-modulated upstream before step() runs.
class SprAdam {
public:
    SprAdam(const ParamStore& store, OptimConfig ocfg, SprConfig scfg);

    /// One update over every entry of the store. Throws NonFiniteGradient
    /// (naming the parameter) before touching any state.
    void step(ParamStore& store, RngStream& rng);

    long steps_taken() const { return t_; }
    /// Noise std that the next step() call will use.
    double current_sigma() const;

    const Matrix& first_moment(std::size_t i) const { return m_[i]; }
    const Matrix& second_moment(std::size_t i) const { return v_[i]; }

private:
    OptimConfig ocfg_;
    SprConfig scfg_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    long t_ = 0;
};

} // namespace triad
