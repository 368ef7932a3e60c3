#include "triad/eeg_preprocess.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace triad {

EpochedEeg epoch_and_baseline(const ContinuousEeg& raw, const std::vector<int>& onset_samples,
                              double window_ms, double baseline_ms) {
    if (window_ms <= 0.0 || baseline_ms <= 0.0) {
        throw InvalidConfig("epoch_and_baseline: window and baseline must be positive");
    }
    const int window = static_cast<int>(std::lround(window_ms * raw.sampling_rate_hz / 1000.0));
    const int baseline = static_cast<int>(std::lround(baseline_ms * raw.sampling_rate_hz / 1000.0));
    if (window < 1 || baseline < 1) {
        throw InvalidConfig("epoch_and_baseline: window or baseline shorter than one sample");
    }

    EpochedEeg out;
    out.trials = static_cast<int>(onset_samples.size());
    out.channels = raw.samples.rows();
    out.timepoints = window;
    out.sampling_rate_hz = raw.sampling_rate_hz;
    out.window_start_ms = 0.0;
    out.window_end_ms = window_ms;
    out.values.assign(static_cast<std::size_t>(out.trials) * out.channels * out.timepoints, 0.0);

    for (int tr = 0; tr < out.trials; ++tr) {
        const int onset = onset_samples[static_cast<std::size_t>(tr)];
        if (onset - baseline < 0 || onset + window > raw.samples.cols()) {
            throw OnsetOutOfBounds("onset " + std::to_string(onset) + " lacks " +
                                   std::to_string(baseline) + " samples of history or " +
                                   std::to_string(window) + " of future");
        }
        for (int ch = 0; ch < out.channels; ++ch) {
            double mean = 0.0;
            for (int t = onset - baseline; t < onset; ++t) {
                mean += raw.samples(ch, t);
            }
            mean /= baseline;
            for (int t = 0; t < window; ++t) {
                out.at(tr, ch, t) = raw.samples(ch, onset + t) - mean;
            }
        }
    }
    return out;
}

EpochedEeg downsample(const EpochedEeg& e, double target_hz) {
    if (!(target_hz > 0.0)) {
        throw InvalidConfig("downsample: target rate must be positive");
    }
    const double ratio = e.sampling_rate_hz / target_hz;
    const int factor = static_cast<int>(std::lround(ratio));
    if (factor < 1 || std::fabs(ratio - factor) > 1e-9) {
        throw NonIntegerFactor("downsample: " + std::to_string(e.sampling_rate_hz) + " Hz to " +
                               std::to_string(target_hz) + " Hz is not an integer factor");
    }
    EpochedEeg out;
    out.trials = e.trials;
    out.channels = e.channels;
    out.timepoints = e.timepoints / factor;
    out.sampling_rate_hz = target_hz;
    out.window_start_ms = e.window_start_ms;
    out.window_end_ms = e.window_end_ms;
    out.values.assign(static_cast<std::size_t>(out.trials) * out.channels * out.timepoints, 0.0);
    for (int tr = 0; tr < out.trials; ++tr) {
        for (int ch = 0; ch < out.channels; ++ch) {
            for (int t = 0; t < out.timepoints; ++t) {
                double acc = 0.0;
                for (int k = 0; k < factor; ++k) {
                    acc += e.at(tr, ch, t * factor + k);
                }
                out.at(tr, ch, t) = acc / factor;
            }
        }
    }
    return out;
}

Matrix estimate_noise_covariance(const EpochedEeg& e) {
    if (e.trials < 2) {
        throw InvalidConfig("estimate_noise_covariance: needs at least 2 trials");
    }
    const int c = e.channels;
    Matrix cov(c, c);
    std::vector<double> mean(static_cast<std::size_t>(c));
    for (int t = 0; t < e.timepoints; ++t) {
        for (int ch = 0; ch < c; ++ch) {
            double m = 0.0;
            for (int tr = 0; tr < e.trials; ++tr) {
                m += e.at(tr, ch, t);
            }
            mean[static_cast<std::size_t>(ch)] = m / e.trials;
        }
        for (int tr = 0; tr < e.trials; ++tr) {
            for (int c1 = 0; c1 < c; ++c1) {
                const double d1 = e.at(tr, c1, t) - mean[static_cast<std::size_t>(c1)];
                for (int c2 = 0; c2 < c; ++c2) {
                    const double d2 = e.at(tr, c2, t) - mean[static_cast<std::size_t>(c2)];
                    cov(c1, c2) += d1 * d2;
                }
            }
        }
    }
    cov.scale_in_place(1.0 / (static_cast<double>(e.timepoints) * (e.trials - 1)));
    return cov;
}

Matrix shrink_covariance(const Matrix& cov, double shrinkage) {
    if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) {
        throw InvalidConfig("shrink_covariance: shrinkage must be in [0, 1]");
    }
    Matrix out = cov;
    for (int i = 0; i < out.rows(); ++i) {
        for (int j = 0; j < out.cols(); ++j) {
            if (i != j) out(i, j) *= (1.0 - shrinkage);
        }
    }
    return out;
}

Matrix inverse_sqrt_spd(const Matrix& cov) {
    const int n = cov.rows();
    if (n != cov.cols()) {
        throw ShapeMismatch("inverse_sqrt_spd: matrix must be square");
    }
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = cov(i, j);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) {
        throw SingularCovariance("inverse_sqrt_spd: eigendecomposition failed");
    }
    const Eigen::VectorXd evals = solver.eigenvalues();
    const double tol = 1e-12 * std::max(1.0, evals.cwiseAbs().maxCoeff());
    Eigen::VectorXd inv_sqrt(n);
    for (int i = 0; i < n; ++i) {
        if (evals(i) <= tol) {
            throw SingularCovariance(
                "inverse_sqrt_spd: covariance is singular (eigenvalue " +
                std::to_string(evals(i)) + "); increase shrinkage");
        }
        inv_sqrt(i) = 1.0 / std::sqrt(evals(i));
    }
    const Eigen::MatrixXd w =
        solver.eigenvectors() * inv_sqrt.asDiagonal() * solver.eigenvectors().transpose();
    Matrix out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out(i, j) = w(i, j);
        }
    }
    return out;
}

EpochedEeg apply_whitening(const EpochedEeg& e, const Matrix& whitener) {
    if (whitener.rows() != e.channels || whitener.cols() != e.channels) {
        throw ShapeMismatch("apply_whitening: whitener must be channels x channels");
    }
    EpochedEeg out = e;
    std::vector<double> x(static_cast<std::size_t>(e.channels));
    for (int tr = 0; tr < e.trials; ++tr) {
        for (int t = 0; t < e.timepoints; ++t) {
            for (int ch = 0; ch < e.channels; ++ch) {
                x[static_cast<std::size_t>(ch)] = e.at(tr, ch, t);
            }
            for (int c1 = 0; c1 < e.channels; ++c1) {
                double acc = 0.0;
                for (int c2 = 0; c2 < e.channels; ++c2) {
                    acc += whitener(c1, c2) * x[static_cast<std::size_t>(c2)];
                }
                out.at(tr, c1, t) = acc;
            }
        }
    }
    return out;
}

EpochedEeg mvnn(const EpochedEeg& e, double shrinkage) {
    const Matrix cov = shrink_covariance(estimate_noise_covariance(e), shrinkage);
    return apply_whitening(e, inverse_sqrt_spd(cov));
}

EpochedEeg average_repeats(const EpochedEeg& e, int repeats) {
    if (repeats < 1) {
        throw InvalidConfig("average_repeats: repeats must be >= 1");
    }
    if (e.trials % repeats != 0) {
        throw IndivisibleTrialCount("average_repeats: " + std::to_string(e.trials) +
                                    " trials not divisible by " + std::to_string(repeats));
    }
    EpochedEeg out = e;
    out.trials = e.trials / repeats;
    out.values.assign(static_cast<std::size_t>(out.trials) * e.channels * e.timepoints, 0.0);
    for (int g = 0; g < out.trials; ++g) {
        for (int ch = 0; ch < e.channels; ++ch) {
            for (int t = 0; t < e.timepoints; ++t) {
                double acc = 0.0;
                for (int k = 0; k < repeats; ++k) {
                    acc += e.at(g * repeats + k, ch, t);
                }
                out.at(g, ch, t) = acc / repeats;
            }
        }
    }
    return out;
}

} // namespace triad
