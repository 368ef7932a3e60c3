#pragma once

#include <vector>

#include "triad/matrix.hpp"

namespace triad {

/// A continuous multichannel recording: one row per channel.
struct ContinuousEeg {
    Matrix samples; // channels x time
    double sampling_rate_hz = 1000.0;
};

/// Epoched trials: trials x channels x time with window metadata relative to
/// stimulus onset.
struct EpochedEeg {
    int trials = 0;
    int channels = 0;
    int timepoints = 0;
    double sampling_rate_hz = 0.0;
    double window_start_ms = 0.0;
    double window_end_ms = 0.0;
    std::vector<double> values; // [trial][channel][time]

    double& at(int trial, int channel, int t) {
        return values[(static_cast<std::size_t>(trial) * channels + channel) * timepoints + t];
    }
    double at(int trial, int channel, int t) const {
        return values[(static_cast<std::size_t>(trial) * channels + channel) * timepoints + t];
    }
};

/// Cut one window per onset and subtract, per channel, the mean of the
/// preceding baseline_ms. Onsets are sample indices into the recording.
EpochedEeg epoch_and_baseline(const ContinuousEeg& raw, const std::vector<int>& onset_samples,
                              double window_ms = 1000.0, double baseline_ms = 200.0);

/// Integer-factor decimation after a boxcar average of the same factor.
EpochedEeg downsample(const EpochedEeg& e, double target_hz = 250.0);

/// Channel covariance estimated per timepoint across trials (unbiased, mean
/// removed across trials) and averaged over time.
Matrix estimate_noise_covariance(const EpochedEeg& e);

/// (1 - shrinkage) * cov + shrinkage * diag(cov).
Matrix shrink_covariance(const Matrix& cov, double shrinkage);

/// Symmetric inverse square root of an SPD matrix; throws SingularCovariance
/// when an eigenvalue is not safely positive.
Matrix inverse_sqrt_spd(const Matrix& cov);

/// Apply a channel-space whitening matrix to every trial and timepoint.
EpochedEeg apply_whitening(const EpochedEeg& e, const Matrix& whitener);

/// Multivariate noise normalization: estimate, shrink toward the diagonal,
/// whiten with the inverse square root.
EpochedEeg mvnn(const EpochedEeg& e, double shrinkage = 0.1);

/// Average consecutive groups of `repeats` trials.
EpochedEeg average_repeats(const EpochedEeg& e, int repeats);

} // namespace triad
