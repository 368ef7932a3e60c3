#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triad/matrix.hpp"
#include "triad/modality.hpp"
#include "triad/rng.hpp"

namespace triad {

/// Synthetic tri-modal dataset recipe. Every class gets a latent prototype;
/// image and text features are noisy linear views of it and EEG trials are a
/// squashed channel pattern repeated over time with per-trial noise. Noise
/// scale per modality is 1/snr, so the relative snr values control which
/// modality carries the cleaner signal.
struct SyntheticConfig {
    int n_train_classes = 40;
    int n_test_classes = 10;
    int samples_per_class = 10;
    int latent_dim = 4;
    int eeg_channels = 8;
    int eeg_timepoints = 50;
    int feature_dim = 16;
    PerModality<double> snr{{4.0, 4.0, 4.0}};
    /// Trials moved from the train split into a validation split (clamped to
    /// half the train split). 0 disables the carve-out.
    int val_trials = 740;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One split of samples. EEG trials are flattened row-major with time fastest
/// (column index = channel * timepoints + t).
struct SplitData {
    Matrix eeg_flat; // N x (channels * timepoints)
    Matrix image;    // N x dim
    Matrix text;     // N x dim (rows repeat per class)
    std::vector<int> labels;

    int count() const { return static_cast<int>(labels.size()); }
};

struct MultimodalDataset {
    int eeg_channels = 0;
    int eeg_timepoints = 0;
    int feature_dim = 0;
    std::uint64_t seed = 0;
    bool has_text = true;
    SplitData train;
    SplitData val;
    SplitData test;
    std::vector<int> train_classes;
    std::vector<int> test_classes;
};

/// Deterministic generation: identical config (including seed) gives a
/// bitwise-identical dataset. Train and test class sets are disjoint; all
/// samples of a class share one text feature.
MultimodalDataset generate_synthetic(const SyntheticConfig& cfg);

/// On-disk layout: manifest.json plus little-endian float32 (.f32) and
/// int32 (.i32) row-major binaries per split, shapes recorded in the
/// manifest. Rewriting the same dataset produces byte-identical files.
void save_dataset(const MultimodalDataset& ds, const std::string& dir);
MultimodalDataset load_dataset(const std::string& dir);

} // namespace triad
