#pragma once

#include "triad/features.hpp"
#include "triad/graph.hpp"
#include "triad/param_store.hpp"
#include "triad/rng.hpp"

namespace triad {

struct LinearLayer {
    Matrix w; // in x out
    Matrix b; // 1 x out; empty means no bias

    bool has_bias() const { return !b.empty(); }
};

/// y = x * w (+ bias broadcast over rows).
Matrix linear_forward(const Matrix& x, const LinearLayer& layer);

Matrix relu(Matrix x);

/// Bottleneck adapter refining frozen features: down-project to dim/r, ReLU,
/// up-project, residual-add with fixed scaling alpha. The text variant also
/// carries a bias inside the bottleneck and an output bias added outside the
/// scaled branch.
struct AdapterParams {
    LinearLayer down;  // dim -> dim/r, biased iff has_bias
    LinearLayer up;    // dim/r -> dim, never biased
    Matrix out_bias;   // 1 x dim, present iff has_bias
    double alpha = 0.7;
    int r = 8;
    bool has_bias = false;
};

FeatureMatrix adapter_image_forward(const FeatureMatrix& x, const AdapterParams& p);
FeatureMatrix adapter_text_forward(const FeatureMatrix& x, const AdapterParams& p);

/// Two-layer feedforward encoder over the flattened channels x time input.
struct EegEncoderParams {
    LinearLayer temporal_proj; // (channels * timepoints) -> hidden
    LinearLayer head;          // hidden -> dim
};

/// A batch of EEG trials, flattened row-major (channel-major, time fastest).
struct EegBatch {
    Matrix flat; // B x (channels * timepoints)
    int channels = 0;
    int timepoints = 0;
};

FeatureMatrix eeg_encode(const EegBatch& x, const EegEncoderParams& p);

struct FusionConfig {
    double beta = 0.5;

    void validate() const {
        if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidConfig("fusion beta must be in [0, 1]");
    }
};

/// beta * adapted + (1 - beta) * original.
FeatureMatrix fuse_text_features(const FeatureMatrix& adapted, const FeatureMatrix& original,
                                 const FusionConfig& c);

struct ModelConfig {
    int eeg_channels = 0;
    int eeg_timepoints = 0;
    int hidden = 64;
    int dim = 0; // shared embedding dimension
    int r_text = 16;
    int r_image = 8;
    double alpha_text = 0.7;
    double alpha_image = 0.7;
    double beta_fusion = 0.5;
    bool use_text = true;
    bool use_adapter = true;

    void validate() const;
};

/// Tape node ids of the features a forward pass produces. Ids are -1 when the
/// corresponding path is disabled.
struct ForwardNodes {
    NodeId f_eeg = -1;
    NodeId f_img = -1;
    NodeId f_text = -1;
    NodeId adapted_text = -1; // unnormalized adapter output, for the consistency term
    NodeId raw_text = -1;
};

/// The trainable pieces: EEG encoder plus the two adapters over frozen image
/// and text features. Parameters live in a ParamStore attributed by modality
/// so gradients can be scaled per modality.
class Model {
public:
    explicit Model(ModelConfig cfg);

    const ModelConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    /// Fan-in-scaled uniform init for weights, zeros for biases, drawn from
    /// rng in registration order (row-major within each matrix).
    void init_params(RngStream& rng);

    /// Record the forward pass for one batch. img and text are the frozen
    /// per-sample features; text may be empty when use_text is off.
    ForwardNodes forward(Tape& tape, const Matrix& eeg_flat, const Matrix& img,
                         const Matrix& text);

    /// Value-only embeddings into the shared space (all row-normalized).
    Matrix embed_eeg(const Matrix& eeg_flat) const;
    Matrix embed_image(const Matrix& img) const;
    Matrix embed_text(const Matrix& text) const;

    /// Copies of the current parameters in the shapes the pure ops take.
    EegEncoderParams eeg_encoder_view() const;
    AdapterParams image_adapter_view() const;
    AdapterParams text_adapter_view() const;

private:
    void register_params();

    ModelConfig cfg_;
    ParamStore params_;
};

} // namespace triad
