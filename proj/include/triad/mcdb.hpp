#pragma once

#include <map>

#include "triad/features.hpp"
#include "triad/param_store.hpp"

namespace triad {

/// How the softmax over EEG-to-target logits is normalized.
///
/// JointAcrossModalities: per EEG anchor, one softmax over the concatenated
/// candidate logits of every target modality, so modalities compete for
/// probability mass and the imbalance rate measures genuine dominance.
///
/// PerRowLiteral: an independent row softmax inside each target modality.
/// With two target modalities this makes every contribution sum equal the
/// batch size, the imbalance rate collapses to B/(B+eps) and the whole
/// mechanism goes inert; it is kept selectable to document that degeneracy.
enum class SimilarityNorm { JointAcrossModalities, PerRowLiteral };

struct BalanceConfig {
    double gamma = 0.7;   // sensitivity of the weight schedule
    double epsilon = 1e-8; // smoothing for the imbalance-rate denominator
    double tau = 0.07;    // shared with the loss temperature
    SimilarityNorm mode = SimilarityNorm::JointAcrossModalities;
    bool enabled = true;

    void validate() const {
        if (!(gamma > 0.0)) throw InvalidConfig("mcdb.gamma must be > 0");
        if (!(epsilon > 0.0)) throw InvalidConfig("mcdb.epsilon must be > 0");
        if (!(tau > 0.0)) throw InvalidConfig("mcdb.tau must be > 0");
    }
};

/// Softmax-normalized EEG-to-target similarities for one target modality.
struct SimilarityMatrix {
    Matrix values; // B x B, entries in [0, 1]
    Modality anchor = Modality::Eeg;
    Modality target = Modality::Image;
    SimilarityNorm mode = SimilarityNorm::JointAcrossModalities;
};

/// Column sums of a similarity matrix: how much each target sample
/// contributes to explaining the EEG anchors.
struct ContributionVector {
    std::vector<double> values; // length B, entries >= 0
    Modality modality = Modality::Image;

    double l1() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
};

/// Per-modality gradient scaling factors; the EEG anchor is pinned to 1.
struct ModalityWeights {
    PerModality<double> kappa{{1.0, 1.0, 1.0}};
};

/// EEG-anchored similarity matrices against each target modality.
/// All feature matrices must be row-normalized with equal shapes.
std::map<Modality, SimilarityMatrix>
cross_modal_similarity(const FeatureMatrix& f_eeg,
                       const std::map<Modality, const Matrix*>& targets,
                       const BalanceConfig& cfg);

ContributionVector contribution_vector(const SimilarityMatrix& s);

/// Modality imbalance rate: this modality's total contribution over the sum
/// of everyone else's (plus epsilon).
std::map<Modality, double> imbalance_rate(const std::map<Modality, ContributionVector>& contribs,
                                          const BalanceConfig& cfg);

/// kappa = 1 - tanh(gamma * (rho - 1)) above rho = 1, else exactly 1.
/// Continuous at 1, strictly decreasing beyond it, always in (0, 1].
double modality_weight(double rho, const BalanceConfig& cfg);

/// Convenience: similarity -> contributions -> rho -> kappa for the standard
/// image+text target set. Returns the weights plus the intermediate rho map.
struct BalanceOutcome {
    ModalityWeights weights;
    std::map<Modality, double> rho;
};

BalanceOutcome compute_balance(const FeatureMatrix& f_eeg, const Matrix& f_img,
                               const Matrix& f_text, const BalanceConfig& cfg);

/// Scale every gradient entry by the kappa of its attribution, in place.
/// Eeg-attributed and shared entries are scaled by exactly 1 (untouched).
void modulate_gradients(ParamStore& store, const ModalityWeights& weights);

} // namespace triad
