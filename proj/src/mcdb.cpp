#include "triad/mcdb.hpp"

#include <cmath>
#include <limits>

namespace triad {

std::map<Modality, SimilarityMatrix>
cross_modal_similarity(const FeatureMatrix& f_eeg,
                       const std::map<Modality, const Matrix*>& targets,
                       const BalanceConfig& cfg) {
    cfg.validate();
    if (targets.empty()) {
        throw InvalidConfig("cross_modal_similarity: no target modalities");
    }
    const Matrix& anchor = f_eeg.values;
    const int b = anchor.rows();

    // Raw logits per target modality.
    std::map<Modality, Matrix> logits;
    for (const auto& [m, feat] : targets) {
        if (feat == nullptr || !anchor.same_shape(*feat)) {
            throw ShapeMismatch("cross_modal_similarity: target shape mismatch");
        }
        Matrix z = matmul_nt(anchor, *feat);
        z.scale_in_place(1.0 / cfg.tau);
        logits.emplace(m, std::move(z));
    }

    std::map<Modality, SimilarityMatrix> out;
    for (const auto& [m, z] : logits) {
        SimilarityMatrix s;
        s.anchor = f_eeg.modality;
        s.target = m;
        s.mode = cfg.mode;
        s.values = Matrix(b, b);
        out.emplace(m, std::move(s));
    }

    for (int i = 0; i < b; ++i) {
        if (cfg.mode == SimilarityNorm::JointAcrossModalities) {
            // One softmax over the concatenated candidates of all targets.
            double row_max = -std::numeric_limits<double>::infinity();
            for (const auto& [m, z] : logits) {
                for (int j = 0; j < b; ++j) {
                    row_max = std::max(row_max, z(i, j));
                }
            }
            double denom = 0.0;
            for (const auto& [m, z] : logits) {
                for (int j = 0; j < b; ++j) {
                    denom += std::exp(z(i, j) - row_max);
                }
            }
            for (const auto& [m, z] : logits) {
                Matrix& sv = out.at(m).values;
                for (int j = 0; j < b; ++j) {
                    sv(i, j) = std::exp(z(i, j) - row_max) / denom;
                }
            }
        } else {
            // Independent softmax inside each target modality.
            for (const auto& [m, z] : logits) {
                double row_max = z(i, 0);
                for (int j = 1; j < b; ++j) {
                    row_max = std::max(row_max, z(i, j));
                }
                double denom = 0.0;
                for (int j = 0; j < b; ++j) {
                    denom += std::exp(z(i, j) - row_max);
                }
                Matrix& sv = out.at(m).values;
                for (int j = 0; j < b; ++j) {
                    sv(i, j) = std::exp(z(i, j) - row_max) / denom;
                }
            }
        }
    }
    return out;
}

ContributionVector contribution_vector(const SimilarityMatrix& s) {
    ContributionVector out;
    out.modality = s.target;
    const Matrix sums = col_sums(s.values);
    out.values.assign(sums.flat().begin(), sums.flat().end());
    return out;
}

std::map<Modality, double> imbalance_rate(const std::map<Modality, ContributionVector>& contribs,
                                          const BalanceConfig& cfg) {
    cfg.validate();
    if (contribs.size() < 2) {
        throw InvalidConfig("imbalance_rate: needs at least two target modalities");
    }
    std::map<Modality, double> rho;
    for (const auto& [m, c] : contribs) {
        double others = 0.0;
        for (const auto& [n, cn] : contribs) {
            if (n != m) others += cn.l1();
        }
        rho[m] = c.l1() / (others + cfg.epsilon);
    }
    return rho;
}

double modality_weight(double rho, const BalanceConfig& cfg) {
    cfg.validate();
    if (!(rho > 0.0)) {
        throw InvalidConfig("modality_weight: rho must be > 0");
    }
    if (rho <= 1.0) {
        return 1.0;
    }
    // tanh saturates to 1.0 in double arithmetic around its argument ~ 19;
    // the floor keeps the weight strictly positive as the schedule demands.
    return std::max(1.0 - std::tanh(cfg.gamma * (rho - 1.0)), 1e-12);
}

BalanceOutcome compute_balance(const FeatureMatrix& f_eeg, const Matrix& f_img,
                               const Matrix& f_text, const BalanceConfig& cfg) {
    std::map<Modality, const Matrix*> targets{{Modality::Image, &f_img},
                                              {Modality::Text, &f_text}};
    const auto sims = cross_modal_similarity(f_eeg, targets, cfg);
    std::map<Modality, ContributionVector> contribs;
    for (const auto& [m, s] : sims) {
        contribs.emplace(m, contribution_vector(s));
    }
    BalanceOutcome out;
    out.rho = imbalance_rate(contribs, cfg);
    out.weights.kappa[Modality::Eeg] = 1.0;
    out.weights.kappa[Modality::Image] = modality_weight(out.rho.at(Modality::Image), cfg);
    out.weights.kappa[Modality::Text] = modality_weight(out.rho.at(Modality::Text), cfg);
    return out;
}

void modulate_gradients(ParamStore& store, const ModalityWeights& weights) {
    for (std::size_t i = 0; i < store.count(); ++i) {
        ParamEntry& e = store.entry(i);
        double k = 1.0;
        switch (e.attribution) {
        case Attribution::Eeg:
            // The anchor modality is never down-weighted.
            k = 1.0;
            break;
        case Attribution::Image:
            k = weights.kappa[Modality::Image];
            break;
        case Attribution::Text:
            k = weights.kappa[Modality::Text];
            break;
        case Attribution::Shared:
            k = 1.0;
            break;
        default:
            throw UnknownModalityAttribution("modulate_gradients: bad attribution on " + e.key());
        }
        if (k == 1.0) continue; // keep untouched entries bitwise identical
        e.grad.scale_in_place(k);
    }
}

} // namespace triad
