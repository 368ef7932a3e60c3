#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triad/data.hpp"
#include "triad/eval.hpp"
#include "triad/loss.hpp"
#include "triad/mcdb.hpp"
#include "triad/nn.hpp"
#include "triad/spr.hpp"

namespace triad {

struct ToggleSet {
    bool text_modality = true;
    bool adapter = true;
    bool mcdb = true;
    bool spr = true;

    bool operator==(const ToggleSet&) const = default;
};

struct TrainConfig {
    int epochs = 200;
    int batch_size_train = 1000; // clamped to the train pool
    int batch_size_eval = 400;
    int val_size = 740; // drawn from train data unless the dataset has a val split
    std::uint64_t seed = 0;
    ToggleSet toggles;
    ModelConfig model; // dataset-dependent dims are filled in by train()
    LossConfig loss;
    BalanceConfig balance;
    OptimConfig optim;
    SprConfig spr; // total_steps is derived from epochs * steps-per-epoch
};

/// One optimization step's diagnostics, written as one metrics CSV row.
struct StepRecord {
    int epoch = 0;
    int step = 0;
    long global_step = 0;
    LossReport loss;
    PerModality<double> grad_pre{};  // L2 norms before modulation
    PerModality<double> grad_post{}; // after modulation (equal when MCDB is off)
    double rho_image = 0.0;          // NaN when the text modality is off
    double rho_text = 0.0;
    PerModality<double> kappa{{1.0, 1.0, 1.0}}; // weights actually applied
    double sigma = 0.0;

    bool operator==(const StepRecord&) const = default;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss_mean = 0.0;
    double val_loss = 0.0;
    std::uint64_t perm_digest = 0; // hash of the batch permutation, for order checks

    bool operator==(const EpochRecord&) const = default;
};

struct TrainReport {
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;
    double best_val_loss = 0.0;
    std::vector<int> val_indices; // train rows held out (empty when the dataset has a val split)

    bool operator==(const TrainReport&) const = default;
};

struct TrainOutcome {
    TrainReport report;
    Model model; // parameters of the lowest-validation-loss epoch
};

/// Deterministic training loop: forward, total loss, backward, balance
/// weights + gradient modulation, perturbed Adam step. Keeps the checkpoint
/// with the lowest validation loss. Identical seed and config give a
/// bitwise-identical outcome.
TrainOutcome train(const MultimodalDataset& ds, const TrainConfig& cfg);

/// One recorded batch: forward pass plus the total-loss sub-graph.
struct RecordedLoss {
    NodeId total = -1;
    LossReport report;
    ForwardNodes fwd;
};

/// Record forward + loss for a batch (text may be empty when the model's
/// text path is off). This is exactly what each training step runs.
RecordedLoss record_batch_loss(Tape& tape, Model& model, const Matrix& eeg, const Matrix& img,
                               const Matrix& text, const LossConfig& lc);

/// Per-modality L2 gradient norms over the store.
PerModality<double> gradient_norms(const ParamStore& store);

/// Mean total loss of the model over a split, in eval-sized batches.
double evaluate_loss(Model& model, const SplitData& split, const TrainConfig& cfg);

struct AblationRow {
    std::string label;
    ToggleSet toggles;
    double top1 = 0.0;
    double top5 = 0.0;
};

struct AblationTable {
    std::uint64_t seed = 0;
    std::vector<AblationRow> rows;
};

/// The five-configuration ablation: base, +text, +text+adapter,
/// +text+mcdb+spr, and everything. All rows share the seed so only the
/// module toggles differ.
AblationTable run_ablation(const MultimodalDataset& ds, const TrainConfig& base_cfg,
                           const EvalOptions& eval_opts);

/// One CSV row per optimization step; columns documented in the README.
void write_metrics_csv(const TrainReport& report, const std::string& path);

/// Config echo plus per-epoch losses and the best-epoch pointer.
void write_summary_json(const TrainConfig& cfg, const TrainReport& report,
                        const std::string& checkpoint_file, const std::string& path);

/// Derived sub-stream tags (exposed so tests can reproduce the exact streams).
inline constexpr std::uint64_t kDataStreamTag = 11;
inline constexpr std::uint64_t kInitStreamTag = 12;
inline constexpr std::uint64_t kNoiseStreamTag = 13;

} // namespace triad
