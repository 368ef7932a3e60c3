#pragma once

#include <string>
#include <vector>

#include "triad/modality.hpp"

namespace triad {

/// Parsed metrics CSV: header names plus numeric rows.
struct MetricsTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int col(const std::string& name) const;
};

MetricsTable read_metrics_csv(const std::string& path);

/// Gradient-balance diagnostics of one training run, computed from its
/// metrics CSV: per-epoch mean pre-modulation gradient norms, per-step
/// |rho - 1| for the two target modalities, and the per-step dominance ratio
/// (largest modality norm over smallest).
struct TrajectorySummary {
    PerModality<std::vector<double>> epoch_mean_grad_pre;
    std::vector<double> imbalance_image; // |rho_image - 1| per step
    std::vector<double> imbalance_text;
    std::vector<double> dominance; // max pre norm / min pre norm per step
    PerModality<double> mean_grad_pre{};
    PerModality<double> mean_grad_post{};
    double mean_abs_imbalance_image = 0.0; // NaN rows excluded; NaN when all are
    double mean_abs_imbalance_text = 0.0;
    double mean_dominance = 0.0;
    int num_steps = 0;
    int num_epochs = 0;
};

TrajectorySummary summarize(const MetricsTable& table);
TrajectorySummary summarize_csv(const std::string& path);

/// Elementwise mean of step-aligned run summaries: seeds play the role that
/// repeated subjects play in a multi-subject average. All runs must have the
/// same step and epoch counts.
TrajectorySummary aggregate_summaries(const std::vector<TrajectorySummary>& runs);

/// Per-modality deltas between two step-aligned runs (b minus a).
struct RunComparison {
    PerModality<double> delta_mean_grad_pre{};
    PerModality<double> delta_mean_grad_post{};
    double delta_mean_abs_imbalance_image = 0.0;
    double delta_mean_abs_imbalance_text = 0.0;
    double delta_mean_dominance = 0.0;
    /// Target modalities whose mean |rho - 1| is strictly smaller in run b.
    std::vector<std::string> imbalance_decreased;
};

RunComparison compare_runs(const TrajectorySummary& a, const TrajectorySummary& b);

void write_summary_json(const TrajectorySummary& s, const std::string& path);
void write_comparison_json(const RunComparison& c, const std::string& path);

} // namespace triad
