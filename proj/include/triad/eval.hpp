#pragma once

#include <vector>

#include "triad/data.hpp"
#include "triad/nn.hpp"

namespace triad {

struct EvalOptions {
    /// Weight of the text template in the per-class image/text combination.
    double w_text = 0.5;
    /// Extra k values to report beyond top-1/top-5.
    std::vector<int> ks = {1, 5};

    void validate() const {
        if (!(w_text >= 0.0 && w_text <= 1.0)) {
            throw InvalidConfig("eval.w_text must be in [0, 1]");
        }
        for (int k : ks) {
            if (k < 1) throw InvalidConfig("eval.ks entries must be >= 1");
        }
    }
};

/// One normalized class prototype per unseen class, built from the adapted
/// image and text embeddings.
struct TemplateBank {
    std::vector<int> class_ids; // ascending
    Matrix templates;           // one row per class, normalized
    double w_text = 0.5;

    int num_classes() const { return static_cast<int>(class_ids.size()); }
};

struct EvalReport {
    double top1 = 0.0;
    double top5 = 0.0;
    std::vector<std::pair<int, double>> topk; // (k, accuracy) for every requested k
    std::vector<int> per_class_hits;          // top-1 hits, bank order
    std::vector<int> per_class_counts;
    Matrix confusion; // top-1 counts, row = true class, col = predicted class
    std::vector<int> sample_true_rank; // 0-based rank of the true class, per sample
    std::vector<int> sample_predicted; // top-1 class id, per sample
    int num_samples = 0;
};

/// Per unseen class: template = normalize((1-w_text) * image + w_text * text),
/// with both embeddings passed through the trained adapters. Classes with
/// several exemplars use the normalized mean of their image embeddings.
/// Throws MissingModality when w_text > 0 and the dataset has no text.
TemplateBank build_templates(const SplitData& test_split, bool has_text, const Model& model,
                             double w_text);

/// Rank classes by cosine between each EEG embedding and the templates.
/// Ties break toward the lower class index. top5 uses k = min(5, classes);
/// every k in ks must satisfy k <= classes or KExceedsClasses is thrown.
EvalReport topk_accuracy(const Matrix& eeg_embeddings, const std::vector<int>& labels,
                         const TemplateBank& bank, const std::vector<int>& ks);

/// Embed the split's EEG trials and score them against the bank.
EvalReport evaluate_split(const SplitData& split, bool has_text, const Model& model,
                          const EvalOptions& opts);

void write_eval_report_json(const EvalReport& report, const TemplateBank& bank,
                            const std::string& path);

/// One CSV row per test sample: true class, predicted class, and the rank of
/// the true class. For error analysis outside the tool.
void write_ranking_csv(const EvalReport& report, const std::vector<int>& labels,
                       const std::string& path);

} // namespace triad
