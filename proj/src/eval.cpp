#include "triad/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "triad/features.hpp"

namespace triad {

TemplateBank build_templates(const SplitData& test_split, bool has_text, const Model& model,
                             double w_text) {
    if (!(w_text >= 0.0 && w_text <= 1.0)) {
        throw InvalidConfig("build_templates: w_text must be in [0, 1]");
    }
    if (test_split.count() == 0) {
        throw InvalidConfig("build_templates: empty test split");
    }
    if (w_text > 0.0 && !has_text) {
        throw MissingModality("build_templates: w_text > 0 but the dataset has no text features");
    }
    const bool use_text_templates = w_text > 0.0 && model.config().use_text;

    // Rows per class, ascending class id for a deterministic bank order.
    std::map<int, std::vector<int>> rows_by_class;
    for (int i = 0; i < test_split.count(); ++i) {
        rows_by_class[test_split.labels[static_cast<std::size_t>(i)]].push_back(i);
    }

    const Matrix img_emb = model.embed_image(test_split.image);
    Matrix text_emb;
    if (use_text_templates) {
        text_emb = model.embed_text(test_split.text);
    }

    TemplateBank bank;
    bank.w_text = w_text;
    bank.templates = Matrix(static_cast<int>(rows_by_class.size()), img_emb.cols());
    int out_row = 0;
    for (const auto& [cls, rows] : rows_by_class) {
        bank.class_ids.push_back(cls);

        Matrix img_mean(1, img_emb.cols());
        for (int r : rows) {
            for (int j = 0; j < img_emb.cols(); ++j) {
                img_mean(0, j) += img_emb(r, j);
            }
        }
        img_mean.scale_in_place(1.0 / static_cast<double>(rows.size()));
        img_mean = l2_normalize_rows(img_mean);

        Matrix combined(1, img_emb.cols());
        if (use_text_templates) {
            // All samples of a class share one text feature; the first row works.
            const int r0 = rows.front();
            for (int j = 0; j < img_emb.cols(); ++j) {
                combined(0, j) = (1.0 - w_text) * img_mean(0, j) + w_text * text_emb(r0, j);
            }
        } else {
            combined = img_mean;
        }
        combined = l2_normalize_rows(combined);
        for (int j = 0; j < img_emb.cols(); ++j) {
            bank.templates(out_row, j) = combined(0, j);
        }
        ++out_row;
    }
    return bank;
}

EvalReport topk_accuracy(const Matrix& eeg_embeddings, const std::vector<int>& labels,
                         const TemplateBank& bank, const std::vector<int>& ks) {
    const int n = eeg_embeddings.rows();
    const int c = bank.num_classes();
    if (static_cast<int>(labels.size()) != n) {
        throw ShapeMismatch("topk_accuracy: labels/embedding count mismatch");
    }
    if (eeg_embeddings.cols() != bank.templates.cols()) {
        throw DimensionMismatch("topk_accuracy: embedding dim " +
                                std::to_string(eeg_embeddings.cols()) + " vs template dim " +
                                std::to_string(bank.templates.cols()));
    }
    for (int k : ks) {
        if (k > c) {
            throw KExceedsClasses("topk_accuracy: k = " + std::to_string(k) + " exceeds " +
                                  std::to_string(c) + " classes");
        }
    }

    std::map<int, int> class_index;
    for (int i = 0; i < c; ++i) {
        class_index[bank.class_ids[static_cast<std::size_t>(i)]] = i;
    }

    EvalReport report;
    report.num_samples = n;
    report.per_class_hits.assign(static_cast<std::size_t>(c), 0);
    report.per_class_counts.assign(static_cast<std::size_t>(c), 0);
    report.confusion = Matrix(c, c);
    report.sample_true_rank.reserve(static_cast<std::size_t>(n));
    report.sample_predicted.reserve(static_cast<std::size_t>(n));

    std::vector<int> hits_at(static_cast<std::size_t>(c) + 1, 0); // hits_at[k], 1-based
    const Matrix scores = matmul_nt(eeg_embeddings, bank.templates);

    std::vector<int> order(static_cast<std::size_t>(c));
    for (int i = 0; i < n; ++i) {
        const auto it = class_index.find(labels[static_cast<std::size_t>(i)]);
        if (it == class_index.end()) {
            throw InvalidConfig("topk_accuracy: label " +
                                std::to_string(labels[static_cast<std::size_t>(i)]) +
                                " has no template");
        }
        const int true_idx = it->second;
        report.per_class_counts[static_cast<std::size_t>(true_idx)]++;

        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            const double sa = scores(i, a);
            const double sb = scores(i, b);
            if (sa != sb) return sa > sb;
            return a < b; // deterministic tie-break toward the lower class index
        });

        int rank = c;
        for (int r = 0; r < c; ++r) {
            if (order[static_cast<std::size_t>(r)] == true_idx) {
                rank = r;
                break;
            }
        }
        hits_at[static_cast<std::size_t>(rank) + 1]++;
        if (rank == 0) {
            report.per_class_hits[static_cast<std::size_t>(true_idx)]++;
        }
        report.confusion(true_idx, order[0]) += 1.0;
        report.sample_true_rank.push_back(rank);
        report.sample_predicted.push_back(bank.class_ids[static_cast<std::size_t>(order[0])]);
    }

    // hits within top-k = cumulative hits over ranks.
    std::vector<double> acc_at(static_cast<std::size_t>(c) + 1, 0.0);
    int cum = 0;
    for (int k = 1; k <= c; ++k) {
        cum += hits_at[static_cast<std::size_t>(k)];
        acc_at[static_cast<std::size_t>(k)] = n > 0 ? static_cast<double>(cum) / n : 0.0;
    }

    report.top1 = acc_at[1];
    report.top5 = acc_at[static_cast<std::size_t>(std::min(5, c))];
    for (int k : ks) {
        report.topk.emplace_back(k, acc_at[static_cast<std::size_t>(k)]);
    }
    return report;
}

EvalReport evaluate_split(const SplitData& split, bool has_text, const Model& model,
                          const EvalOptions& opts) {
    opts.validate();
    const double w_text = model.config().use_text && has_text ? opts.w_text : 0.0;
    const TemplateBank bank = build_templates(split, has_text, model, w_text);
    const Matrix emb = model.embed_eeg(split.eeg_flat);
    // The default k list is clamped to the bank size so degenerate class
    // counts still evaluate; explicit k requests go through topk_accuracy's
    // strict check instead.
    std::vector<int> ks;
    for (int k : opts.ks) {
        const int clamped = std::min(k, bank.num_classes());
        if (ks.empty() || ks.back() != clamped) {
            ks.push_back(clamped);
        }
    }
    return topk_accuracy(emb, split.labels, bank, ks);
}

void write_eval_report_json(const EvalReport& report, const TemplateBank& bank,
                            const std::string& path) {
    nlohmann::json doc;
    doc["top1"] = report.top1;
    doc["top5"] = report.top5;
    nlohmann::json topk = nlohmann::json::array();
    for (const auto& [k, acc] : report.topk) {
        topk.push_back({{"k", k}, {"accuracy", acc}});
    }
    doc["topk"] = topk;
    doc["num_samples"] = report.num_samples;
    doc["num_classes"] = bank.num_classes();
    doc["w_text"] = bank.w_text;
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t i = 0; i < report.per_class_hits.size(); ++i) {
        per_class.push_back({{"class", bank.class_ids[i]},
                             {"hits", report.per_class_hits[i]},
                             {"count", report.per_class_counts[i]}});
    }
    doc["per_class_top1"] = per_class;

    std::ofstream os(path);
    if (!os) throw IoError("cannot write eval report: " + path);
    os << doc.dump(2) << "\n";
}

void write_ranking_csv(const EvalReport& report, const std::vector<int>& labels,
                       const std::string& path) {
    if (labels.size() != report.sample_true_rank.size()) {
        throw ShapeMismatch("write_ranking_csv: labels do not match the report");
    }
    std::ofstream os(path);
    if (!os) throw IoError("cannot write ranking csv: " + path);
    os << "sample,true_class,predicted_class,true_rank\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        os << i << ',' << labels[i] << ',' << report.sample_predicted[i] << ','
           << report.sample_true_rank[i] << '\n';
    }
    if (!os) throw IoError("ranking csv write failed: " + path);
}

} // namespace triad
