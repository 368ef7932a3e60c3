#include "triad/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "triad/num_format.hpp"

namespace triad {

namespace {

Matrix gather_rows(const Matrix& src, const std::vector<int>& pool,
                   const std::vector<int>& order, int begin, int end) {
    Matrix out(end - begin, src.cols());
    for (int r = begin; r < end; ++r) {
        const int i = pool[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
        for (int j = 0; j < src.cols(); ++j) {
            out(r - begin, j) = src(i, j);
        }
    }
    return out;
}

Matrix slice_rows(const Matrix& src, int begin, int end) {
    Matrix out(end - begin, src.cols());
    for (int r = begin; r < end; ++r) {
        for (int j = 0; j < src.cols(); ++j) {
            out(r - begin, j) = src(r, j);
        }
    }
    return out;
}

std::uint64_t fnv1a_ints(const std::vector<int>& v) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (int x : v) {
        for (int b = 0; b < 4; ++b) {
            h ^= static_cast<std::uint64_t>((static_cast<std::uint32_t>(x) >> (8 * b)) & 0xff);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

} // namespace

/// Record the loss sub-graph for an already-recorded forward pass and read
/// back the per-term values.
static RecordedLoss record_loss(Tape& tape, const ForwardNodes& fwd, const ModelConfig& mc,
                                const LossConfig& lc) {
    RecordedLoss out;
    out.fwd = fwd;
    const NodeId ce_ei = tape.info_nce(fwd.f_eeg, fwd.f_img, lc.tau);
    const NodeId ce_ie = tape.info_nce(fwd.f_img, fwd.f_eeg, lc.tau);
    if (mc.use_text) {
        const NodeId ce_et = tape.info_nce(fwd.f_eeg, fwd.f_text, lc.tau);
        const NodeId ce_te = tape.info_nce(fwd.f_text, fwd.f_eeg, lc.tau);
        const NodeId cos_it = tape.cosine_distance(fwd.f_img, fwd.f_text);
        std::vector<NodeId> terms{ce_ei, ce_ie, ce_et, ce_te, cos_it};
        std::vector<double> weights(5, 0.2);
        double consistency = 0.0;
        if (mc.use_adapter && lc.lambda_r > 0.0) {
            const NodeId lr = tape.cosine_distance(fwd.adapted_text, fwd.raw_text);
            terms.push_back(lr);
            weights.push_back(lc.lambda_r);
            consistency = tape.scalar_value(lr);
        } else if (mc.use_adapter) {
            // Report the value even when its weight is zero.
            const NodeId lr = tape.cosine_distance(fwd.adapted_text, fwd.raw_text);
            consistency = tape.scalar_value(lr);
        }
        out.total = tape.weighted_sum(terms, weights);
        out.report = combine_loss_report(tape.scalar_value(ce_ei), tape.scalar_value(ce_ie),
                                         tape.scalar_value(ce_et), tape.scalar_value(ce_te),
                                         tape.scalar_value(cos_it), consistency,
                                         /*text_active=*/true,
                                         mc.use_adapter ? lc.lambda_r : 0.0);
    } else {
        out.total = tape.weighted_sum({ce_ei, ce_ie}, {0.5, 0.5});
        out.report = combine_loss_report(tape.scalar_value(ce_ei), tape.scalar_value(ce_ie), 0.0,
                                         0.0, 0.0, 0.0, /*text_active=*/false, 0.0);
    }
    return out;
}

RecordedLoss record_batch_loss(Tape& tape, Model& model, const Matrix& eeg, const Matrix& img,
                               const Matrix& text, const LossConfig& lc) {
    const ForwardNodes fwd = model.forward(tape, eeg, img, text);
    return record_loss(tape, fwd, model.config(), lc);
}

namespace {

void check_finite_loss(const RecordedLoss& nodes, int epoch, int step, const char* phase) {
    if (!std::isfinite(nodes.report.total)) {
        throw NonFiniteLoss("non-finite " + std::string(phase) + " loss at epoch " +
                            std::to_string(epoch) + " step " + std::to_string(step));
    }
}

} // namespace

PerModality<double> gradient_norms(const ParamStore& store) {
    PerModality<double> out;
    out[Modality::Eeg] = store.grad_norm(Attribution::Eeg);
    out[Modality::Image] = store.grad_norm(Attribution::Image);
    out[Modality::Text] = store.grad_norm(Attribution::Text);
    return out;
}

double evaluate_loss(Model& model, const SplitData& split, const TrainConfig& cfg) {
    if (split.count() == 0) {
        throw InvalidConfig("evaluate_loss: empty split");
    }
    const int bs = std::max(1, std::min(cfg.batch_size_eval, split.count()));
    double acc = 0.0;
    for (int begin = 0; begin < split.count(); begin += bs) {
        const int end = std::min(begin + bs, split.count());
        Tape tape;
        const RecordedLoss nodes = record_batch_loss(
            tape, model, slice_rows(split.eeg_flat, begin, end),
            slice_rows(split.image, begin, end),
            model.config().use_text ? slice_rows(split.text, begin, end) : Matrix(), cfg.loss);
        acc += nodes.report.total * (end - begin);
    }
    return acc / split.count();
}

TrainOutcome train(const MultimodalDataset& ds, const TrainConfig& cfg) {
    if (cfg.epochs < 0) throw InvalidConfig("train.epochs must be >= 0");
    if (cfg.batch_size_train < 1) throw InvalidConfig("train.batch_size_train must be >= 1");
    if (cfg.batch_size_eval < 1) throw InvalidConfig("train.batch_size_eval must be >= 1");
    cfg.loss.validate();
    cfg.optim.validate();
    if (ds.train.count() == 0) throw InvalidConfig("train: dataset has no train split");
    if (cfg.toggles.text_modality && !ds.has_text) {
        throw InvalidConfig("train: text modality enabled but the dataset has no text features");
    }
    if (cfg.toggles.mcdb && !cfg.toggles.text_modality) {
        throw InvalidConfig("train: mcdb needs the text modality (two target modalities)");
    }

    ModelConfig mc = cfg.model;
    mc.eeg_channels = ds.eeg_channels;
    mc.eeg_timepoints = ds.eeg_timepoints;
    mc.dim = ds.feature_dim;
    mc.use_text = cfg.toggles.text_modality;
    mc.use_adapter = cfg.toggles.adapter;

    const RngStream master(cfg.seed);
    RngStream data_rng = master.split(kDataStreamTag);
    RngStream init_rng = master.split(kInitStreamTag);
    RngStream noise_rng = master.split(kNoiseStreamTag);

    Model model(mc);
    model.init_params(init_rng);

    TrainReport report;

    // Validation material: an explicit val split wins; otherwise hold out
    // val_size train rows (clamped to half the train split), drawn once.
    std::vector<int> pool;
    const SplitData* val_split = nullptr;
    SplitData held_out;
    if (ds.val.count() > 0) {
        pool.resize(static_cast<std::size_t>(ds.train.count()));
        for (int i = 0; i < ds.train.count(); ++i) pool[static_cast<std::size_t>(i)] = i;
        val_split = &ds.val;
    } else {
        const int val_n = std::min(cfg.val_size, ds.train.count() / 2);
        if (val_n < 1 && cfg.epochs > 0) {
            throw InvalidConfig("train: no validation material (val_size too small)");
        }
        std::vector<int> perm = data_rng.permutation(ds.train.count());
        std::vector<int> val_idx(perm.begin(), perm.begin() + val_n);
        std::sort(val_idx.begin(), val_idx.end());
        report.val_indices = val_idx;
        std::vector<bool> is_val(static_cast<std::size_t>(ds.train.count()), false);
        for (int i : val_idx) is_val[static_cast<std::size_t>(i)] = true;
        for (int i = 0; i < ds.train.count(); ++i) {
            if (!is_val[static_cast<std::size_t>(i)]) pool.push_back(i);
        }
        held_out.eeg_flat = Matrix(val_n, ds.train.eeg_flat.cols());
        held_out.image = Matrix(val_n, ds.train.image.cols());
        if (ds.has_text) held_out.text = Matrix(val_n, ds.train.text.cols());
        held_out.labels.resize(static_cast<std::size_t>(val_n));
        for (int r = 0; r < val_n; ++r) {
            const int i = val_idx[static_cast<std::size_t>(r)];
            for (int j = 0; j < held_out.eeg_flat.cols(); ++j) {
                held_out.eeg_flat(r, j) = ds.train.eeg_flat(i, j);
            }
            for (int j = 0; j < held_out.image.cols(); ++j) {
                held_out.image(r, j) = ds.train.image(i, j);
            }
            if (ds.has_text) {
                for (int j = 0; j < held_out.text.cols(); ++j) {
                    held_out.text(r, j) = ds.train.text(i, j);
                }
            }
            held_out.labels[static_cast<std::size_t>(r)] =
                ds.train.labels[static_cast<std::size_t>(i)];
        }
        val_split = &held_out;
    }

    const int pool_n = static_cast<int>(pool.size());
    if (pool_n == 0 && cfg.epochs > 0) {
        throw InvalidConfig("train: validation holdout consumed the whole train split");
    }
    const int bs = std::max(1, std::min(cfg.batch_size_train, pool_n));
    const int steps_per_epoch = cfg.epochs > 0 ? (pool_n + bs - 1) / bs : 0;

    SprConfig spr_cfg = cfg.spr;
    spr_cfg.enabled = cfg.toggles.spr;
    spr_cfg.total_steps = std::max(1L, static_cast<long>(cfg.epochs) * steps_per_epoch);

    BalanceConfig balance_cfg = cfg.balance;
    balance_cfg.enabled = cfg.toggles.mcdb;
    balance_cfg.tau = cfg.loss.tau; // shared temperature

    SprAdam optimizer(model.params(), cfg.optim, spr_cfg);

    Model best = model;
    report.best_epoch = -1;
    report.best_val_loss = std::numeric_limits<double>::infinity();

    long global_step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<int> order = data_rng.permutation(pool_n);

        EpochRecord erec;
        erec.epoch = epoch;
        erec.perm_digest = fnv1a_ints(order);

        double train_loss_acc = 0.0;
        int step = 0;
        for (int begin = 0; begin < pool_n; begin += bs, ++step) {
            const int end = std::min(begin + bs, pool_n);

            const Matrix eeg = gather_rows(ds.train.eeg_flat, pool, order, begin, end);
            const Matrix img = gather_rows(ds.train.image, pool, order, begin, end);
            const Matrix txt =
                mc.use_text ? gather_rows(ds.train.text, pool, order, begin, end) : Matrix();

            model.params().zero_grads();
            Tape tape;
            RecordedLoss nodes;
            try {
                nodes = record_batch_loss(tape, model, eeg, img, txt, cfg.loss);
            } catch (const ZeroRowNorm& e) {
                // A numerically blown-up forward pass surfaces here.
                throw NonFiniteLoss("training loss failure at epoch " + std::to_string(epoch) +
                                    " step " + std::to_string(step) + ": " + e.what());
            } catch (const NonFiniteInput& e) {
                throw NonFiniteLoss("training loss failure at epoch " + std::to_string(epoch) +
                                    " step " + std::to_string(step) + ": " + e.what());
            }
            const ForwardNodes& fwd = nodes.fwd;
            check_finite_loss(nodes, epoch, step, "training");
            tape.backward(nodes.total);

            StepRecord rec;
            rec.epoch = epoch;
            rec.step = step;
            rec.global_step = global_step;
            rec.loss = nodes.report;
            rec.grad_pre = gradient_norms(model.params());

            if (mc.use_text) {
                FeatureMatrix f_eeg{tape.value(fwd.f_eeg), Modality::Eeg, true};
                const BalanceOutcome balance = compute_balance(
                    f_eeg, tape.value(fwd.f_img), tape.value(fwd.f_text), balance_cfg);
                rec.rho_image = balance.rho.at(Modality::Image);
                rec.rho_text = balance.rho.at(Modality::Text);
                if (balance_cfg.enabled) {
                    modulate_gradients(model.params(), balance.weights);
                    rec.kappa = balance.weights.kappa;
                }
            } else {
                rec.rho_image = std::numeric_limits<double>::quiet_NaN();
                rec.rho_text = std::numeric_limits<double>::quiet_NaN();
            }
            rec.grad_post = gradient_norms(model.params());

            rec.sigma = optimizer.current_sigma();
            optimizer.step(model.params(), noise_rng);

            train_loss_acc += rec.loss.total * (end - begin);
            report.steps.push_back(std::move(rec));
            ++global_step;
        }

        erec.train_loss_mean = train_loss_acc / pool_n;
        erec.val_loss = evaluate_loss(model, *val_split, cfg);
        if (!std::isfinite(erec.val_loss)) {
            throw NonFiniteLoss("non-finite validation loss after epoch " + std::to_string(epoch));
        }
        if (erec.val_loss < report.best_val_loss) {
            report.best_val_loss = erec.val_loss;
            report.best_epoch = epoch;
            best = model;
        }
        report.epochs.push_back(erec);
    }

    if (cfg.epochs == 0) {
        best = model; // checkpoint is the initialization
        report.best_val_loss = std::numeric_limits<double>::quiet_NaN();
    }

    return TrainOutcome{std::move(report), std::move(best)};
}

AblationTable run_ablation(const MultimodalDataset& ds, const TrainConfig& base_cfg,
                           const EvalOptions& eval_opts) {
    // The five configuration rows: base, +text, +text+adapter,
    // +text+mcdb+spr (no adapter), and everything.
    const std::vector<std::pair<std::string, ToggleSet>> rows = {
        {"base", {false, false, false, false}},
        {"base+text", {true, false, false, false}},
        {"base+text+adapter", {true, true, false, false}},
        {"base+text+mcdb+spr", {true, false, true, true}},
        {"base+text+adapter+mcdb+spr", {true, true, true, true}},
    };

    AblationTable table;
    table.seed = base_cfg.seed;
    for (const auto& [label, toggles] : rows) {
        TrainConfig cfg = base_cfg;
        cfg.toggles = toggles;
        TrainOutcome outcome = train(ds, cfg);
        const EvalReport ev = evaluate_split(ds.test, ds.has_text, outcome.model, eval_opts);
        table.rows.push_back(AblationRow{label, toggles, ev.top1, ev.top5});
    }
    return table;
}

void write_metrics_csv(const TrainReport& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write metrics csv: " + path);
    os << "epoch,step,global_step,loss_total,ce_eeg_img,ce_img_eeg,ce_eeg_text,ce_text_eeg,"
          "cos_img_text,adapter_consistency,grad_pre_eeg,grad_pre_image,grad_pre_text,"
          "grad_post_eeg,grad_post_image,grad_post_text,rho_image,rho_text,kappa_eeg,"
          "kappa_image,kappa_text,sigma\n";
    for (const StepRecord& r : report.steps) {
        os << r.epoch << ',' << r.step << ',' << r.global_step << ',' << fmt_double(r.loss.total)
           << ',' << fmt_double(r.loss.ce_eeg_img) << ',' << fmt_double(r.loss.ce_img_eeg) << ','
           << fmt_double(r.loss.ce_eeg_text) << ',' << fmt_double(r.loss.ce_text_eeg) << ','
           << fmt_double(r.loss.cos_img_text) << ',' << fmt_double(r.loss.adapter_consistency)
           << ',' << fmt_double(r.grad_pre[Modality::Eeg]) << ','
           << fmt_double(r.grad_pre[Modality::Image]) << ','
           << fmt_double(r.grad_pre[Modality::Text]) << ','
           << fmt_double(r.grad_post[Modality::Eeg]) << ','
           << fmt_double(r.grad_post[Modality::Image]) << ','
           << fmt_double(r.grad_post[Modality::Text]) << ',' << fmt_double(r.rho_image) << ','
           << fmt_double(r.rho_text) << ',' << fmt_double(r.kappa[Modality::Eeg]) << ','
           << fmt_double(r.kappa[Modality::Image]) << ',' << fmt_double(r.kappa[Modality::Text])
           << ',' << fmt_double(r.sigma) << '\n';
    }
    if (!os) throw IoError("metrics csv write failed: " + path);
}

void write_summary_json(const TrainConfig& cfg, const TrainReport& report,
                        const std::string& checkpoint_file, const std::string& path) {
    nlohmann::json doc;
    doc["config"] = {
        {"epochs", cfg.epochs},
        {"batch_size_train", cfg.batch_size_train},
        {"batch_size_eval", cfg.batch_size_eval},
        {"val_size", cfg.val_size},
        {"seed", cfg.seed},
        {"toggles",
         {{"text_modality", cfg.toggles.text_modality},
          {"adapter", cfg.toggles.adapter},
          {"mcdb", cfg.toggles.mcdb},
          {"spr", cfg.toggles.spr}}},
        {"lr", cfg.optim.eta},
        {"beta1", cfg.optim.beta1},
        {"beta2", cfg.optim.beta2},
        {"tau", cfg.loss.tau},
        {"lambda_r", cfg.loss.lambda_r},
        {"gamma", cfg.balance.gamma},
        {"sigma_max", cfg.spr.sigma_max},
        {"beta_decay", cfg.spr.beta_decay},
    };
    doc["best_epoch"] = report.best_epoch;
    doc["best_val_loss"] = report.best_val_loss;
    std::vector<double> val_losses, train_losses;
    for (const EpochRecord& e : report.epochs) {
        val_losses.push_back(e.val_loss);
        train_losses.push_back(e.train_loss_mean);
    }
    doc["val_loss_per_epoch"] = val_losses;
    doc["train_loss_per_epoch"] = train_losses;
    doc["steps"] = report.steps.size();
    doc["checkpoint"] = checkpoint_file;

    std::ofstream os(path);
    if (!os) throw IoError("cannot write summary: " + path);
    os << doc.dump(2) << "\n";
}

} // namespace triad
