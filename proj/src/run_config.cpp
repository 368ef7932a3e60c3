#include "triad/run_config.hpp"

#include <fstream>
#include <initializer_list>

#include <json.hpp>

namespace triad {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw InvalidConfig("config: '" + where + "' must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw InvalidConfig("config: unknown key '" + where + "." + key + "'");
        }
    }
}

template <typename T>
void get_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        out = obj.at(key).get<T>();
    }
}

SimilarityNorm mode_from_string(const std::string& s) {
    if (s == "joint_across_modalities") return SimilarityNorm::JointAcrossModalities;
    if (s == "per_row_literal") return SimilarityNorm::PerRowLiteral;
    throw InvalidConfig("config: mcdb.mode must be 'joint_across_modalities' or "
                        "'per_row_literal', got '" +
                        s + "'");
}

RunConfig from_json(const json& doc) {
    check_keys(doc, "<root>",
               {"data", "model", "train", "loss", "mcdb", "spr", "eval", "dataset_dir",
                "output_dir"});
    RunConfig cfg;

    if (doc.contains("data")) {
        const json& d = doc.at("data");
        check_keys(d, "data",
                   {"n_train_classes", "n_test_classes", "samples_per_class", "latent_dim",
                    "eeg_channels", "eeg_timepoints", "feature_dim", "snr", "val_trials", "seed"});
        get_if(d, "n_train_classes", cfg.data.n_train_classes);
        get_if(d, "n_test_classes", cfg.data.n_test_classes);
        get_if(d, "samples_per_class", cfg.data.samples_per_class);
        get_if(d, "latent_dim", cfg.data.latent_dim);
        get_if(d, "eeg_channels", cfg.data.eeg_channels);
        get_if(d, "eeg_timepoints", cfg.data.eeg_timepoints);
        get_if(d, "feature_dim", cfg.data.feature_dim);
        get_if(d, "val_trials", cfg.data.val_trials);
        get_if(d, "seed", cfg.data.seed);
        if (d.contains("snr")) {
            const json& s = d.at("snr");
            check_keys(s, "data.snr", {"eeg", "image", "text"});
            get_if(s, "eeg", cfg.data.snr[Modality::Eeg]);
            get_if(s, "image", cfg.data.snr[Modality::Image]);
            get_if(s, "text", cfg.data.snr[Modality::Text]);
        }
    }

    if (doc.contains("model")) {
        const json& m = doc.at("model");
        check_keys(m, "model",
                   {"hidden", "r_text", "r_image", "alpha_text", "alpha_image", "beta_fusion"});
        get_if(m, "hidden", cfg.train.model.hidden);
        get_if(m, "r_text", cfg.train.model.r_text);
        get_if(m, "r_image", cfg.train.model.r_image);
        get_if(m, "alpha_text", cfg.train.model.alpha_text);
        get_if(m, "alpha_image", cfg.train.model.alpha_image);
        get_if(m, "beta_fusion", cfg.train.model.beta_fusion);
    }

    if (doc.contains("train")) {
        const json& t = doc.at("train");
        check_keys(t, "train",
                   {"epochs", "batch_size_train", "batch_size_eval", "val_size", "seed", "lr",
                    "beta1", "beta2", "adam_eps", "bias_correction", "toggles"});
        get_if(t, "epochs", cfg.train.epochs);
        get_if(t, "batch_size_train", cfg.train.batch_size_train);
        get_if(t, "batch_size_eval", cfg.train.batch_size_eval);
        get_if(t, "val_size", cfg.train.val_size);
        get_if(t, "seed", cfg.train.seed);
        get_if(t, "lr", cfg.train.optim.eta);
        get_if(t, "beta1", cfg.train.optim.beta1);
        get_if(t, "beta2", cfg.train.optim.beta2);
        get_if(t, "adam_eps", cfg.train.optim.eps);
        get_if(t, "bias_correction", cfg.train.optim.bias_correction);
        if (t.contains("toggles")) {
            const json& g = t.at("toggles");
            check_keys(g, "train.toggles", {"text_modality", "adapter", "mcdb", "spr"});
            get_if(g, "text_modality", cfg.train.toggles.text_modality);
            get_if(g, "adapter", cfg.train.toggles.adapter);
            get_if(g, "mcdb", cfg.train.toggles.mcdb);
            get_if(g, "spr", cfg.train.toggles.spr);
        }
    }

    if (doc.contains("loss")) {
        const json& l = doc.at("loss");
        check_keys(l, "loss", {"tau", "lambda_r"});
        get_if(l, "tau", cfg.train.loss.tau);
        get_if(l, "lambda_r", cfg.train.loss.lambda_r);
    }

    if (doc.contains("mcdb")) {
        const json& m = doc.at("mcdb");
        check_keys(m, "mcdb", {"gamma", "epsilon", "mode"});
        get_if(m, "gamma", cfg.train.balance.gamma);
        get_if(m, "epsilon", cfg.train.balance.epsilon);
        if (m.contains("mode")) {
            cfg.train.balance.mode = mode_from_string(m.at("mode").get<std::string>());
        }
    }

    if (doc.contains("spr")) {
        const json& s = doc.at("spr");
        check_keys(s, "spr", {"sigma_max", "beta_decay"});
        get_if(s, "sigma_max", cfg.train.spr.sigma_max);
        get_if(s, "beta_decay", cfg.train.spr.beta_decay);
    }

    if (doc.contains("eval")) {
        const json& e = doc.at("eval");
        check_keys(e, "eval", {"w_text", "ks"});
        get_if(e, "w_text", cfg.eval.w_text);
        get_if(e, "ks", cfg.eval.ks);
    }

    get_if(doc, "dataset_dir", cfg.dataset_dir);
    get_if(doc, "output_dir", cfg.output_dir);

    cfg.validate();
    return cfg;
}

} // namespace

void RunConfig::validate() const {
    data.validate();
    train.loss.validate();
    train.balance.validate();
    train.optim.validate();
    if (!(train.spr.sigma_max >= 0.0)) throw InvalidConfig("spr.sigma_max must be >= 0");
    if (!(train.spr.beta_decay > 0.0)) throw InvalidConfig("spr.beta_decay must be > 0");
    if (train.epochs < 0) throw InvalidConfig("train.epochs must be >= 0");
    if (train.batch_size_train < 1) throw InvalidConfig("train.batch_size_train must be >= 1");
    if (train.batch_size_eval < 1) throw InvalidConfig("train.batch_size_eval must be >= 1");
    if (train.val_size < 0) throw InvalidConfig("train.val_size must be >= 0");
    eval.validate();
    // Model dims come from the dataset; check what is config-owned.
    if (train.model.hidden <= 0) throw InvalidConfig("model.hidden must be positive");
    if (train.model.r_text <= 0) throw InvalidConfig("model.r_text must be positive");
    if (train.model.r_image <= 0) throw InvalidConfig("model.r_image must be positive");
    if (train.toggles.adapter) {
        if (data.feature_dim % train.model.r_image != 0) {
            throw InvalidConfig("data.feature_dim must be divisible by model.r_image");
        }
        if (train.toggles.text_modality && data.feature_dim % train.model.r_text != 0) {
            throw InvalidConfig("data.feature_dim must be divisible by model.r_text");
        }
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidConfig("cannot open config file: " + path);
    json doc;
    try {
        is >> doc;
    } catch (const json::exception& e) {
        throw InvalidConfig("config is not valid JSON (" + path + "): " + e.what());
    }
    return from_json(doc);
}

RunConfig parse_run_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
    }
    return from_json(doc);
}

} // namespace triad
