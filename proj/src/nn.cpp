#include "triad/nn.hpp"

#include <cmath>

namespace triad {

Matrix linear_forward(const Matrix& x, const LinearLayer& layer) {
    if (x.cols() != layer.w.rows()) {
        throw ShapeMismatch("linear_forward: input cols != weight rows");
    }
    Matrix out = matmul(x, layer.w);
    if (layer.has_bias()) {
        if (layer.b.rows() != 1 || layer.b.cols() != out.cols()) {
            throw ShapeMismatch("linear_forward: bias must be 1 x out");
        }
        for (int i = 0; i < out.rows(); ++i) {
            for (int j = 0; j < out.cols(); ++j) {
                out(i, j) += layer.b(0, j);
            }
        }
    }
    return out;
}

Matrix relu(Matrix x) {
    for (double& v : x.flat()) {
        if (v < 0.0) v = 0.0;
    }
    return x;
}

namespace {

void check_adapter(const FeatureMatrix& x, const AdapterParams& p, bool want_bias,
                   const char* who) {
    if (p.has_bias != want_bias) {
        throw InvalidConfig(std::string(who) + ": has_bias flag does not match the variant");
    }
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) {
        throw InvalidConfig(std::string(who) + ": alpha must be in (0, 1)");
    }
    if (x.values.cols() != p.down.w.rows()) {
        throw ShapeMismatch(std::string(who) + ": feature dim != adapter input dim");
    }
}

} // namespace

FeatureMatrix adapter_image_forward(const FeatureMatrix& x, const AdapterParams& p) {
    check_adapter(x, p, /*want_bias=*/false, "adapter_image_forward");
    const Matrix up = linear_forward(relu(linear_forward(x.values, p.down)), p.up);
    FeatureMatrix out;
    out.modality = x.modality;
    out.values = x.values;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values.flat()[i] += p.alpha * up.flat()[i];
    }
    return out;
}

FeatureMatrix adapter_text_forward(const FeatureMatrix& x, const AdapterParams& p) {
    check_adapter(x, p, /*want_bias=*/true, "adapter_text_forward");
    const Matrix up = linear_forward(relu(linear_forward(x.values, p.down)), p.up);
    FeatureMatrix out;
    out.modality = x.modality;
    out.values = x.values;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values.flat()[i] += p.alpha * up.flat()[i];
    }
    // The output bias sits outside the scaled branch.
    for (int i = 0; i < out.values.rows(); ++i) {
        for (int j = 0; j < out.values.cols(); ++j) {
            out.values(i, j) += p.out_bias(0, j);
        }
    }
    return out;
}

FeatureMatrix eeg_encode(const EegBatch& x, const EegEncoderParams& p) {
    if (x.flat.cols() != x.channels * x.timepoints) {
        throw ShapeMismatch("eeg_encode: flat width != channels * timepoints");
    }
    if (!x.flat.all_finite()) {
        throw NonFiniteInput("eeg_encode: non-finite input");
    }
    FeatureMatrix out;
    out.modality = Modality::Eeg;
    out.values = linear_forward(relu(linear_forward(x.flat, p.temporal_proj)), p.head);
    return out;
}

FeatureMatrix fuse_text_features(const FeatureMatrix& adapted, const FeatureMatrix& original,
                                 const FusionConfig& c) {
    c.validate();
    if (!adapted.values.same_shape(original.values)) {
        throw ShapeMismatch("fuse_text_features: shapes differ");
    }
    FeatureMatrix out;
    out.modality = Modality::Text;
    out.values = Matrix(adapted.values.rows(), adapted.values.cols());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values.flat()[i] =
            c.beta * adapted.values.flat()[i] + (1.0 - c.beta) * original.values.flat()[i];
    }
    return out;
}

void ModelConfig::validate() const {
    if (eeg_channels <= 0 || eeg_timepoints <= 0) {
        throw InvalidConfig("model: eeg_channels and eeg_timepoints must be positive");
    }
    if (hidden <= 0) throw InvalidConfig("model: hidden must be positive");
    if (dim <= 0) throw InvalidConfig("model: dim must be positive");
    if (use_adapter) {
        if (r_image <= 0 || dim % r_image != 0) {
            throw InvalidConfig("model: dim must be divisible by r_image");
        }
        if (!(alpha_image > 0.0 && alpha_image < 1.0)) {
            throw InvalidConfig("model: alpha_image must be in (0, 1)");
        }
        if (use_text) {
            if (r_text <= 0 || dim % r_text != 0) {
                throw InvalidConfig("model: dim must be divisible by r_text");
            }
            if (!(alpha_text > 0.0 && alpha_text < 1.0)) {
                throw InvalidConfig("model: alpha_text must be in (0, 1)");
            }
        }
    }
    if (use_text && !(beta_fusion >= 0.0 && beta_fusion <= 1.0)) {
        throw InvalidConfig("model: beta_fusion must be in [0, 1]");
    }
}

Model::Model(ModelConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    register_params();
}

void Model::register_params() {
    const int in = cfg_.eeg_channels * cfg_.eeg_timepoints;
    params_.add("eeg_encoder", "proj_w", Attribution::Eeg, Matrix(in, cfg_.hidden));
    params_.add("eeg_encoder", "proj_b", Attribution::Eeg, Matrix(1, cfg_.hidden));
    params_.add("eeg_encoder", "head_w", Attribution::Eeg, Matrix(cfg_.hidden, cfg_.dim));
    params_.add("eeg_encoder", "head_b", Attribution::Eeg, Matrix(1, cfg_.dim));
    if (cfg_.use_adapter) {
        const int k_img = cfg_.dim / cfg_.r_image;
        params_.add("image_adapter", "down_w", Attribution::Image, Matrix(cfg_.dim, k_img));
        params_.add("image_adapter", "up_w", Attribution::Image, Matrix(k_img, cfg_.dim));
        if (cfg_.use_text) {
            const int k_txt = cfg_.dim / cfg_.r_text;
            params_.add("text_adapter", "down_w", Attribution::Text, Matrix(cfg_.dim, k_txt));
            params_.add("text_adapter", "down_b", Attribution::Text, Matrix(1, k_txt));
            params_.add("text_adapter", "up_w", Attribution::Text, Matrix(k_txt, cfg_.dim));
            params_.add("text_adapter", "out_b", Attribution::Text, Matrix(1, cfg_.dim));
        }
    }
}

void Model::init_params(RngStream& rng) {
    for (std::size_t i = 0; i < params_.count(); ++i) {
        ParamEntry& e = params_.entry(i);
        if (e.name.ends_with("_b")) {
            e.value.fill(0.0);
            continue;
        }
        const double bound = 1.0 / std::sqrt(static_cast<double>(e.value.rows()));
        for (double& v : e.value.flat()) {
            v = rng.uniform(-bound, bound);
        }
    }
}

ForwardNodes Model::forward(Tape& tape, const Matrix& eeg_flat, const Matrix& img,
                            const Matrix& text) {
    const int in = cfg_.eeg_channels * cfg_.eeg_timepoints;
    if (eeg_flat.cols() != in) {
        throw ShapeMismatch("forward: eeg width != channels * timepoints");
    }
    if (img.cols() != cfg_.dim || img.rows() != eeg_flat.rows()) {
        throw ShapeMismatch("forward: image feature shape mismatch");
    }
    if (cfg_.use_text && (text.cols() != cfg_.dim || text.rows() != eeg_flat.rows())) {
        throw ShapeMismatch("forward: text feature shape mismatch");
    }

    ForwardNodes out;

    const NodeId x = tape.constant(eeg_flat);
    const NodeId proj_w = tape.parameter(params_.at("eeg_encoder", "proj_w"));
    const NodeId proj_b = tape.parameter(params_.at("eeg_encoder", "proj_b"));
    const NodeId head_w = tape.parameter(params_.at("eeg_encoder", "head_w"));
    const NodeId head_b = tape.parameter(params_.at("eeg_encoder", "head_b"));
    const NodeId hid = tape.relu(tape.affine(x, proj_w, proj_b));
    out.f_eeg = tape.row_normalize(tape.affine(hid, head_w, head_b));

    const NodeId img_in = tape.constant(img);
    NodeId a_img = img_in;
    if (cfg_.use_adapter) {
        const NodeId dw = tape.parameter(params_.at("image_adapter", "down_w"));
        const NodeId uw = tape.parameter(params_.at("image_adapter", "up_w"));
        const NodeId up = tape.affine(tape.relu(tape.affine(img_in, dw, -1)), uw, -1);
        a_img = tape.axpy(cfg_.alpha_image, up, img_in);
    }
    out.f_img = tape.row_normalize(a_img);

    if (cfg_.use_text) {
        const NodeId txt_in = tape.constant(text);
        NodeId a_txt = txt_in;
        if (cfg_.use_adapter) {
            const NodeId dw = tape.parameter(params_.at("text_adapter", "down_w"));
            const NodeId db = tape.parameter(params_.at("text_adapter", "down_b"));
            const NodeId uw = tape.parameter(params_.at("text_adapter", "up_w"));
            const NodeId ob = tape.parameter(params_.at("text_adapter", "out_b"));
            const NodeId up = tape.affine(tape.relu(tape.affine(txt_in, dw, db)), uw, -1);
            a_txt = tape.add_row_vector(tape.axpy(cfg_.alpha_text, up, txt_in), ob);
        }
        const NodeId fused = tape.lerp(a_txt, txt_in, cfg_.beta_fusion);
        out.f_text = tape.row_normalize(fused);
        out.adapted_text = a_txt;
        out.raw_text = txt_in;
    }
    return out;
}

Matrix Model::embed_eeg(const Matrix& eeg_flat) const {
    EegBatch batch{eeg_flat, cfg_.eeg_channels, cfg_.eeg_timepoints};
    return l2_normalize_rows_clamped(eeg_encode(batch, eeg_encoder_view()).values);
}

Matrix Model::embed_image(const Matrix& img) const {
    if (!cfg_.use_adapter) {
        return l2_normalize_rows_clamped(img);
    }
    FeatureMatrix in{img, Modality::Image, false};
    return l2_normalize_rows_clamped(adapter_image_forward(in, image_adapter_view()).values);
}

Matrix Model::embed_text(const Matrix& text) const {
    if (!cfg_.use_text) {
        throw InvalidConfig("embed_text: text modality is disabled");
    }
    FeatureMatrix in{text, Modality::Text, false};
    if (!cfg_.use_adapter) {
        return l2_normalize_rows_clamped(text);
    }
    const FeatureMatrix adapted = adapter_text_forward(in, text_adapter_view());
    return l2_normalize_rows_clamped(
        fuse_text_features(adapted, in, FusionConfig{cfg_.beta_fusion}).values);
}

EegEncoderParams Model::eeg_encoder_view() const {
    EegEncoderParams p;
    p.temporal_proj.w = params_.at("eeg_encoder", "proj_w").value;
    p.temporal_proj.b = params_.at("eeg_encoder", "proj_b").value;
    p.head.w = params_.at("eeg_encoder", "head_w").value;
    p.head.b = params_.at("eeg_encoder", "head_b").value;
    return p;
}

AdapterParams Model::image_adapter_view() const {
    AdapterParams p;
    p.down.w = params_.at("image_adapter", "down_w").value;
    p.up.w = params_.at("image_adapter", "up_w").value;
    p.alpha = cfg_.alpha_image;
    p.r = cfg_.r_image;
    p.has_bias = false;
    return p;
}

AdapterParams Model::text_adapter_view() const {
    AdapterParams p;
    p.down.w = params_.at("text_adapter", "down_w").value;
    p.down.b = params_.at("text_adapter", "down_b").value;
    p.up.w = params_.at("text_adapter", "up_w").value;
    p.out_bias = params_.at("text_adapter", "out_b").value;
    p.alpha = cfg_.alpha_text;
    p.r = cfg_.r_text;
    p.has_bias = true;
    return p;
}

} // namespace triad
