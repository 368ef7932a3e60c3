#include "triad/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "triad/features.hpp"

namespace triad {

namespace {

static_assert(std::endian::native == std::endian::little,
              "dataset binaries are written little-endian");

// Tags for the independent sub-streams of the generator.
constexpr std::uint64_t kProtoStream = 1;
constexpr std::uint64_t kSampleStream = 2;
constexpr std::uint64_t kValStream = 3;

std::vector<double> gauss_vec(RngStream& rng, int n, double scale) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) {
        x = rng.gauss() * scale;
    }
    return v;
}

// cols(out) = rows of map times latent vector z.
std::vector<double> apply_map(const Matrix& map, const std::vector<double>& z) {
    std::vector<double> out(static_cast<std::size_t>(map.rows()), 0.0);
    for (int i = 0; i < map.rows(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < map.cols(); ++j) {
            acc += map(i, j) * z[static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

void normalize_in_place(std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (!(n >= 1e-12)) {
        throw ZeroRowNorm("generate_synthetic: degenerate feature vector");
    }
    for (double& x : v) x /= n;
}

} // namespace

void SyntheticConfig::validate() const {
    if (n_train_classes < 1) throw InvalidConfig("data.n_train_classes must be >= 1");
    if (n_test_classes < 1) throw InvalidConfig("data.n_test_classes must be >= 1");
    if (samples_per_class < 1) throw InvalidConfig("data.samples_per_class must be >= 1");
    if (latent_dim < 1) throw InvalidConfig("data.latent_dim must be >= 1");
    if (eeg_channels < 1) throw InvalidConfig("data.eeg_channels must be >= 1");
    if (eeg_timepoints < 1) throw InvalidConfig("data.eeg_timepoints must be >= 1");
    if (feature_dim < 1) throw InvalidConfig("data.feature_dim must be >= 1");
    if (!(snr[Modality::Eeg] > 0.0)) throw InvalidConfig("data.snr.eeg must be > 0");
    if (!(snr[Modality::Image] > 0.0)) throw InvalidConfig("data.snr.image must be > 0");
    if (!(snr[Modality::Text] > 0.0)) throw InvalidConfig("data.snr.text must be > 0");
    if (val_trials < 0) throw InvalidConfig("data.val_trials must be >= 0");
}

MultimodalDataset generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    const RngStream master(cfg.seed);
    RngStream proto_rng = master.split(kProtoStream);
    RngStream sample_rng = master.split(kSampleStream);
    RngStream val_rng = master.split(kValStream);

    const int k = cfg.latent_dim;
    const int d = cfg.feature_dim;
    const int ct = cfg.eeg_channels * cfg.eeg_timepoints;
    const double latent_scale = 1.0 / std::sqrt(static_cast<double>(k));

    // Fixed random maps shared by every class.
    Matrix p_eeg(cfg.eeg_channels, k);
    Matrix p_img(d, k);
    Matrix p_text(d, k);
    for (double& v : p_eeg.flat()) v = proto_rng.gauss() * latent_scale;
    for (double& v : p_img.flat()) v = proto_rng.gauss() * latent_scale;
    for (double& v : p_text.flat()) v = proto_rng.gauss() * latent_scale;

    MultimodalDataset ds;
    ds.eeg_channels = cfg.eeg_channels;
    ds.eeg_timepoints = cfg.eeg_timepoints;
    ds.feature_dim = d;
    ds.seed = cfg.seed;
    for (int c = 0; c < cfg.n_train_classes; ++c) ds.train_classes.push_back(c);
    for (int c = 0; c < cfg.n_test_classes; ++c) ds.test_classes.push_back(cfg.n_train_classes + c);

    const double eeg_noise = 1.0 / cfg.snr[Modality::Eeg];
    const double img_noise = 1.0 / cfg.snr[Modality::Image];
    const double text_noise = 1.0 / cfg.snr[Modality::Text];

    auto fill_split = [&](SplitData& split, const std::vector<int>& classes) {
        const int n = static_cast<int>(classes.size()) * cfg.samples_per_class;
        split.eeg_flat = Matrix(n, ct);
        split.image = Matrix(n, d);
        split.text = Matrix(n, d);
        split.labels.resize(static_cast<std::size_t>(n));
        int row = 0;
        for (int cls : classes) {
            std::vector<double> z = gauss_vec(proto_rng, k, 1.0);

            std::vector<double> text_feat = apply_map(p_text, z);
            for (int j = 0; j < d; ++j) {
                text_feat[static_cast<std::size_t>(j)] += proto_rng.gauss() * text_noise;
            }
            normalize_in_place(text_feat);

            std::vector<double> eeg_base = apply_map(p_eeg, z);
            for (double& v : eeg_base) v = std::tanh(v);

            for (int s = 0; s < cfg.samples_per_class; ++s) {
                std::vector<double> img_feat = apply_map(p_img, z);
                for (int j = 0; j < d; ++j) {
                    img_feat[static_cast<std::size_t>(j)] += sample_rng.gauss() * img_noise;
                }
                normalize_in_place(img_feat);

                for (int j = 0; j < d; ++j) {
                    split.image(row, j) = img_feat[static_cast<std::size_t>(j)];
                    split.text(row, j) = text_feat[static_cast<std::size_t>(j)];
                }
                for (int ch = 0; ch < cfg.eeg_channels; ++ch) {
                    const double base = eeg_base[static_cast<std::size_t>(ch)];
                    for (int t = 0; t < cfg.eeg_timepoints; ++t) {
                        split.eeg_flat(row, ch * cfg.eeg_timepoints + t) =
                            base + sample_rng.gauss() * eeg_noise;
                    }
                }
                split.labels[static_cast<std::size_t>(row)] = cls;
                ++row;
            }
        }
    };

    fill_split(ds.train, ds.train_classes);
    fill_split(ds.test, ds.test_classes);

    // Carve a validation split out of the train trials.
    const int train_n = ds.train.count();
    const int val_n = std::min(cfg.val_trials, train_n / 2);
    if (val_n > 0) {
        std::vector<int> perm = val_rng.permutation(train_n);
        std::vector<int> val_idx(perm.begin(), perm.begin() + val_n);
        std::sort(val_idx.begin(), val_idx.end());
        std::vector<bool> is_val(static_cast<std::size_t>(train_n), false);
        for (int i : val_idx) is_val[static_cast<std::size_t>(i)] = true;

        SplitData train_kept, val;
        auto alloc = [&](SplitData& s, int n) {
            s.eeg_flat = Matrix(n, ct);
            s.image = Matrix(n, d);
            s.text = Matrix(n, d);
            s.labels.resize(static_cast<std::size_t>(n));
        };
        alloc(train_kept, train_n - val_n);
        alloc(val, val_n);
        int tr = 0, vr = 0;
        for (int i = 0; i < train_n; ++i) {
            SplitData& dst = is_val[static_cast<std::size_t>(i)] ? val : train_kept;
            int& row = is_val[static_cast<std::size_t>(i)] ? vr : tr;
            for (int j = 0; j < ct; ++j) dst.eeg_flat(row, j) = ds.train.eeg_flat(i, j);
            for (int j = 0; j < d; ++j) {
                dst.image(row, j) = ds.train.image(i, j);
                dst.text(row, j) = ds.train.text(i, j);
            }
            dst.labels[static_cast<std::size_t>(row)] = ds.train.labels[static_cast<std::size_t>(i)];
            ++row;
        }
        ds.train = std::move(train_kept);
        ds.val = std::move(val);
    }
    return ds;
}

namespace {

using nlohmann::json;

void write_f32(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    std::vector<float> buf(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        buf[i] = static_cast<float>(m.flat()[i]);
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!os) throw IoError("write failed: " + path.string());
}

Matrix read_f32(const std::filesystem::path& path, int rows, int cols) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    Matrix m(rows, cols);
    std::vector<float> buf(m.size());
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (is.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float))) {
        throw IoError("short read (shape mismatch?): " + path.string());
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
        m.flat()[i] = static_cast<double>(buf[i]);
    }
    return m;
}

void write_i32(const std::filesystem::path& path, const std::vector<int>& v) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    std::vector<std::int32_t> buf(v.begin(), v.end());
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(std::int32_t)));
    if (!os) throw IoError("write failed: " + path.string());
}

std::vector<int> read_i32(const std::filesystem::path& path, int n) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    std::vector<std::int32_t> buf(static_cast<std::size_t>(n));
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(std::int32_t)));
    if (is.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(std::int32_t))) {
        throw IoError("short read: " + path.string());
    }
    return std::vector<int>(buf.begin(), buf.end());
}

} // namespace

void save_dataset(const MultimodalDataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create dataset directory: " + dir);

    json manifest;
    manifest["format"] = "triad-dataset";
    manifest["version"] = 1;
    manifest["seed"] = ds.seed;
    manifest["eeg_channels"] = ds.eeg_channels;
    manifest["eeg_timepoints"] = ds.eeg_timepoints;
    manifest["feature_dim"] = ds.feature_dim;
    manifest["eeg_layout"] = "trial_channel_time";
    manifest["classes"] = {{"train", ds.train_classes}, {"test", ds.test_classes}};

    json splits = json::object();
    auto emit = [&](const char* name, const SplitData& s) {
        if (s.count() == 0 && std::string(name) == "val") return;
        const std::string prefix(name);
        write_f32(root / (prefix + "_eeg.f32"), s.eeg_flat);
        write_f32(root / (prefix + "_image.f32"), s.image);
        if (ds.has_text) write_f32(root / (prefix + "_text.f32"), s.text);
        write_i32(root / (prefix + "_labels.i32"), s.labels);
        json entry;
        entry["count"] = s.count();
        entry["eeg"] = prefix + "_eeg.f32";
        entry["image"] = prefix + "_image.f32";
        if (ds.has_text) entry["text"] = prefix + "_text.f32";
        entry["labels"] = prefix + "_labels.i32";
        splits[name] = entry;
    };
    emit("train", ds.train);
    emit("val", ds.val);
    emit("test", ds.test);
    manifest["splits"] = splits;

    std::ofstream os(root / "manifest.json");
    if (!os) throw IoError("cannot write manifest in " + dir);
    os << manifest.dump(2) << "\n";
}

MultimodalDataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::ifstream is(root / "manifest.json");
    if (!is) throw IoError("dataset manifest not found: " + (root / "manifest.json").string());
    json manifest;
    try {
        is >> manifest;
    } catch (const json::exception& e) {
        throw IoError("bad manifest in " + dir + ": " + e.what());
    }
    if (manifest.value("format", "") != "triad-dataset") {
        throw IoError("not a triad dataset: " + dir);
    }

    MultimodalDataset ds;
    ds.seed = manifest.value("seed", 0ull);
    ds.eeg_channels = manifest.at("eeg_channels").get<int>();
    ds.eeg_timepoints = manifest.at("eeg_timepoints").get<int>();
    ds.feature_dim = manifest.at("feature_dim").get<int>();
    ds.train_classes = manifest.at("classes").at("train").get<std::vector<int>>();
    ds.test_classes = manifest.at("classes").at("test").get<std::vector<int>>();

    const int ct = ds.eeg_channels * ds.eeg_timepoints;
    ds.has_text = true;
    auto read_split = [&](const char* name, SplitData& s) {
        if (!manifest.at("splits").contains(name)) return;
        const json& entry = manifest.at("splits").at(name);
        const int n = entry.at("count").get<int>();
        s.eeg_flat = read_f32(root / entry.at("eeg").get<std::string>(), n, ct);
        s.image = read_f32(root / entry.at("image").get<std::string>(), n, ds.feature_dim);
        if (entry.contains("text")) {
            s.text = read_f32(root / entry.at("text").get<std::string>(), n, ds.feature_dim);
        } else {
            ds.has_text = false;
        }
        s.labels = read_i32(root / entry.at("labels").get<std::string>(), n);
    };
    read_split("train", ds.train);
    read_split("val", ds.val);
    read_split("test", ds.test);
    return ds;
}

} // namespace triad
