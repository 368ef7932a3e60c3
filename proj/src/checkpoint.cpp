#include "triad/checkpoint.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace triad {

namespace {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
    return json{{"eeg_channels", c.eeg_channels},
                {"eeg_timepoints", c.eeg_timepoints},
                {"hidden", c.hidden},
                {"dim", c.dim},
                {"r_text", c.r_text},
                {"r_image", c.r_image},
                {"alpha_text", c.alpha_text},
                {"alpha_image", c.alpha_image},
                {"beta_fusion", c.beta_fusion},
                {"use_text", c.use_text},
                {"use_adapter", c.use_adapter}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.eeg_channels = j.at("eeg_channels").get<int>();
    c.eeg_timepoints = j.at("eeg_timepoints").get<int>();
    c.hidden = j.at("hidden").get<int>();
    c.dim = j.at("dim").get<int>();
    c.r_text = j.at("r_text").get<int>();
    c.r_image = j.at("r_image").get<int>();
    c.alpha_text = j.at("alpha_text").get<double>();
    c.alpha_image = j.at("alpha_image").get<double>();
    c.beta_fusion = j.at("beta_fusion").get<double>();
    c.use_text = j.at("use_text").get<bool>();
    c.use_adapter = j.at("use_adapter").get<bool>();
    return c;
}

} // namespace

void save_checkpoint(const Model& model, const std::string& path) {
    json doc;
    doc["format"] = "triad-checkpoint";
    doc["version"] = 1;
    doc["model"] = config_to_json(model.config());

    json params = json::array();
    const ParamStore& store = model.params();
    for (std::size_t i = 0; i < store.count(); ++i) {
        const ParamEntry& e = store.entry(i);
        json p;
        p["component"] = e.component;
        p["name"] = e.name;
        p["attribution"] = to_string(e.attribution);
        p["rows"] = e.value.rows();
        p["cols"] = e.value.cols();
        p["values"] = std::vector<double>(e.value.flat().begin(), e.value.flat().end());
        params.push_back(std::move(p));
    }
    doc["params"] = std::move(params);

    std::ofstream os(path);
    if (!os) throw IoError("cannot write checkpoint: " + path);
    os << doc.dump(2) << "\n";
    if (!os) throw IoError("checkpoint write failed: " + path);
}

Model load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    json doc;
    try {
        is >> doc;
    } catch (const json::exception& e) {
        throw IoError("bad checkpoint JSON in " + path + ": " + e.what());
    }
    if (doc.value("format", "") != "triad-checkpoint") {
        throw IoError("not a triad checkpoint: " + path);
    }

    Model model(config_from_json(doc.at("model")));
    for (const json& p : doc.at("params")) {
        const std::string component = p.at("component").get<std::string>();
        const std::string name = p.at("name").get<std::string>();
        if (!model.params().contains(component, name)) {
            throw DimensionMismatch("checkpoint parameter " + component + "/" + name +
                                    " does not exist for the stored config");
        }
        ParamEntry& e = model.params().at(component, name);
        const int rows = p.at("rows").get<int>();
        const int cols = p.at("cols").get<int>();
        if (rows != e.value.rows() || cols != e.value.cols()) {
            throw DimensionMismatch("checkpoint parameter " + component + "/" + name +
                                    " has shape " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + ", expected " +
                                    std::to_string(e.value.rows()) + "x" +
                                    std::to_string(e.value.cols()));
        }
        const auto values = p.at("values").get<std::vector<double>>();
        if (values.size() != e.value.size()) {
            throw DimensionMismatch("checkpoint parameter " + component + "/" + name +
                                    " carries " + std::to_string(values.size()) + " values");
        }
        std::copy(values.begin(), values.end(), e.value.flat().begin());
    }
    return model;
}

} // namespace triad
