#include "occupancy/model_io.hpp"

#include <fstream>

#include "occupancy/errors.hpp"

namespace occupancy {

using nlohmann::json;

json to_json(const RpropConfig& c) {
    return {{"eta_plus", c.eta_plus},   {"eta_minus", c.eta_minus}, {"delta_zero", c.delta_zero},
            {"delta_min", c.delta_min}, {"delta_max", c.delta_max}, {"threshold", c.threshold},
            {"stepmax", c.stepmax},     {"divergence_limit", c.divergence_limit}};
}

RpropConfig rprop_config_from_json(const json& doc) {
    RpropConfig c;
    c.eta_plus = doc.at("eta_plus").get<double>();
    c.eta_minus = doc.at("eta_minus").get<double>();
    c.delta_zero = doc.at("delta_zero").get<double>();
    c.delta_min = doc.at("delta_min").get<double>();
    c.delta_max = doc.at("delta_max").get<double>();
    c.threshold = doc.at("threshold").get<double>();
    c.stepmax = doc.at("stepmax").get<std::size_t>();
    c.divergence_limit = doc.value("divergence_limit", c.divergence_limit);
    return c;
}

json to_json(const TrainedModel& model) {
    const auto& net = model.network;
    json layers = json::array();
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        const auto& lay = net.layers()[l];
        const auto params = net.parameters();
        json weights = json::array();
        for (std::size_t i = 0; i < lay.fan_in; ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < lay.fan_out; ++j) row.push_back(params[lay.weight_offset + i * lay.fan_out + j]);
            weights.push_back(std::move(row));
        }
        json biases(std::vector<double>(params.begin() + lay.bias_offset, params.begin() + lay.bias_offset + lay.fan_out));
        layers.push_back({{"fan_in", lay.fan_in}, {"fan_out", lay.fan_out}, {"weights", weights}, {"biases", biases}});
    }
    const auto& m = model.metadata;
    return {
        {"format", "occupancy-mlp"},
        {"version", kModelFormatVersion},
        {"structure",
         {{"input_dim", net.structure().input_dim},
          {"hidden", net.structure().hidden},
          {"output_dim", net.structure().output_dim}}},
        {"weight_layout", "row-major fan_in x fan_out"},
        {"layers", layers},
        {"scaler", {{"method", model.scaler.method}, {"location", model.scaler.location}, {"scale", model.scaler.scale}}},
        {"combo", std::string(to_string(model.combo))},
        {"window_spec", model.window.to_string()},
        {"seed", m.seed},
        {"training",
         {{"config", to_json(m.config)},
          {"converged", m.converged},
          {"epochs", m.epochs},
          {"final_error", m.final_error},
          {"final_max_gradient", m.final_max_gradient},
          {"training_rows", m.training_rows},
          {"split_fraction", m.split_fraction},
          {"split_mode", m.split_mode},
          {"rooms", m.rooms}}},
    };
}

TrainedModel model_from_json(const json& doc) {
    try {
        if (doc.at("format") != "occupancy-mlp") throw DataError("not an occupancy-mlp model document");
        if (doc.at("version").get<int>() != kModelFormatVersion) throw DataError("unsupported model format version");
        NetworkStructure s;
        s.input_dim = doc.at("structure").at("input_dim").get<std::size_t>();
        s.hidden = doc.at("structure").at("hidden").get<std::vector<std::size_t>>();
        s.output_dim = doc.at("structure").at("output_dim").get<std::size_t>();
        TrainedModel model;
        model.network = Network(s);
        const auto& layers = doc.at("layers");
        if (layers.size() != model.network.layers().size()) throw DataError("layer count does not match structure");
        auto params = model.network.parameters();
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& lay = model.network.layers()[l];
            const auto& weights = layers[l].at("weights");
            const auto& biases = layers[l].at("biases");
            if (weights.size() != lay.fan_in || biases.size() != lay.fan_out)
                throw DataError("layer " + std::to_string(l) + " shape does not match structure");
            for (std::size_t i = 0; i < lay.fan_in; ++i) {
                if (weights[i].size() != lay.fan_out) throw DataError("weight row has wrong width");
                for (std::size_t j = 0; j < lay.fan_out; ++j)
                    params[lay.weight_offset + i * lay.fan_out + j] = weights[i][j].get<double>();
            }
            for (std::size_t j = 0; j < lay.fan_out; ++j) params[lay.bias_offset + j] = biases[j].get<double>();
        }
        const auto& sc = doc.at("scaler");
        model.scaler.method = sc.at("method").get<std::string>();
        model.scaler.location = sc.at("location").get<std::vector<double>>();
        model.scaler.scale = sc.at("scale").get<std::vector<double>>();
        if (model.scaler.location.size() != s.input_dim || model.scaler.scale.size() != s.input_dim)
            throw DataError("scaler dimension does not match network input");
        model.combo = parse_combo(doc.at("combo").get<std::string>());
        model.window = WindowSpec::parse(doc.at("window_spec").get<std::string>());
        auto& m = model.metadata;
        m.seed = doc.at("seed").get<std::uint64_t>();
        const auto& tr = doc.at("training");
        m.config = rprop_config_from_json(tr.at("config"));
        m.converged = tr.at("converged").get<bool>();
        m.epochs = tr.at("epochs").get<std::size_t>();
        m.final_error = tr.at("final_error").get<double>();
        m.final_max_gradient = tr.at("final_max_gradient").get<double>();
        m.training_rows = tr.at("training_rows").get<std::size_t>();
        m.split_fraction = tr.at("split_fraction").get<double>();
        m.split_mode = tr.at("split_mode").get<std::string>();
        m.rooms = tr.at("rooms").get<std::vector<std::string>>();
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid model document: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("invalid model document: ") + e.what());
    }
}

void write_json(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) { write_json(to_json(model), path); }

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
    return model_from_json(doc);
}

json to_json(const MetricReport& m) {
    json j = {{"n", m.n}, {"mse", m.mse}, {"rmse", m.rmse}, {"mae", m.mae}};
    j["r2"] = m.r2 ? json(*m.r2) : json(nullptr);
    j["p_value"] = m.p_value ? json(*m.p_value) : json(nullptr);
    return j;
}

json to_json(const TrainReport& r, bool include_trace) {
    json j = {{"converged", r.converged},
              {"epochs", r.epochs},
              {"final_error", r.final_error},
              {"final_max_gradient", r.final_max_gradient}};
    if (include_trace) j["error_trace"] = r.error_trace;
    return j;
}

json to_json(const GridResult& g) {
    json ranked = json::array();
    for (std::size_t rank = 0; rank < g.ranked.size(); ++rank) {
        const auto& r = g.ranked[rank];
        std::vector<bool> conv(r.converged.begin(), r.converged.end());
        ranked.push_back({{"rank", rank + 1},
                          {"combo", std::string(to_string(r.candidate.combo))},
                          {"structure", r.candidate.structure.hidden},
                          {"parameters", r.candidate.structure.parameter_count()},
                          {"mean_mse", r.mean_mse},
                          {"std_mse", r.std_mse},
                          {"fold_mse", r.fold_mse},
                          {"converged", conv}});
    }
    return {{"winner",
             {{"combo", std::string(to_string(g.winner.combo))}, {"structure", g.winner.structure.hidden}}},
            {"candidates", g.ranked.size()},
            {"ranked", ranked}};
}

}  // namespace occupancy
