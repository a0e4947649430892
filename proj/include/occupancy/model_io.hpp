#pragma once

#include <filesystem>
#include "json.hpp"

#include "occupancy/metrics.hpp"
#include "occupancy/model_selection.hpp"
#include "occupancy/reconstruction.hpp"
#include "occupancy/rprop.hpp"

namespace occupancy {

// Model documents store doubles in shortest round-trip decimal form, so a
// save/load cycle reproduces every parameter bit for bit.
inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);  // throws DataError

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

nlohmann::json to_json(const MetricReport& m);
nlohmann::json to_json(const TrainReport& r, bool include_trace = false);
nlohmann::json to_json(const RpropConfig& c);
RpropConfig rprop_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const GridResult& g);

// Pretty-printed with a trailing newline.
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace occupancy
