#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "occupancy/dataset.hpp"
#include "occupancy/features.hpp"
#include "occupancy/metrics.hpp"
#include "occupancy/mlp.hpp"
#include "occupancy/rprop.hpp"

namespace occupancy {

struct TrainingMetadata {
    std::uint64_t seed = 0;
    RpropConfig config;
    bool converged = false;
    std::size_t epochs = 0;
    double final_error = 0.0;
    double final_max_gradient = 0.0;
    std::size_t training_rows = 0;
    double split_fraction = 0.75;
    std::string split_mode = "shuffle";
    std::vector<std::string> rooms;

    bool operator==(const TrainingMetadata&) const = default;
};

// Everything needed to turn raw sensor readings into estimates.
struct TrainedModel {
    Network network;
    Scaler scaler;
    VariableCombo combo = VariableCombo::rh_co2;
    WindowSpec window;
    TrainingMetadata metadata;

    bool operator==(const TrainedModel&) const = default;
};

// Raw (unscaled) feature vectors in, occupant predictions out.
std::vector<double> predict(const TrainedModel& model, const FeatureSet& raw);

long round_half_away(double x);

struct OccupancyEstimate {
    Timestamp timestamp;
    double raw;
    long rounded;
    long clamped;
    std::optional<int> reported;
};

struct ReconstructionSeries {
    std::string room_id;
    std::vector<OccupancyEstimate> estimates;
    std::size_t total_samples = 0;

    double coverage() const {
        return total_samples == 0 ? 0.0 : static_cast<double>(estimates.size()) / static_cast<double>(total_samples);
    }
};

ReconstructionSeries reconstruct(const TrainedModel& model, const SensorSeries& series,
                                 const OccupancySchedule& schedule);

// MetricReport of (raw, reported) over estimates that carry a report; nullopt if none do.
std::optional<MetricReport> reported_metrics(const ReconstructionSeries& rs);

void write_estimates_csv(std::ostream& out, const ReconstructionSeries& rs);
ReconstructionSeries read_estimates_csv(std::istream& in, const std::string& room_id, std::size_t total_samples);

// Writes `timestamp,co2,rh,t_in,reported,raw,rounded,clamped` to csv_path and a summary to json_path.
void export_report(const ReconstructionSeries& rs, const SensorSeries& series, const std::filesystem::path& csv_path,
                   const std::filesystem::path& json_path);
void write_report_csv(std::ostream& out, const ReconstructionSeries& rs, const SensorSeries& series);

}  // namespace occupancy
