#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "occupancy/config.hpp"
#include "occupancy/dataset.hpp"
#include "occupancy/features.hpp"
#include "occupancy/metrics.hpp"
#include "occupancy/model_selection.hpp"
#include "occupancy/reconstruction.hpp"

namespace occupancy {

// Sensor series for every room plus the reported attendance.
struct Dataset {
    std::vector<SensorSeries> series;
    OccupancySchedule attendance;
};

Dataset load_dataset(const PipelineConfig& config);

// Modelling timeline after masking and labelling.
struct PreparedData {
    std::vector<SensorSeries> masked;
    OccupancySchedule labels;  // attendance plus any synthesized vacant periods
    std::vector<std::vector<LabeledSample>> samples;
};

PreparedData prepare(const Dataset& data, const PipelineConfig& config);

// Labelled vectors of every room, concatenated in room order and thinned by the configured stride.
FeatureSet training_features(const PreparedData& data, VariableCombo combo, const PipelineConfig& config);

GridResult run_grid_search(const PreparedData& data, const PipelineConfig& config);

struct Split {
    std::vector<std::size_t> train;    // ascending
    std::vector<std::size_t> holdout;  // ascending
};

// `shuffle` permutes vectors with the seed; `time_block` keeps the earliest
// fraction (by timestamp) for training.
Split split_feature_set(const FeatureSet& fs, double fraction, SplitMode mode, std::uint64_t seed);

struct FinalTraining {
    TrainedModel model;
    TrainReport report;
    MetricReport holdout;
    std::vector<double> holdout_predictions;
    std::vector<double> holdout_observations;
};

FinalTraining train_final(const PreparedData& data, const CandidateSpec& candidate, const PipelineConfig& config);

// Reconstruction over the raw (or, with masked_only, the masked) timeline of one room.
ReconstructionSeries estimate_room(const TrainedModel& model, const SensorSeries& raw, const PreparedData& data,
                                   std::size_t room_index, const OccupancySchedule& attendance, bool masked_only);

}  // namespace occupancy
