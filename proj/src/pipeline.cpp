#include "occupancy/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "occupancy/errors.hpp"
#include "occupancy/random.hpp"

namespace occupancy {

Dataset load_dataset(const PipelineConfig& config) {
    if (config.sensors.empty()) throw DataError("no sensor files configured");
    Dataset d;
    for (const auto& src : config.sensors) {
        std::ifstream in(src.path);
        if (!in) throw DataError("cannot open sensor file " + src.path.string());
        try {
            d.series.push_back(parse_sensor_log(in, src.room_id));
        } catch (const DataError& e) {
            throw DataError(src.path.string() + ": " + e.what());
        }
    }
    if (!config.attendance.empty()) {
        std::ifstream in(config.attendance);
        if (!in) throw DataError("cannot open attendance file " + config.attendance.string());
        try {
            d.attendance = parse_attendance(in);
        } catch (const DataError& e) {
            throw DataError(config.attendance.string() + ": " + e.what());
        }
    }
    return d;
}

PreparedData prepare(const Dataset& data, const PipelineConfig& config) {
    PreparedData p;
    p.labels = data.attendance;
    const auto rules = config.mask_rules();
    for (const auto& s : data.series) {
        p.masked.push_back(apply_exclusions(s, rules));
        if (config.vacancy == VacancyPolicy::zero_label && !s.empty()) {
            p.labels = with_vacant_periods(p.labels, s.room_id(), s.records().front().timestamp,
                                           s.records().back().timestamp + kSamplePeriod, config.utc_offset,
                                           config.night_start_minute, config.night_end_minute);
        }
    }
    for (const auto& m : p.masked) p.samples.push_back(label_samples(m, p.labels));
    return p;
}

FeatureSet training_features(const PreparedData& data, VariableCombo combo, const PipelineConfig& config) {
    std::vector<FeatureSet> per_room;
    for (std::size_t r = 0; r < data.masked.size(); ++r)
        per_room.push_back(build_feature_set(data.samples[r], data.masked[r], combo, true, config.window));
    auto fs = concat(per_room);
    fs.combo = combo;
    fs.spec = config.window;
    return subsample(fs, config.feature_stride);
}

GridResult run_grid_search(const PreparedData& data, const PipelineConfig& config) {
    const auto grid = config.grid();
    std::map<VariableCombo, FeatureSet> sets;
    for (const auto& c : grid) {
        if (!sets.count(c.combo)) sets.emplace(c.combo, training_features(data, c.combo, config));
    }
    return grid_search(sets, grid, config.search, config.seed,
                       GridOptions{config.folds, config.reuse_partition, config.workers});
}

Split split_feature_set(const FeatureSet& fs, double fraction, SplitMode mode, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("split fraction must be in (0, 1)");
    const std::size_t n = fs.size();
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n) throw InvalidArgument("split leaves an empty partition");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (mode == SplitMode::shuffle) {
        Rng rng(mix_seed(seed, 0x73706c6974ULL));
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    } else {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fs.vectors[a].timestamp < fs.vectors[b].timestamp; });
    }
    Split s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.holdout.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.holdout.begin(), s.holdout.end());
    return s;
}

FinalTraining train_final(const PreparedData& data, const CandidateSpec& candidate, const PipelineConfig& config) {
    const auto fs = training_features(data, candidate.combo, config);
    if (fs.size() < 2) throw DataError("not enough labelled feature vectors to train (" + std::to_string(fs.size()) + ")");
    const auto split = split_feature_set(fs, config.split_fraction, config.split_mode, config.seed);
    const auto train_raw = select(fs, split.train);
    const auto holdout_raw = select(fs, split.holdout);

    FinalTraining out;
    auto& model = out.model;
    model.combo = candidate.combo;
    model.window = config.window;
    model.scaler = fit_scaler(train_raw);
    const std::uint64_t net_seed = mix_seed(config.seed, 0x66696e616cULL);
    auto trained = train(init_network(candidate.structure, net_seed), apply_scaler(model.scaler, train_raw), config.final);
    model.network = std::move(trained.network);
    out.report = std::move(trained.report);

    auto& meta = model.metadata;
    meta.seed = net_seed;
    meta.config = config.final;
    meta.converged = out.report.converged;
    meta.epochs = out.report.epochs;
    meta.final_error = out.report.final_error;
    meta.final_max_gradient = out.report.final_max_gradient;
    meta.training_rows = train_raw.size();
    meta.split_fraction = config.split_fraction;
    meta.split_mode = config.split_mode == SplitMode::shuffle ? "shuffle" : "time_block";
    for (const auto& s : data.masked) meta.rooms.push_back(s.room_id());

    out.holdout_predictions = predict(model, holdout_raw);
    for (const auto& v : holdout_raw.vectors) out.holdout_observations.push_back(*v.target);
    out.holdout = evaluate(out.holdout_predictions, out.holdout_observations);
    return out;
}

ReconstructionSeries estimate_room(const TrainedModel& model, const SensorSeries& raw, const PreparedData& data,
                                   std::size_t room_index, const OccupancySchedule& attendance, bool masked_only) {
    return reconstruct(model, masked_only ? data.masked.at(room_index) : raw, attendance);
}

}  // namespace occupancy
