#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "occupancy/features.hpp"
#include "occupancy/mlp.hpp"

namespace occupancy {

struct RpropConfig {
    double eta_plus = 1.2;
    double eta_minus = 0.5;
    double delta_zero = 0.1;
    double delta_min = 1e-6;
    double delta_max = 50.0;
    double threshold = 0.3;  // stop once max |dE/dw| falls below this
    std::size_t stepmax = 100000;
    double divergence_limit = 1e12;

    void validate() const;  // throws InvalidArgument
    bool operator==(const RpropConfig&) const = default;
};

// Per-parameter RPROP+ state.
struct TrainerState {
    std::vector<double> step;         // current step size
    std::vector<double> prev_grad;    // zeroed after a backtrack
    std::vector<double> prev_update;  // last applied weight change
    std::size_t epoch = 0;

    static TrainerState initial(std::size_t parameters, const RpropConfig& config);
};

// Updates `state` in place and returns the weight change to add to the parameters.
//   same sign:     grow the step (capped at delta_max) and move against the gradient
//   sign change:   undo the previous update, shrink the step, forget the gradient
//   zero product:  move against the gradient with the current step
std::vector<double> rprop_step(TrainerState& state, std::span<const double> grad, const RpropConfig& config);

struct TrainReport {
    bool converged = false;
    std::size_t epochs = 0;  // number of applied RPROP steps
    double final_error = 0.0;
    double final_max_gradient = 0.0;
    std::vector<double> error_trace;  // error at each evaluation, including the last
};

struct TrainResult {
    Network network;
    TrainReport report;
};

TrainingBatch make_batch(const FeatureSet& scaled);

// Full-batch RPROP+. Non-convergence within stepmax is reported, not thrown;
// a non-finite or runaway error throws TrainingDiverged.
TrainResult train(Network net, const TrainingBatch& batch, const RpropConfig& config);
TrainResult train(Network net, const FeatureSet& scaled, const RpropConfig& config);

}  // namespace occupancy
