#include "occupancy/rprop.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "occupancy/errors.hpp"

namespace occupancy {

void RpropConfig::validate() const {
    if (!(0.0 < eta_minus && eta_minus < 1.0 && 1.0 < eta_plus))
        throw InvalidArgument("RPROP requires 0 < eta_minus < 1 < eta_plus");
    if (!(0.0 < delta_min && delta_min <= delta_zero && delta_zero <= delta_max))
        throw InvalidArgument("RPROP requires 0 < delta_min <= delta_zero <= delta_max");
    if (!(threshold > 0.0)) throw InvalidArgument("threshold must be positive");
    if (stepmax < 1) throw InvalidArgument("stepmax must be at least 1");
}

TrainerState TrainerState::initial(std::size_t parameters, const RpropConfig& config) {
    return {std::vector<double>(parameters, config.delta_zero), std::vector<double>(parameters, 0.0),
            std::vector<double>(parameters, 0.0), 0};
}

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

std::vector<double> rprop_step(TrainerState& state, std::span<const double> grad, const RpropConfig& config) {
    const std::size_t n = grad.size();
    if (state.step.size() != n || state.prev_grad.size() != n || state.prev_update.size() != n)
        throw InvalidArgument("trainer state does not match gradient size");
    std::vector<double> update(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        const double agreement = state.prev_grad[i] * g;
        if (agreement > 0.0) {
            state.step[i] = std::min(state.step[i] * config.eta_plus, config.delta_max);
            update[i] = -sign(g) * state.step[i];
            state.prev_grad[i] = g;
        } else if (agreement < 0.0) {
            update[i] = -state.prev_update[i];
            state.step[i] = std::max(state.step[i] * config.eta_minus, config.delta_min);
            state.prev_grad[i] = 0.0;
        } else {
            update[i] = -sign(g) * state.step[i];
            state.prev_grad[i] = g;
        }
        state.prev_update[i] = update[i];
    }
    ++state.epoch;
    return update;
}

TrainingBatch make_batch(const FeatureSet& scaled) {
    const std::size_t dim = scaled.empty() ? scaled.dimension() : scaled.vectors.front().values.size();
    std::vector<double> inputs;
    std::vector<double> targets;
    inputs.reserve(scaled.size() * dim);
    targets.reserve(scaled.size());
    for (const auto& v : scaled.vectors) {
        if (!v.target) throw InvalidArgument("training data contains a sample with unknown occupancy");
        if (v.values.size() != dim) throw InvalidArgument("inconsistent feature dimension");
        inputs.insert(inputs.end(), v.values.begin(), v.values.end());
        targets.push_back(static_cast<double>(*v.target));
    }
    return TrainingBatch(dim, std::move(inputs), std::move(targets));
}

TrainResult train(Network net, const TrainingBatch& batch, const RpropConfig& config) {
    config.validate();
    if (batch.empty()) throw InvalidArgument("cannot train on an empty batch");
    TrainerState state = TrainerState::initial(net.parameter_count(), config);
    TrainReport report;
    while (true) {
        const auto bg = batch_gradient(net, batch);
        report.error_trace.push_back(bg.error);
        if (!std::isfinite(bg.error) || bg.error > config.divergence_limit) {
            std::ostringstream os;
            os << "training diverged at epoch " << state.epoch << ": error = " << bg.error;
            throw TrainingDiverged(os.str());
        }
        report.final_error = bg.error;
        report.final_max_gradient = bg.gradient.max_abs();
        if (report.final_max_gradient < config.threshold) {
            report.converged = true;
            break;
        }
        if (state.epoch >= config.stepmax) break;
        const auto update = rprop_step(state, bg.gradient.values, config);
        net.apply_update(update);
    }
    report.epochs = state.epoch;
    return {std::move(net), std::move(report)};
}

TrainResult train(Network net, const FeatureSet& scaled, const RpropConfig& config) {
    return train(std::move(net), make_batch(scaled), config);
}

}  // namespace occupancy
