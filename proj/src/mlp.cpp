#include "occupancy/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csv.hpp"
#include "occupancy/errors.hpp"
#include "occupancy/random.hpp"

namespace occupancy {

void NetworkStructure::validate() const {
    if (input_dim == 0) throw InvalidArgument("input dimension must be positive");
    if (hidden.empty() || hidden.size() > 2) throw InvalidArgument("network needs one or two hidden layers");
    for (const auto h : hidden) {
        if (h == 0) throw InvalidArgument("hidden layer sizes must be positive");
    }
    if (output_dim != 1) throw InvalidArgument("only a scalar output is supported");
}

std::size_t NetworkStructure::parameter_count() const {
    std::size_t count = 0;
    std::size_t fan_in = input_dim;
    for (const auto h : hidden) {
        count += fan_in * h + h;
        fan_in = h;
    }
    return count + fan_in * output_dim + output_dim;
}

std::string NetworkStructure::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(hidden[i]);
    }
    return out;
}

NetworkStructure NetworkStructure::parse(std::string_view hidden_sizes, std::size_t input_dim) {
    NetworkStructure s;
    s.input_dim = input_dim;
    for (const auto part : csv::split(hidden_sizes)) {
        const auto v = csv::to_integer(part);
        if (!v || *v <= 0) throw InvalidArgument("malformed hidden layer list '" + std::string(hidden_sizes) + "'");
        s.hidden.push_back(static_cast<std::size_t>(*v));
    }
    s.validate();
    return s;
}

Network::Network(NetworkStructure structure) : structure_(std::move(structure)) {
    structure_.validate();
    std::size_t offset = 0;
    std::size_t fan_in = structure_.input_dim;
    auto add = [&](std::size_t fan_out) {
        layers_.push_back({fan_in, fan_out, offset, offset + fan_in * fan_out});
        offset += fan_in * fan_out + fan_out;
        fan_in = fan_out;
    };
    for (const auto h : structure_.hidden) add(h);
    add(structure_.output_dim);
    params_.assign(offset, 0.0);
}

double Network::weight(std::size_t layer, std::size_t in, std::size_t out) const {
    const auto& l = layers_.at(layer);
    return params_[l.weight_offset + in * l.fan_out + out];
}

double& Network::weight(std::size_t layer, std::size_t in, std::size_t out) {
    const auto& l = layers_.at(layer);
    return params_[l.weight_offset + in * l.fan_out + out];
}

double Network::bias(std::size_t layer, std::size_t out) const { return params_[layers_.at(layer).bias_offset + out]; }

double& Network::bias(std::size_t layer, std::size_t out) { return params_[layers_.at(layer).bias_offset + out]; }

void Network::apply_update(std::span<const double> delta) {
    if (delta.size() != params_.size()) throw InvalidArgument("update size does not match parameter count");
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i] += delta[i];
}

Network init_network(const NetworkStructure& structure, std::uint64_t seed) {
    Network net(structure);
    Rng rng(seed);
    for (auto& p : net.parameters()) p = rng.uniform(-0.5, 0.5);
    return net;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

// out[j] = act(sum_i in[i] * w(i, j) + b[j]), accumulated in increasing i.
void eval_layer(const double* params, const LayerLayout& l, const double* in, double* out, bool logistic) {
    const double* w = params + l.weight_offset;
    std::fill(out, out + l.fan_out, 0.0);
    for (std::size_t i = 0; i < l.fan_in; ++i) {
        const double a = in[i];
        const double* row = w + i * l.fan_out;
        for (std::size_t j = 0; j < l.fan_out; ++j) out[j] += a * row[j];
    }
    const double* b = params + l.bias_offset;
    for (std::size_t j = 0; j < l.fan_out; ++j) {
        out[j] += b[j];
        if (logistic) out[j] = sigmoid(out[j]);
    }
}

void check_input(const Network& net, std::span<const double> input) {
    if (input.size() != net.structure().input_dim)
        throw InvalidArgument("input has " + std::to_string(input.size()) + " values, network expects " +
                              std::to_string(net.structure().input_dim));
}

}  // namespace

ForwardResult forward(const Network& net, std::span<const double> input) {
    check_input(net, input);
    const auto& layers = net.layers();
    ForwardResult r;
    r.activations.emplace_back(input.begin(), input.end());
    double output = 0.0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const bool hidden = l + 1 < layers.size();
        std::vector<double> out(layers[l].fan_out);
        eval_layer(net.parameters().data(), layers[l], r.activations.back().data(), out.data(), hidden);
        if (hidden)
            r.activations.push_back(std::move(out));
        else
            output = out[0];
    }
    r.prediction = output;
    return r;
}

double predict(const Network& net, std::span<const double> input) {
    check_input(net, input);
    const auto& layers = net.layers();
    double buf_a[256];
    double buf_b[256];
    std::vector<double> heap_a, heap_b;
    std::size_t widest = net.structure().input_dim;
    for (const auto& l : layers) widest = std::max(widest, l.fan_out);
    double* cur = buf_a;
    double* next = buf_b;
    if (widest > 256) {
        heap_a.resize(widest);
        heap_b.resize(widest);
        cur = heap_a.data();
        next = heap_b.data();
    }
    std::copy(input.begin(), input.end(), cur);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        eval_layer(net.parameters().data(), layers[l], cur, next, l + 1 < layers.size());
        std::swap(cur, next);
    }
    return cur[0];
}

double Gradient::max_abs() const {
    double m = 0.0;
    for (const double g : values) m = std::max(m, std::abs(g));
    return m;
}

TrainingBatch::TrainingBatch(std::size_t input_dim, std::vector<double> inputs, std::vector<double> targets)
    : input_dim_(input_dim) {
    if (input_dim == 0 || inputs.size() != input_dim * targets.size())
        throw InvalidArgument("batch inputs do not match input dimension and target count");
    const std::size_t n = targets.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double* ra = inputs.data() + a * input_dim;
        const double* rb = inputs.data() + b * input_dim;
        for (std::size_t d = 0; d < input_dim; ++d) {
            if (ra[d] != rb[d]) return ra[d] < rb[d];
        }
        return targets[a] < targets[b];
    });
    inputs_.resize(inputs.size());
    targets_.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        std::copy_n(inputs.data() + order[r] * input_dim, input_dim, inputs_.data() + r * input_dim);
        targets_[r] = targets[order[r]];
    }
}

BatchGradient batch_gradient(const Network& net, const TrainingBatch& batch) {
    if (batch.empty()) throw InvalidArgument("batch_gradient needs a non-empty batch");
    if (batch.input_dim() != net.structure().input_dim) throw InvalidArgument("batch dimension mismatch");

    const auto& layers = net.layers();
    const double* params = net.parameters().data();
    const std::size_t depth = layers.size();

    // acts[0] = input, acts[l] = output of layer l-1; deltas[l] = dE/dz for layer l.
    std::vector<std::vector<double>> acts(depth + 1);
    std::vector<std::vector<double>> deltas(depth);
    acts[0].resize(batch.input_dim());
    for (std::size_t l = 0; l < depth; ++l) {
        acts[l + 1].resize(layers[l].fan_out);
        deltas[l].resize(layers[l].fan_out);
    }

    BatchGradient result{0.0, Gradient{std::vector<double>(net.parameter_count(), 0.0)}};
    double* grad = result.gradient.values.data();

    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto x = batch.input(s);
        std::copy(x.begin(), x.end(), acts[0].begin());
        for (std::size_t l = 0; l < depth; ++l) eval_layer(params, layers[l], acts[l].data(), acts[l + 1].data(), l + 1 < depth);

        const double residual = acts[depth][0] - batch.target(s);
        result.error += 0.5 * residual * residual;
        deltas[depth - 1][0] = residual;

        for (std::size_t l = depth; l-- > 0;) {
            const auto& lay = layers[l];
            const double* a_in = acts[l].data();
            const double* d = deltas[l].data();
            double* gw = grad + lay.weight_offset;
            for (std::size_t i = 0; i < lay.fan_in; ++i) {
                const double a = a_in[i];
                double* row = gw + i * lay.fan_out;
                for (std::size_t j = 0; j < lay.fan_out; ++j) row[j] += a * d[j];
            }
            double* gb = grad + lay.bias_offset;
            for (std::size_t j = 0; j < lay.fan_out; ++j) gb[j] += d[j];

            if (l == 0) break;
            // Propagate to the previous (logistic) layer.
            const double* w = params + lay.weight_offset;
            double* d_prev = deltas[l - 1].data();
            for (std::size_t i = 0; i < lay.fan_in; ++i) {
                const double* row = w + i * lay.fan_out;
                double sum = 0.0;
                for (std::size_t j = 0; j < lay.fan_out; ++j) sum += row[j] * d[j];
                const double a = a_in[i];
                d_prev[i] = sum * a * (1.0 - a);
            }
        }
    }
    return result;
}

}  // namespace occupancy
