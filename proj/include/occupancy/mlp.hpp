#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace occupancy {

struct NetworkStructure {
    std::size_t input_dim = 10;
    std::vector<std::size_t> hidden;  // one or two layers
    std::size_t output_dim = 1;

    void validate() const;  // throws InvalidArgument
    std::size_t parameter_count() const;
    std::string to_string() const;  // hidden sizes, e.g. "18,13"
    static NetworkStructure parse(std::string_view hidden_sizes, std::size_t input_dim = 10);

    bool operator==(const NetworkStructure&) const = default;
};

// Location of one layer inside the flat parameter vector. Weights are stored
// row-major with fan-in rows and fan-out columns: w(i, j) connects input i to
// unit j and lives at weight_offset + i * fan_out + j. Biases follow the weights.
struct LayerLayout {
    std::size_t fan_in;
    std::size_t fan_out;
    std::size_t weight_offset;
    std::size_t bias_offset;
};

// Logistic hidden layers and a linear scalar output.
class Network {
public:
    Network() = default;
    explicit Network(NetworkStructure structure);  // all parameters zero

    const NetworkStructure& structure() const { return structure_; }
    const std::vector<LayerLayout>& layers() const { return layers_; }

    std::span<const double> parameters() const { return params_; }
    std::span<double> parameters() { return params_; }
    std::size_t parameter_count() const { return params_.size(); }

    double weight(std::size_t layer, std::size_t in, std::size_t out) const;
    double& weight(std::size_t layer, std::size_t in, std::size_t out);
    double bias(std::size_t layer, std::size_t out) const;
    double& bias(std::size_t layer, std::size_t out);

    void apply_update(std::span<const double> delta);

    bool operator==(const Network& other) const {
        return structure_ == other.structure_ && params_ == other.params_;
    }

private:
    NetworkStructure structure_;
    std::vector<LayerLayout> layers_;
    std::vector<double> params_;
};

// Uniform on [-0.5, 0.5] in flat parameter order.
Network init_network(const NetworkStructure& structure, std::uint64_t seed);

double sigmoid(double x);

struct ForwardResult {
    double prediction;
    // activations[0] is the input; activations[l] the output of hidden layer l.
    std::vector<std::vector<double>> activations;
};

ForwardResult forward(const Network& net, std::span<const double> input);
// Same arithmetic as forward() without retaining activations.
double predict(const Network& net, std::span<const double> input);

struct Gradient {
    std::vector<double> values;  // congruent with Network::parameters()

    double max_abs() const;
};

// Row-major inputs with one target per row. Rows are kept in a canonical
// (lexicographic) order so that the accumulated error does not depend on the
// order in which samples were supplied.
class TrainingBatch {
public:
    TrainingBatch() = default;
    TrainingBatch(std::size_t input_dim, std::vector<double> inputs, std::vector<double> targets);

    std::size_t size() const { return targets_.size(); }
    bool empty() const { return targets_.empty(); }
    std::size_t input_dim() const { return input_dim_; }
    std::span<const double> input(std::size_t row) const {
        return {inputs_.data() + row * input_dim_, input_dim_};
    }
    double target(std::size_t row) const { return targets_[row]; }

private:
    std::size_t input_dim_ = 0;
    std::vector<double> inputs_;
    std::vector<double> targets_;
};

struct BatchGradient {
    double error;  // 0.5 * sum of squared residuals
    Gradient gradient;
};

BatchGradient batch_gradient(const Network& net, const TrainingBatch& batch);

}  // namespace occupancy
