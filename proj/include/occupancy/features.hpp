#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "occupancy/dataset.hpp"

namespace occupancy {

enum class Variable { rh, t_in, co2 };

// The model sees two of the three sensed variables.
enum class VariableCombo { rh_co2, t_co2, rh_t };

inline constexpr VariableCombo kAllCombos[] = {VariableCombo::rh_co2, VariableCombo::t_co2, VariableCombo::rh_t};

std::string_view to_string(VariableCombo combo);
VariableCombo parse_combo(std::string_view text);  // "rh_co2" | "t_co2" | "rh_t", case-insensitive
std::pair<Variable, Variable> variables_of(VariableCombo combo);
bool uses_co2(VariableCombo combo);

double value_of(const SensorRecord& r, Variable v);

// Inclusive sample offsets relative to the prediction instant.
struct Window {
    int first;
    int last;

    std::size_t count() const { return static_cast<std::size_t>(last - first + 1); }
    bool operator==(const Window&) const = default;
};

// Ordered, disjoint averaging windows. The default five windows span
// [-30, +30] minutes with 10, 18, 5, 18 and 10 samples.
class WindowSpec {
public:
    WindowSpec();
    explicit WindowSpec(std::vector<Window> windows);  // throws InvalidArgument if unordered/overlapping

    const std::vector<Window>& windows() const { return windows_; }
    std::size_t size() const { return windows_.size(); }
    int context_before() const { return -windows_.front().first; }
    int context_after() const { return windows_.back().last; }
    std::size_t features_per_variable() const { return windows_.size(); }

    // "-30:-21,-20:-3,-2:2,3:20,21:30"
    std::string to_string() const;
    static WindowSpec parse(std::string_view text);

    bool operator==(const WindowSpec&) const = default;

private:
    std::vector<Window> windows_;
};

struct FeatureVector {
    Timestamp timestamp;
    std::vector<double> values;  // window means of the first variable, then the second
    std::optional<int> target;
    std::size_t segment_id = 0;
};

struct FeatureSet {
    VariableCombo combo = VariableCombo::rh_co2;
    WindowSpec spec;
    std::string room_id;
    std::vector<FeatureVector> vectors;

    std::size_t size() const { return vectors.size(); }
    bool empty() const { return vectors.empty(); }
    std::size_t dimension() const { return 2 * spec.size(); }
};

// Returns nullopt unless the full window context around `record_index` lies
// in the same contiguous segment.
std::optional<FeatureVector> extract_feature_vector(const SensorSeries& series, std::size_t record_index,
                                                    VariableCombo combo, const WindowSpec& spec = {});

FeatureSet build_feature_set(const std::vector<LabeledSample>& labeled, const SensorSeries& series,
                             VariableCombo combo, bool labeled_only, const WindowSpec& spec = {});

// Keeps every `stride`-th vector, starting with the first.
FeatureSet subsample(const FeatureSet& fs, std::size_t stride);
// Concatenates sets sharing combo and window spec (e.g. several rooms).
FeatureSet concat(const std::vector<FeatureSet>& sets);
FeatureSet select(const FeatureSet& fs, const std::vector<std::size_t>& indices);

// Per-dimension z-score fitted on training rows only.
struct Scaler {
    std::vector<double> location;
    std::vector<double> scale;
    std::string method = "zscore";

    std::size_t dimension() const { return location.size(); }
    std::vector<double> apply(const std::vector<double>& values) const;
    std::vector<double> invert(const std::vector<double>& values) const;
    bool operator==(const Scaler&) const = default;
};

Scaler fit_scaler(const FeatureSet& training);
FeatureSet apply_scaler(const Scaler& scaler, const FeatureSet& fs);

void write_feature_csv(std::ostream& out, const FeatureSet& fs);

}  // namespace occupancy
