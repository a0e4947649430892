#include "occupancy/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>
#include <sstream>

#include "csv.hpp"
#include "occupancy/errors.hpp"

namespace occupancy {

std::string_view to_string(VariableCombo combo) {
    switch (combo) {
        case VariableCombo::rh_co2: return "rh_co2";
        case VariableCombo::t_co2: return "t_co2";
        case VariableCombo::rh_t: return "rh_t";
    }
    return "?";
}

VariableCombo parse_combo(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (const auto c : kAllCombos) {
        if (lower == to_string(c)) return c;
    }
    throw InvalidArgument("unknown variable combination '" + std::string(text) + "' (expected rh_co2, t_co2, rh_t)");
}

std::pair<Variable, Variable> variables_of(VariableCombo combo) {
    switch (combo) {
        case VariableCombo::rh_co2: return {Variable::rh, Variable::co2};
        case VariableCombo::t_co2: return {Variable::t_in, Variable::co2};
        case VariableCombo::rh_t: return {Variable::rh, Variable::t_in};
    }
    return {Variable::rh, Variable::co2};
}

bool uses_co2(VariableCombo combo) { return combo != VariableCombo::rh_t; }

double value_of(const SensorRecord& r, Variable v) {
    switch (v) {
        case Variable::rh: return r.rh;
        case Variable::t_in: return r.t_in;
        case Variable::co2: return r.co2;
    }
    return 0.0;
}

WindowSpec::WindowSpec() : windows_{{-30, -21}, {-20, -3}, {-2, 2}, {3, 20}, {21, 30}} {}

WindowSpec::WindowSpec(std::vector<Window> windows) : windows_(std::move(windows)) {
    if (windows_.empty()) throw InvalidArgument("window spec needs at least one window");
    for (std::size_t i = 0; i < windows_.size(); ++i) {
        if (windows_[i].first > windows_[i].last) throw InvalidArgument("window with first > last");
        if (i > 0 && windows_[i].first <= windows_[i - 1].last)
            throw InvalidArgument("windows must be ordered and disjoint");
    }
}

std::string WindowSpec::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < windows_.size(); ++i) {
        if (i) os << ',';
        os << windows_[i].first << ':' << windows_[i].last;
    }
    return os.str();
}

WindowSpec WindowSpec::parse(std::string_view text) {
    std::vector<Window> windows;
    for (const auto part : csv::split(text)) {
        const auto colon = part.find(':');
        if (colon == std::string_view::npos) throw InvalidArgument("window must be 'first:last'");
        const auto lo = csv::to_integer(csv::trim(part.substr(0, colon)));
        const auto hi = csv::to_integer(csv::trim(part.substr(colon + 1)));
        if (!lo || !hi) throw InvalidArgument("malformed window '" + std::string(part) + "'");
        windows.push_back({static_cast<int>(*lo), static_cast<int>(*hi)});
    }
    return WindowSpec(std::move(windows));
}

std::optional<FeatureVector> extract_feature_vector(const SensorSeries& series, std::size_t record_index,
                                                    VariableCombo combo, const WindowSpec& spec) {
    if (record_index >= series.size()) return std::nullopt;
    const auto seg_id = series.segment_of(record_index);
    const auto& seg = series.segments()[seg_id];
    const auto before = static_cast<std::size_t>(std::max(0, spec.context_before()));
    const auto after = static_cast<std::size_t>(std::max(0, spec.context_after()));
    if (record_index < seg.begin + before || record_index + after >= seg.end) return std::nullopt;

    const auto& recs = series.records();
    const auto [first, second] = variables_of(combo);
    FeatureVector fv;
    fv.timestamp = recs[record_index].timestamp;
    fv.segment_id = seg_id;
    fv.values.reserve(2 * spec.size());
    for (const Variable var : {first, second}) {
        for (const auto& w : spec.windows()) {
            double sum = 0.0;
            for (int off = w.first; off <= w.last; ++off) {
                sum += value_of(recs[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(record_index) + off)], var);
            }
            fv.values.push_back(sum / static_cast<double>(w.count()));
        }
    }
    return fv;
}

FeatureSet build_feature_set(const std::vector<LabeledSample>& labeled, const SensorSeries& series,
                             VariableCombo combo, bool labeled_only, const WindowSpec& spec) {
    FeatureSet fs;
    fs.combo = combo;
    fs.spec = spec;
    fs.room_id = series.room_id();
    for (const auto& sample : labeled) {
        if (labeled_only && !sample.occupants) continue;
        auto fv = extract_feature_vector(series, sample.record_index, combo, spec);
        if (!fv) continue;
        fv->target = sample.occupants;
        fs.vectors.push_back(std::move(*fv));
    }
    return fs;
}

FeatureSet subsample(const FeatureSet& fs, std::size_t stride) {
    if (stride == 0) throw InvalidArgument("stride must be >= 1");
    FeatureSet out{fs.combo, fs.spec, fs.room_id, {}};
    for (std::size_t i = 0; i < fs.size(); i += stride) out.vectors.push_back(fs.vectors[i]);
    return out;
}

FeatureSet concat(const std::vector<FeatureSet>& sets) {
    if (sets.empty()) return {};
    FeatureSet out{sets.front().combo, sets.front().spec, {}, {}};
    for (const auto& fs : sets) {
        if (fs.combo != out.combo || !(fs.spec == out.spec))
            throw InvalidArgument("cannot concatenate feature sets with different combos or windows");
        if (!out.room_id.empty()) out.room_id += ',';
        out.room_id += fs.room_id;
        out.vectors.insert(out.vectors.end(), fs.vectors.begin(), fs.vectors.end());
    }
    return out;
}

FeatureSet select(const FeatureSet& fs, const std::vector<std::size_t>& indices) {
    FeatureSet out{fs.combo, fs.spec, fs.room_id, {}};
    out.vectors.reserve(indices.size());
    for (const auto i : indices) out.vectors.push_back(fs.vectors.at(i));
    return out;
}

std::vector<double> Scaler::apply(const std::vector<double>& values) const {
    if (values.size() != dimension())
        throw InvalidArgument("scaler dimension " + std::to_string(dimension()) + " does not match input " +
                              std::to_string(values.size()));
    std::vector<double> out(values.size());
    for (std::size_t d = 0; d < values.size(); ++d) out[d] = (values[d] - location[d]) / scale[d];
    return out;
}

std::vector<double> Scaler::invert(const std::vector<double>& values) const {
    if (values.size() != dimension()) throw InvalidArgument("scaler dimension mismatch");
    std::vector<double> out(values.size());
    for (std::size_t d = 0; d < values.size(); ++d) out[d] = values[d] * scale[d] + location[d];
    return out;
}

Scaler fit_scaler(const FeatureSet& training) {
    if (training.empty()) throw InvalidArgument("cannot fit a scaler on an empty feature set");
    const std::size_t dim = training.vectors.front().values.size();
    const double n = static_cast<double>(training.size());
    Scaler s;
    s.location.assign(dim, 0.0);
    s.scale.assign(dim, 1.0);
    for (std::size_t d = 0; d < dim; ++d) {
        const double first = training.vectors.front().values[d];
        bool constant = true;
        double sum = 0.0;
        for (const auto& v : training.vectors) {
            sum += v.values[d];
            constant = constant && v.values[d] == first;
        }
        if (constant) {
            s.location[d] = first;
            continue;
        }
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& v : training.vectors) ss += (v.values[d] - mean) * (v.values[d] - mean);
        const double sd = std::sqrt(ss / n);
        s.location[d] = mean;
        s.scale[d] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
    }
    return s;
}

FeatureSet apply_scaler(const Scaler& scaler, const FeatureSet& fs) {
    FeatureSet out{fs.combo, fs.spec, fs.room_id, {}};
    out.vectors.reserve(fs.size());
    for (const auto& v : fs.vectors) {
        FeatureVector scaled = v;
        scaled.values = scaler.apply(v.values);
        out.vectors.push_back(std::move(scaled));
    }
    return out;
}

void write_feature_csv(std::ostream& out, const FeatureSet& fs) {
    out << "timestamp,target";
    for (std::size_t d = 1; d <= fs.dimension(); ++d) out << ",f" << d;
    out << '\n';
    for (const auto& v : fs.vectors) {
        out << format_timestamp(v.timestamp) << ',';
        if (v.target) out << *v.target;
        for (const double x : v.values) out << ',' << csv::format_double(x);
        out << '\n';
    }
}

}  // namespace occupancy
