#include "occupancy/reconstruction.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "csv.hpp"
#include "occupancy/errors.hpp"
#include "occupancy/model_io.hpp"

namespace occupancy {

std::vector<double> predict(const TrainedModel& model, const FeatureSet& raw) {
    if (raw.combo != model.combo) throw InvalidArgument("feature set combo does not match the model");
    if (!(raw.spec == model.window)) throw InvalidArgument("feature set windows do not match the model");
    std::vector<double> out;
    out.reserve(raw.size());
    for (const auto& v : raw.vectors) out.push_back(occupancy::predict(model.network, model.scaler.apply(v.values)));
    return out;
}

long round_half_away(double x) { return std::lround(x); }

ReconstructionSeries reconstruct(const TrainedModel& model, const SensorSeries& series,
                                 const OccupancySchedule& schedule) {
    if (model.scaler.dimension() != 2 * model.window.size() ||
        model.network.structure().input_dim != model.scaler.dimension())
        throw InvalidArgument("model network, scaler and window spec disagree on input dimension");
    const auto labeled = label_samples(series, schedule);
    const auto fs = build_feature_set(labeled, series, model.combo, false, model.window);
    const auto raw = predict(model, fs);

    ReconstructionSeries rs;
    rs.room_id = series.room_id();
    rs.total_samples = series.size();
    rs.estimates.reserve(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const long rounded = round_half_away(raw[i]);
        rs.estimates.push_back({fs.vectors[i].timestamp, raw[i], rounded, std::max(0L, rounded), fs.vectors[i].target});
    }
    return rs;
}

std::optional<MetricReport> reported_metrics(const ReconstructionSeries& rs) {
    std::vector<double> pred, obs;
    for (const auto& e : rs.estimates) {
        if (!e.reported) continue;
        pred.push_back(e.raw);
        obs.push_back(*e.reported);
    }
    if (pred.empty()) return std::nullopt;
    return evaluate(pred, obs);
}

void write_estimates_csv(std::ostream& out, const ReconstructionSeries& rs) {
    out << "timestamp,reported,raw,rounded,clamped\n";
    for (const auto& e : rs.estimates) {
        out << format_timestamp(e.timestamp) << ',';
        if (e.reported) out << *e.reported;
        out << ',' << csv::format_double(e.raw) << ',' << e.rounded << ',' << e.clamped << '\n';
    }
}

ReconstructionSeries read_estimates_csv(std::istream& in, const std::string& room_id, std::size_t total_samples) {
    ReconstructionSeries rs;
    rs.room_id = room_id;
    rs.total_samples = total_samples;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty estimates file");
    ++line_no;
    if (csv::trim(line) != "timestamp,reported,raw,rounded,clamped") throw DataError("unexpected estimates header");
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(line);
        const auto raw = f.size() == 5 ? csv::to_double(f[2]) : std::nullopt;
        const auto rounded = f.size() == 5 ? csv::to_integer(f[3]) : std::nullopt;
        const auto clamped = f.size() == 5 ? csv::to_integer(f[4]) : std::nullopt;
        if (!raw || !rounded || !clamped) throw DataError("malformed estimates row (line " + std::to_string(line_no) + ")");
        OccupancyEstimate e{parse_timestamp(f[0]), *raw, *rounded, *clamped, std::nullopt};
        if (!f[1].empty()) {
            const auto rep = csv::to_integer(f[1]);
            if (!rep) throw DataError("malformed reported count (line " + std::to_string(line_no) + ")");
            e.reported = static_cast<int>(*rep);
        }
        rs.estimates.push_back(e);
    }
    return rs;
}

void write_report_csv(std::ostream& out, const ReconstructionSeries& rs, const SensorSeries& series) {
    std::unordered_map<Timestamp::rep, std::size_t> index;
    for (std::size_t i = 0; i < series.size(); ++i) index.emplace(series.records()[i].timestamp.time_since_epoch().count(), i);
    out << "timestamp,co2,rh,t_in,reported,raw,rounded,clamped\n";
    for (const auto& e : rs.estimates) {
        const auto it = index.find(e.timestamp.time_since_epoch().count());
        if (it == index.end())
            throw InvalidArgument("estimate at " + format_timestamp(e.timestamp) + " has no sensor record");
        const auto& r = series.records()[it->second];
        out << format_timestamp(e.timestamp) << ',' << csv::format_double(r.co2) << ',' << csv::format_double(r.rh)
            << ',' << csv::format_double(r.t_in) << ',';
        if (e.reported) out << *e.reported;
        out << ',' << csv::format_double(e.raw) << ',' << e.rounded << ',' << e.clamped << '\n';
    }
}

void export_report(const ReconstructionSeries& rs, const SensorSeries& series, const std::filesystem::path& csv_path,
                   const std::filesystem::path& json_path) {
    std::ofstream csv_out(csv_path);
    if (!csv_out) throw DataError("cannot open " + csv_path.string() + " for writing");
    write_report_csv(csv_out, rs, series);
    csv_out.close();
    if (!csv_out) throw std::runtime_error("failed writing " + csv_path.string());

    std::size_t reported = 0, negative = 0;
    for (const auto& e : rs.estimates) {
        reported += e.reported.has_value();
        negative += e.raw < 0.0;
    }
    nlohmann::json summary = {
        {"room_id", rs.room_id},
        {"estimates", rs.estimates.size()},
        {"total_samples", rs.total_samples},
        {"coverage", rs.coverage()},
        {"reported_samples", reported},
        {"negative_raw_estimates", negative},
    };
    const auto metrics = reported_metrics(rs);
    summary["metrics"] = metrics ? to_json(*metrics) : nlohmann::json(nullptr);
    write_json(summary, json_path);
}

}  // namespace occupancy
