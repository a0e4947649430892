#include "occupancy/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "occupancy/errors.hpp"
#include "occupancy/model_io.hpp"
#include "occupancy/pipeline.hpp"

namespace occupancy::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flag values; unset optionals leave the config file value in place.
struct Overrides {
    std::string config_path;
    std::vector<std::string> sensors;
    std::string attendance;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> utc_offset;
    std::optional<std::string> vacancy;
    std::optional<std::size_t> stride;
    bool strict = false;

    // cv
    std::vector<std::string> combos;
    std::vector<std::string> structures;
    std::optional<std::size_t> folds;
    std::optional<double> search_threshold;
    std::optional<std::size_t> search_stepmax;
    bool resample_folds = false;

    // train
    std::optional<std::string> structure;
    std::optional<std::string> combo;
    std::optional<double> final_threshold;
    std::optional<std::size_t> final_stepmax;
    std::optional<double> split;
    std::optional<std::string> split_mode;
    bool trace = false;

    // estimate / report
    std::string model_path;
    bool masked_only = false;

    // synth
    std::optional<int> days;
    std::optional<std::uint64_t> synth_seed;
    std::optional<std::string> start;
    std::optional<std::string> room;
    std::optional<std::size_t> glitches;
};

PipelineConfig resolve_config(const Overrides& o) {
    std::string path = o.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv(kConfigEnv)) path = env;
    }
    PipelineConfig c = path.empty() ? PipelineConfig{} : load_pipeline_config(path);

    if (!o.sensors.empty()) {
        c.sensors.clear();
        for (const auto& s : o.sensors) c.sensors.push_back(parse_sensor_source(s));
    }
    if (!o.attendance.empty()) c.attendance = o.attendance;
    if (!o.out_dir.empty()) c.output_dir = o.out_dir;
    if (o.seed) c.seed = *o.seed;
    if (o.workers) c.workers = std::max<std::size_t>(1, *o.workers);
    if (o.utc_offset) c.utc_offset = parse_utc_offset(*o.utc_offset);
    if (o.vacancy) c.vacancy = *o.vacancy == "exclude" ? VacancyPolicy::exclude : VacancyPolicy::zero_label;
    if (o.stride) c.feature_stride = *o.stride;

    if (!o.combos.empty()) {
        c.grid_axes.combos.clear();
        for (const auto& s : o.combos) c.grid_axes.combos.push_back(parse_combo(s));
        if (!c.explicit_grid.empty()) {
            std::vector<NetworkStructure> shapes;
            for (const auto& cand : c.explicit_grid) {
                if (std::find(shapes.begin(), shapes.end(), cand.structure) == shapes.end()) shapes.push_back(cand.structure);
            }
            c.explicit_grid.clear();
            for (const auto combo : c.grid_axes.combos) {
                for (const auto& s : shapes) c.explicit_grid.push_back({combo, s});
            }
        }
    }
    if (!o.structures.empty()) {
        c.explicit_grid.clear();
        for (const auto combo : c.grid_axes.combos) {
            for (const auto& s : o.structures)
                c.explicit_grid.push_back({combo, NetworkStructure::parse(s, 2 * c.window.size())});
        }
    }
    if (o.folds) c.folds = *o.folds;
    if (o.search_threshold) c.search.threshold = *o.search_threshold;
    if (o.search_stepmax) c.search.stepmax = *o.search_stepmax;
    if (o.resample_folds) c.reuse_partition = false;

    if (o.structure) c.candidate.structure = NetworkStructure::parse(*o.structure, 2 * c.window.size());
    if (o.combo) c.candidate.combo = parse_combo(*o.combo);
    if (o.final_threshold) c.final.threshold = *o.final_threshold;
    if (o.final_stepmax) c.final.stepmax = *o.final_stepmax;
    if (o.split) c.split_fraction = *o.split;
    if (o.split_mode) c.split_mode = *o.split_mode == "time_block" ? SplitMode::time_block : SplitMode::shuffle;
    if (o.masked_only) c.masked_only = true;

    if (o.days) c.synth.days = *o.days;
    if (o.synth_seed) c.synth.scenario.seed = *o.synth_seed;
    if (o.start) c.synth.start = *o.start;
    if (o.room) c.synth.scenario.room_id = *o.room;
    if (o.glitches) c.synth.scenario.co2_glitches = *o.glitches;
    c.synth.schedule.utc_offset = c.utc_offset;

    c.validate();
    return c;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    return out;
}

std::string file_safe(const std::string& room) {
    std::string s = room;
    for (auto& ch : s) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_')) ch = '_';
    }
    return s;
}

int cmd_synth(const PipelineConfig& c, std::ostream& out) {
    ensure_dir(c.output_dir);
    auto scenario = c.synth.scenario;
    const Timestamp start = parse_timestamp(c.synth.start);
    const Timestamp end = start + std::chrono::days{c.synth.days};
    scenario.schedule = make_school_schedule(scenario.room_id, start, c.synth.days, scenario.seed, c.synth.schedule);
    const auto sim = simulate_classroom(scenario, start, end);

    const std::string sensor_name = "sensors_" + file_safe(scenario.room_id) + ".csv";
    auto s_out = open_out(c.output_dir / sensor_name);
    write_sensor_log(s_out, sim.series);
    auto a_out = open_out(c.output_dir / "attendance.csv");
    write_attendance(a_out, sim.schedule);

    auto cfg = open_out(c.output_dir / "run.toml");
    cfg << "# Generated by `occupancy synth`; paths are relative to this file.\n"
        << "[paths]\n"
        << "sensors = [\"" << scenario.room_id << '=' << sensor_name << "\"]\n"
        << "attendance = \"attendance.csv\"\n"
        << "output_dir = \".\"\n\n"
        << "[run]\nseed = " << c.seed << "\n";

    out << "synthesized " << sim.series.size() << " samples and " << sim.schedule.size() << " classes for room "
        << scenario.room_id << " into " << c.output_dir.string() << '\n';
    return kExitOk;
}

int cmd_ingest(const PipelineConfig& c, std::ostream& out) {
    const auto data = load_dataset(c);
    const auto prepared = prepare(data, c);
    json rooms = json::array();
    for (std::size_t r = 0; r < data.series.size(); ++r) {
        std::size_t reported = 0, vacant = 0, unknown = 0;
        for (const auto& s : prepared.samples[r]) {
            if (!s.occupants)
                ++unknown;
            else if (data.attendance.lookup(data.series[r].room_id(), s.timestamp))
                ++reported;
            else
                ++vacant;
        }
        const auto fs = build_feature_set(prepared.samples[r], prepared.masked[r], c.candidate.combo, true, c.window);
        rooms.push_back({{"room_id", data.series[r].room_id()},
                         {"records", data.series[r].size()},
                         {"segments", data.series[r].segments().size()},
                         {"missing_rows", data.series[r].missing_rows()},
                         {"retained_after_masking", prepared.masked[r].size()},
                         {"masked_segments", prepared.masked[r].segments().size()},
                         {"labeled_reported", reported},
                         {"labeled_vacant", vacant},
                         {"unknown", unknown},
                         {"training_vectors", fs.size()}});
    }
    const json summary = {{"rooms", rooms}, {"attendance_intervals", data.attendance.size()}};
    ensure_dir(c.output_dir);
    write_json(summary, c.output_dir / "ingest_summary.json");
    out << summary.dump(2) << '\n';
    return kExitOk;
}

int cmd_cv(const PipelineConfig& c, bool strict, std::ostream& out) {
    const auto prepared = prepare(load_dataset(c), c);
    const auto result = run_grid_search(prepared, c);
    ensure_dir(c.output_dir);
    auto csv_out = open_out(c.output_dir / "cv_results.csv");
    write_cv_csv(csv_out, result);
    csv_out.close();
    write_json(to_json(result), c.output_dir / "grid_summary.json");
    bool all_converged = true;
    for (const auto& r : result.ranked) {
        for (const bool b : r.converged) all_converged = all_converged && b;
    }
    out << "winner " << result.winner.label() << " mean MSE " << result.ranked.front().mean_mse << " over "
        << result.ranked.size() << " candidates\n";
    if (strict && !all_converged) throw NotConverged("at least one fold did not reach the gradient threshold");
    return kExitOk;
}

int cmd_train(const PipelineConfig& c, bool strict, bool trace, std::ostream& out) {
    const auto prepared = prepare(load_dataset(c), c);
    const auto result = train_final(prepared, c.candidate, c);
    ensure_dir(c.output_dir);
    save_model(result.model, c.output_dir / "model.json");
    const json report = {{"candidate", {{"combo", std::string(to_string(c.candidate.combo))},
                                        {"structure", c.candidate.structure.hidden}}},
                         {"training", to_json(result.report, trace)},
                         {"holdout", to_json(result.holdout)}};
    write_json(report, c.output_dir / "train_report.json");
    out << "trained " << c.candidate.label() << " in " << result.report.epochs << " epochs"
        << (result.report.converged ? "" : " (threshold not reached)") << "; holdout MSE " << result.holdout.mse
        << " MAE " << result.holdout.mae;
    if (result.holdout.r2) out << " R2 " << *result.holdout.r2;
    out << '\n';
    if (strict && !result.report.converged) throw NotConverged("final training did not reach the gradient threshold");
    return kExitOk;
}

fs::path model_path(const PipelineConfig& c, const std::string& flag) {
    return flag.empty() ? c.output_dir / "model.json" : fs::path(flag);
}

int cmd_estimate(const PipelineConfig& c, const std::string& model_flag, std::ostream& out) {
    const auto model = load_model(model_path(c, model_flag));
    const auto data = load_dataset(c);
    const auto prepared = prepare(data, c);
    ensure_dir(c.output_dir);
    for (std::size_t r = 0; r < data.series.size(); ++r) {
        const auto rs = estimate_room(model, data.series[r], prepared, r, data.attendance, c.masked_only);
        auto f = open_out(c.output_dir / ("estimates_" + file_safe(rs.room_id) + ".csv"));
        write_estimates_csv(f, rs);
        out << "room " << rs.room_id << ": " << rs.estimates.size() << " estimates, coverage " << rs.coverage() << '\n';
    }
    return kExitOk;
}

int cmd_report(const PipelineConfig& c, std::ostream& out) {
    const auto data = load_dataset(c);
    const auto prepared = prepare(data, c);
    for (std::size_t r = 0; r < data.series.size(); ++r) {
        const auto& series = c.masked_only ? prepared.masked[r] : data.series[r];
        const std::string room = file_safe(series.room_id());
        const auto path = c.output_dir / ("estimates_" + room + ".csv");
        std::ifstream in(path);
        if (!in) throw DataError("cannot open " + path.string() + " (run `estimate` first)");
        const auto rs = read_estimates_csv(in, series.room_id(), series.size());
        export_report(rs, series, c.output_dir / ("report_" + room + ".csv"), c.output_dir / ("report_" + room + ".json"));
        out << "room " << series.room_id() << ": wrote report_" << room << ".csv and report_" << room << ".json\n";
    }
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Occupancy estimation from indoor CO2, humidity and temperature"};
    app.require_subcommand(1);
    Overrides o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, std::string("Pipeline config file (default: $") + kConfigEnv + ")");
        sub->add_option("--sensors", o.sensors, "Sensor CSV as room=path (repeatable)");
        sub->add_option("--attendance", o.attendance, "Attendance CSV");
        sub->add_option("--out-dir", o.out_dir, "Output directory");
        sub->add_option("--seed", o.seed, "Master seed");
        sub->add_option("--workers", o.workers, "Worker threads for cross-validation");
        sub->add_option("--utc-offset", o.utc_offset, "Local time offset for night/weekend rules, e.g. +01:00");
        sub->add_option("--vacancy", o.vacancy, "Nights and weekends: zero (label as vacant) or exclude (mask out)")
            ->check(CLI::IsMember({"zero", "exclude"}));
        sub->add_option("--stride", o.stride, "Keep every n-th labelled feature vector");
    };

    auto* synth = app.add_subcommand("synth", "Write a synthetic classroom dataset and a starter run.toml");
    add_common(synth);
    synth->add_option("--days", o.days, "Days to simulate");
    synth->add_option("--synth-seed", o.synth_seed, "Simulation seed (defaults to --seed)");
    synth->add_option("--start", o.start, "First simulated instant (ISO-8601)");
    synth->add_option("--room", o.room, "Room identifier");
    synth->add_option("--glitches", o.glitches, "Number of implausible CO2 bursts to inject");

    auto* ingest = app.add_subcommand("ingest", "Validate the datasets and summarize masking and labelling");
    add_common(ingest);

    auto* cv = app.add_subcommand("cv", "Cross-validated grid search over structures and variable combinations");
    add_common(cv);
    cv->add_option("--combos", o.combos, "Variable combinations (rh_co2, t_co2, rh_t)");
    cv->add_option("--structures", o.structures, "Explicit hidden-layer lists, e.g. 18,13 (repeatable)");
    cv->add_option("--folds", o.folds, "Number of folds");
    cv->add_option("--threshold", o.search_threshold, "Gradient threshold for the search phase");
    cv->add_option("--stepmax", o.search_stepmax, "Epoch budget per fold");
    cv->add_flag("--resample-folds", o.resample_folds, "Draw a fresh fold partition per candidate");
    cv->add_flag("--strict", o.strict, "Exit 3 if any fold fails to converge");

    auto* trn = app.add_subcommand("train", "Train one candidate on a train/holdout split and write model.json");
    add_common(trn);
    trn->add_option("--structure", o.structure, "Hidden layer sizes, e.g. 18,13");
    trn->add_option("--combo", o.combo, "Variable combination");
    trn->add_option("--threshold", o.final_threshold, "Gradient threshold for final training");
    trn->add_option("--stepmax", o.final_stepmax, "Epoch budget");
    trn->add_option("--split", o.split, "Training fraction");
    trn->add_option("--split-mode", o.split_mode, "shuffle or time_block")->check(CLI::IsMember({"shuffle", "time_block"}));
    trn->add_flag("--trace", o.trace, "Include the per-epoch error trace in train_report.json");
    trn->add_flag("--strict", o.strict, "Exit 3 if the gradient threshold is not reached");

    auto* est = app.add_subcommand("estimate", "Reconstruct occupancy over the sensed timeline");
    add_common(est);
    est->add_option("--model", o.model_path, "Model file (default: <out-dir>/model.json)");
    est->add_flag("--masked-only", o.masked_only, "Only estimate on the masked modelling timeline");

    auto* rep = app.add_subcommand("report", "Join estimates with the sensor series into report CSV/JSON");
    add_common(rep);
    rep->add_flag("--masked-only", o.masked_only, "Estimates were produced with --masked-only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        auto config = resolve_config(o);
        if (synth->parsed()) {
            if (!o.synth_seed && o.seed) config.synth.scenario.seed = *o.seed;
            return cmd_synth(config, out);
        }
        if (ingest->parsed()) return cmd_ingest(config, out);
        if (cv->parsed()) return cmd_cv(config, o.strict, out);
        if (trn->parsed()) return cmd_train(config, o.strict, o.trace, out);
        if (est->parsed()) return cmd_estimate(config, o.model_path, out);
        if (rep->parsed()) return cmd_report(config, out);
    } catch (const NotConverged& e) {
        err << "not converged: " << e.what() << '\n';
        return kExitNotConverged;
    } catch (const InvalidArgument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace occupancy::cli
