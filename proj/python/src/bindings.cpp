#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "occupancy/cli.hpp"
#include "occupancy/dataset.hpp"
#include "occupancy/errors.hpp"
#include "occupancy/features.hpp"
#include "occupancy/metrics.hpp"
#include "occupancy/mlp.hpp"
#include "occupancy/model_io.hpp"
#include "occupancy/model_selection.hpp"
#include "occupancy/reconstruction.hpp"
#include "occupancy/rprop.hpp"
#include "occupancy/synth.hpp"

namespace py = pybind11;
using namespace occupancy;

namespace {

// Timestamps cross the boundary as ISO-8601 UTC strings.
std::string iso(Timestamp t) { return format_timestamp(t); }

TrainingBatch batch_from(const std::vector<std::vector<double>>& inputs, const std::vector<double>& targets) {
    if (inputs.size() != targets.size()) throw InvalidArgument("inputs and targets differ in length");
    const std::size_t dim = inputs.empty() ? 0 : inputs.front().size();
    std::vector<double> flat;
    for (const auto& row : inputs) {
        if (row.size() != dim) throw InvalidArgument("ragged input rows");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return TrainingBatch(dim, std::move(flat), targets);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Occupancy estimation with windowed sensor features and an RPROP+-trained MLP";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<DegenerateVariance>(m, "DegenerateVariance", PyExc_ArithmeticError);
    py::register_exception<TrainingDiverged>(m, "TrainingDiverged", PyExc_RuntimeError);

    // dataset
    py::class_<SensorRecord>(m, "SensorRecord")
        .def_property_readonly("timestamp", [](const SensorRecord& r) { return iso(r.timestamp); })
        .def_readonly("rh", &SensorRecord::rh)
        .def_readonly("t_in", &SensorRecord::t_in)
        .def_readonly("co2", &SensorRecord::co2);

    py::class_<SensorSeries>(m, "SensorSeries")
        .def_property_readonly("room_id", &SensorSeries::room_id)
        .def_property_readonly("records", &SensorSeries::records)
        .def_property_readonly("segments",
                               [](const SensorSeries& s) {
                                   std::vector<std::pair<std::size_t, std::size_t>> out;
                                   for (const auto& seg : s.segments()) out.emplace_back(seg.begin, seg.end);
                                   return out;
                               })
        .def_property_readonly("missing_rows", &SensorSeries::missing_rows)
        .def("__len__", &SensorSeries::size)
        .def("to_csv", [](const SensorSeries& s) {
            std::ostringstream os;
            write_sensor_log(os, s);
            return os.str();
        });

    py::class_<OccupancyInterval>(m, "OccupancyInterval")
        .def_readonly("room_id", &OccupancyInterval::room_id)
        .def_property_readonly("start", [](const OccupancyInterval& i) { return iso(i.start); })
        .def_property_readonly("end", [](const OccupancyInterval& i) { return iso(i.end); })
        .def_readonly("occupants", &OccupancyInterval::occupants);

    py::class_<OccupancySchedule>(m, "OccupancySchedule")
        .def("intervals", &OccupancySchedule::intervals, py::arg("room_id"))
        .def("all", &OccupancySchedule::all)
        .def("__len__", &OccupancySchedule::size)
        .def("to_csv", [](const OccupancySchedule& s) {
            std::ostringstream os;
            write_attendance(os, s);
            return os.str();
        });

    py::class_<MaskRule>(m, "MaskRule")
        .def_static("weekend", [](int offset_min) { return MaskRule::weekend(Minutes{offset_min}); },
                    py::arg("utc_offset_minutes") = 0)
        .def_static("night",
                    [](int offset_min, int start, int end) { return MaskRule::night(Minutes{offset_min}, start, end); },
                    py::arg("utc_offset_minutes") = 0, py::arg("start_minute") = 0, py::arg("end_minute") = 420)
        .def_static("implausible_co2", &MaskRule::implausible_co2, py::arg("ppm_per_minute") = 200.0,
                    py::arg("guard") = 2);

    py::class_<LabeledSample>(m, "LabeledSample")
        .def_property_readonly("timestamp", [](const LabeledSample& s) { return iso(s.timestamp); })
        .def_readonly("record_index", &LabeledSample::record_index)
        .def_readonly("segment_id", &LabeledSample::segment_id)
        .def_readonly("occupants", &LabeledSample::occupants);

    m.def("parse_sensor_log",
          [](const std::string& text, const std::string& room) {
              std::istringstream in(text);
              return parse_sensor_log(in, room);
          },
          py::arg("text"), py::arg("room_id"));
    m.def("parse_attendance",
          [](const std::string& text) {
              std::istringstream in(text);
              return parse_attendance(in);
          },
          py::arg("text"));
    m.def("apply_exclusions", &apply_exclusions, py::arg("series"), py::arg("rules"));
    m.def("label_samples", &label_samples, py::arg("series"), py::arg("schedule"));

    // features
    py::enum_<VariableCombo>(m, "VariableCombo")
        .value("RH_CO2", VariableCombo::rh_co2)
        .value("T_CO2", VariableCombo::t_co2)
        .value("RH_T", VariableCombo::rh_t);

    py::class_<WindowSpec>(m, "WindowSpec")
        .def(py::init<>())
        .def_static("parse", &WindowSpec::parse)
        .def("__str__", &WindowSpec::to_string)
        .def_property_readonly("counts", [](const WindowSpec& w) {
            std::vector<std::size_t> out;
            for (const auto& win : w.windows()) out.push_back(win.count());
            return out;
        });

    py::class_<FeatureVector>(m, "FeatureVector")
        .def_property_readonly("timestamp", [](const FeatureVector& v) { return iso(v.timestamp); })
        .def_readonly("values", &FeatureVector::values)
        .def_readonly("target", &FeatureVector::target);

    py::class_<FeatureSet>(m, "FeatureSet")
        .def_readonly("combo", &FeatureSet::combo)
        .def_readonly("vectors", &FeatureSet::vectors)
        .def("__len__", &FeatureSet::size);

    py::class_<Scaler>(m, "Scaler")
        .def_readonly("location", &Scaler::location)
        .def_readonly("scale", &Scaler::scale)
        .def("apply", &Scaler::apply);

    m.def("extract_feature_vector", &extract_feature_vector, py::arg("series"), py::arg("record_index"),
          py::arg("combo"), py::arg("spec") = WindowSpec{});
    m.def("build_feature_set", &build_feature_set, py::arg("labeled"), py::arg("series"), py::arg("combo"),
          py::arg("labeled_only"), py::arg("spec") = WindowSpec{});
    m.def("fit_scaler", &fit_scaler);
    m.def("apply_scaler", &apply_scaler);

    // mlp
    py::class_<NetworkStructure>(m, "NetworkStructure")
        .def(py::init([](std::vector<std::size_t> hidden, std::size_t input_dim) {
                 NetworkStructure s{input_dim, std::move(hidden), 1};
                 s.validate();
                 return s;
             }),
             py::arg("hidden"), py::arg("input_dim") = 10)
        .def_readonly("input_dim", &NetworkStructure::input_dim)
        .def_readonly("hidden", &NetworkStructure::hidden)
        .def("parameter_count", &NetworkStructure::parameter_count);

    py::class_<Network>(m, "Network")
        .def_property_readonly("structure", &Network::structure)
        .def_property(
            "parameters", [](const Network& n) { return std::vector<double>(n.parameters().begin(), n.parameters().end()); },
            [](Network& n, const std::vector<double>& p) {
                if (p.size() != n.parameter_count()) throw InvalidArgument("parameter count mismatch");
                std::copy(p.begin(), p.end(), n.parameters().begin());
            })
        .def("parameter_count", &Network::parameter_count);

    m.def("init_network", &init_network, py::arg("structure"), py::arg("seed"));
    m.def("sigmoid", &sigmoid);
    m.def("forward", [](const Network& net, const std::vector<double>& x) {
        auto r = forward(net, x);
        return py::make_tuple(r.prediction, r.activations);
    });
    m.def("predict", [](const Network& net, const std::vector<double>& x) { return predict(net, x); });
    m.def("batch_gradient",
          [](const Network& net, const std::vector<std::vector<double>>& inputs, const std::vector<double>& targets) {
              auto bg = batch_gradient(net, batch_from(inputs, targets));
              return py::make_tuple(bg.error, bg.gradient.values);
          },
          py::arg("net"), py::arg("inputs"), py::arg("targets"));

    // rprop
    py::class_<RpropConfig>(m, "RpropConfig")
        .def(py::init<>())
        .def_readwrite("eta_plus", &RpropConfig::eta_plus)
        .def_readwrite("eta_minus", &RpropConfig::eta_minus)
        .def_readwrite("delta_zero", &RpropConfig::delta_zero)
        .def_readwrite("delta_min", &RpropConfig::delta_min)
        .def_readwrite("delta_max", &RpropConfig::delta_max)
        .def_readwrite("threshold", &RpropConfig::threshold)
        .def_readwrite("stepmax", &RpropConfig::stepmax);

    py::class_<TrainerState>(m, "TrainerState")
        .def_static("initial", &TrainerState::initial)
        .def_readonly("step", &TrainerState::step)
        .def_readonly("prev_grad", &TrainerState::prev_grad)
        .def_readonly("prev_update", &TrainerState::prev_update)
        .def_readonly("epoch", &TrainerState::epoch);

    m.def("rprop_step", [](TrainerState& s, const std::vector<double>& g, const RpropConfig& c) {
        return rprop_step(s, g, c);
    });

    py::class_<TrainReport>(m, "TrainReport")
        .def_readonly("converged", &TrainReport::converged)
        .def_readonly("epochs", &TrainReport::epochs)
        .def_readonly("final_error", &TrainReport::final_error)
        .def_readonly("final_max_gradient", &TrainReport::final_max_gradient)
        .def_readonly("error_trace", &TrainReport::error_trace);

    m.def("train",
          [](const Network& net, const FeatureSet& scaled, const RpropConfig& c) {
              auto r = train(net, scaled, c);
              return py::make_tuple(r.network, r.report);
          },
          py::arg("net"), py::arg("scaled"), py::arg("config"));
    m.def("train_batch",
          [](const Network& net, const std::vector<std::vector<double>>& inputs, const std::vector<double>& targets,
             const RpropConfig& c) {
              auto r = train(net, batch_from(inputs, targets), c);
              return py::make_tuple(r.network, r.report);
          },
          py::arg("net"), py::arg("inputs"), py::arg("targets"), py::arg("config"));

    // model selection
    py::class_<FoldAssignment>(m, "FoldAssignment")
        .def_readonly("n", &FoldAssignment::n)
        .def_readonly("k", &FoldAssignment::k)
        .def_readonly("fold_of", &FoldAssignment::fold_of)
        .def("sizes", &FoldAssignment::sizes);
    m.def("make_folds", &make_folds, py::arg("n"), py::arg("k"), py::arg("seed"));

    py::class_<CandidateSpec>(m, "CandidateSpec")
        .def(py::init<VariableCombo, NetworkStructure>())
        .def_readonly("combo", &CandidateSpec::combo)
        .def_readonly("structure", &CandidateSpec::structure)
        .def("label", &CandidateSpec::label);

    py::class_<CVResult>(m, "CVResult")
        .def_readonly("candidate", &CVResult::candidate)
        .def_readonly("fold_mse", &CVResult::fold_mse)
        .def_readonly("converged", &CVResult::converged)
        .def_readonly("mean_mse", &CVResult::mean_mse)
        .def_readonly("std_mse", &CVResult::std_mse);

    py::class_<GridResult>(m, "GridResult")
        .def_readonly("ranked", &GridResult::ranked)
        .def_readonly("winner", &GridResult::winner);

    m.def("cross_validate", &cross_validate, py::arg("fs"), py::arg("candidate"), py::arg("folds"), py::arg("config"),
          py::arg("seed"), py::arg("candidate_index") = 0, py::arg("workers") = 1);
    m.def("grid_search",
          [](const std::map<VariableCombo, FeatureSet>& sets, const std::vector<CandidateSpec>& grid,
             const RpropConfig& c, std::uint64_t seed, std::size_t k, std::size_t workers) {
              return grid_search(sets, grid, c, seed, GridOptions{k, true, workers});
          },
          py::arg("featuresets"), py::arg("grid"), py::arg("config"), py::arg("seed"), py::arg("k") = 10,
          py::arg("workers") = 1);
    m.def("default_grid", [] { return make_grid(GridAxes::defaults()); });
    m.def("default_candidate", &default_candidate);

    // metrics
    py::class_<MetricReport>(m, "MetricReport")
        .def_readonly("n", &MetricReport::n)
        .def_readonly("mse", &MetricReport::mse)
        .def_readonly("rmse", &MetricReport::rmse)
        .def_readonly("mae", &MetricReport::mae)
        .def_readonly("r2", &MetricReport::r2)
        .def_readonly("p_value", &MetricReport::p_value);
    m.def("mse", [](const std::vector<double>& p, const std::vector<double>& o) { return mse(p, o); });
    m.def("mae", [](const std::vector<double>& p, const std::vector<double>& o) { return mae(p, o); });
    m.def("r_squared_with_p", [](const std::vector<double>& p, const std::vector<double>& o) {
        const auto c = r_squared_with_p(p, o);
        return py::make_tuple(c.r2, c.p_value);
    });
    m.def("evaluate", [](const std::vector<double>& p, const std::vector<double>& o) { return evaluate(p, o); });

    // synth
    py::class_<RoomScenario>(m, "RoomScenario")
        .def(py::init<>())
        .def_readwrite("room_id", &RoomScenario::room_id)
        .def_readwrite("volume_m3", &RoomScenario::volume_m3)
        .def_readwrite("outdoor_co2_ppm", &RoomScenario::outdoor_co2_ppm)
        .def_readwrite("air_change_per_h", &RoomScenario::air_change_per_h)
        .def_readwrite("co2_generation_lph", &RoomScenario::co2_generation_lph)
        .def_readwrite("moisture_pct_per_h", &RoomScenario::moisture_pct_per_h)
        .def_readwrite("co2_noise_ppm", &RoomScenario::co2_noise_ppm)
        .def_readwrite("rh_noise_pct", &RoomScenario::rh_noise_pct)
        .def_readwrite("t_noise_c", &RoomScenario::t_noise_c)
        .def_readwrite("co2_glitches", &RoomScenario::co2_glitches)
        .def_readwrite("seed", &RoomScenario::seed);

    m.def("simulate_school",
          [](RoomScenario scenario, const std::string& start, int days) {
              const Timestamp t0 = parse_timestamp(start);
              scenario.schedule = make_school_schedule(scenario.room_id, t0, days, scenario.seed);
              auto sim = simulate_classroom(scenario, t0, t0 + std::chrono::days{days});
              return py::make_tuple(sim.series, sim.schedule);
          },
          py::arg("scenario"), py::arg("start") = "2013-04-01T00:00:00Z", py::arg("days") = 14,
          "Simulate a weekday class timetable; returns (SensorSeries, OccupancySchedule).");

    // reconstruction
    py::class_<TrainedModel>(m, "TrainedModel")
        .def_readonly("network", &TrainedModel::network)
        .def_readonly("scaler", &TrainedModel::scaler)
        .def_readonly("combo", &TrainedModel::combo)
        .def("to_json", [](const TrainedModel& mdl) { return to_json(mdl).dump(2); });
    m.def("load_model", [](const std::string& path) { return load_model(path); });
    m.def("save_model", [](const TrainedModel& mdl, const std::string& path) { save_model(mdl, path); });

    py::class_<OccupancyEstimate>(m, "OccupancyEstimate")
        .def_property_readonly("timestamp", [](const OccupancyEstimate& e) { return iso(e.timestamp); })
        .def_readonly("raw", &OccupancyEstimate::raw)
        .def_readonly("rounded", &OccupancyEstimate::rounded)
        .def_readonly("clamped", &OccupancyEstimate::clamped)
        .def_readonly("reported", &OccupancyEstimate::reported);
    py::class_<ReconstructionSeries>(m, "ReconstructionSeries")
        .def_readonly("room_id", &ReconstructionSeries::room_id)
        .def_readonly("estimates", &ReconstructionSeries::estimates)
        .def("coverage", &ReconstructionSeries::coverage);
    m.def("reconstruct", &reconstruct, py::arg("model"), py::arg("series"), py::arg("schedule"));

    m.def("run_cli",
          [](std::vector<std::string> args) {
              args.insert(args.begin(), "occupancy");
              std::vector<const char*> argv;
              for (const auto& a : args) argv.push_back(a.c_str());
              std::ostringstream out, err;
              const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Run a CLI subcommand in-process; returns (exit_code, stdout, stderr).");
}
