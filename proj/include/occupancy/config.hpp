#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "occupancy/dataset.hpp"
#include "occupancy/features.hpp"
#include "occupancy/model_selection.hpp"
#include "occupancy/rprop.hpp"
#include "occupancy/synth.hpp"

namespace occupancy {

// A small TOML subset: `[section]` headers, `key = value` pairs, `#` comments.
// Values are quoted strings, integers, floats, booleans, or flat arrays of those.
struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;
struct ConfigValue {
    std::variant<bool, std::int64_t, double, std::string, ConfigArray> value;
};

class ConfigFile {
public:
    static ConfigFile parse(std::string_view text);  // throws InvalidArgument with line numbers
    static ConfigFile load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::map<std::string, ConfigValue>& values() const { return values_; }

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::vector<std::string>> get_strings(const std::string& key) const;
    std::optional<std::vector<std::int64_t>> get_ints(const std::string& key) const;

private:
    std::map<std::string, ConfigValue> values_;  // "section.key"
};

enum class VacancyPolicy {
    zero_label,  // nights and weekends stay in the data as confirmed-vacant (0 occupants)
    exclude,     // nights and weekends are masked out
};

enum class SplitMode { shuffle, time_block };

struct SensorSource {
    std::string room_id;
    std::filesystem::path path;
};

struct SynthSettings {
    int days = 14;
    std::string start = "2013-04-01T00:00:00Z";
    RoomScenario scenario;
    ScheduleOptions schedule;
};

struct PipelineConfig {
    std::vector<SensorSource> sensors;
    std::filesystem::path attendance;
    std::filesystem::path output_dir = ".";

    Minutes utc_offset{0};
    VacancyPolicy vacancy = VacancyPolicy::zero_label;
    int night_start_minute = 0;
    int night_end_minute = 7 * 60;
    bool mask_implausible_co2 = true;
    double co2_rate_threshold = 200.0;
    std::size_t guard_samples = 2;

    WindowSpec window;
    std::size_t feature_stride = 1;

    GridAxes grid_axes = GridAxes::defaults();
    std::vector<CandidateSpec> explicit_grid;  // overrides grid_axes when non-empty
    std::size_t folds = 10;
    bool reuse_partition = true;

    RpropConfig search;  // threshold 0.3
    RpropConfig final;   // threshold 0.03
    double split_fraction = 0.75;
    SplitMode split_mode = SplitMode::shuffle;
    CandidateSpec candidate = default_candidate();

    bool masked_only = false;
    std::uint64_t seed = 1;
    std::size_t workers = 1;

    SynthSettings synth;

    PipelineConfig();
    std::vector<CandidateSpec> grid() const;
    std::vector<MaskRule> mask_rules() const;
    void validate() const;
};

// Unknown keys are rejected so that typos do not silently fall back to defaults.
PipelineConfig pipeline_config_from(const ConfigFile& file, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

SensorSource parse_sensor_source(std::string_view text);  // "room=path" or "path" (room = file stem)
int parse_clock_minutes(std::string_view hhmm);

}  // namespace occupancy
