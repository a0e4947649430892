#include "occupancy/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "occupancy/errors.hpp"

namespace occupancy {
namespace {

class ValueParser {
public:
    ValueParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

    ConfigValue parse_all() {
        auto v = parse_value();
        skip_space();
        if (pos_ != text_.size()) fail("trailing characters after value");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw InvalidArgument("config line " + std::to_string(line_) + ": " + msg);
    }

    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    ConfigValue parse_value() {
        skip_space();
        if (pos_ >= text_.size()) fail("missing value");
        const char c = text_[pos_];
        if (c == '"') return {parse_string()};
        if (c == '[') return {parse_array()};
        std::size_t end = pos_;
        while (end < text_.size() && text_[end] != ',' && text_[end] != ']' && text_[end] != ' ' && text_[end] != '\t')
            ++end;
        const auto token = text_.substr(pos_, end - pos_);
        pos_ = end;
        if (token == "true") return {true};
        if (token == "false") return {false};
        if (const auto i = csv::to_integer(token)) return {static_cast<std::int64_t>(*i)};
        if (const auto d = csv::to_double(token)) return {*d};
        fail("cannot parse value '" + std::string(token) + "'");
    }

    std::string parse_string() {
        ++pos_;
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
            out += text_[pos_++];
        }
        if (pos_ >= text_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    ConfigArray parse_array() {
        ++pos_;
        ConfigArray out;
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return out;
        }
        while (true) {
            auto v = parse_value();
            if (std::holds_alternative<ConfigArray>(v.value)) fail("nested arrays are not supported");
            out.push_back(std::move(v));
            skip_space();
            if (pos_ >= text_.size()) fail("unterminated array");
            if (text_[pos_] == ']') {
                ++pos_;
                return out;
            }
            if (text_[pos_] != ',') fail("expected ',' in array");
            ++pos_;
            skip_space();
            if (pos_ < text_.size() && text_[pos_] == ']') {
                ++pos_;
                return out;
            }
        }
    }

    std::string_view text_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
    ConfigFile file;
    std::string section;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const auto raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = csv::trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw InvalidArgument("config line " + std::to_string(line_no) + ": malformed section header");
            section = std::string(csv::trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
        const auto key = csv::trim(line.substr(0, eq));
        if (key.empty()) throw InvalidArgument("config line " + std::to_string(line_no) + ": empty key");
        const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        if (file.values_.count(full)) throw InvalidArgument("config line " + std::to_string(line_no) + ": duplicate key " + full);
        file.values_[full] = ValueParser(csv::trim(line.substr(eq + 1)), line_no).parse_all();
    }
    return file;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

namespace {

[[noreturn]] void type_error(const std::string& key, const char* expected) {
    throw InvalidArgument("config key '" + key + "' must be " + expected);
}

}  // namespace

std::optional<std::string> ConfigFile::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&it->second.value)) return *s;
    type_error(key, "a string");
}

std::optional<double> ConfigFile::get_double(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* d = std::get_if<double>(&it->second.value)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&it->second.value)) return static_cast<double>(*i);
    type_error(key, "a number");
}

std::optional<std::int64_t> ConfigFile::get_int(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* i = std::get_if<std::int64_t>(&it->second.value)) return *i;
    if (const auto* d = std::get_if<double>(&it->second.value); d && *d == static_cast<double>(static_cast<std::int64_t>(*d)))
        return static_cast<std::int64_t>(*d);
    type_error(key, "an integer");
}

std::optional<bool> ConfigFile::get_bool(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* b = std::get_if<bool>(&it->second.value)) return *b;
    type_error(key, "a boolean");
}

std::optional<std::vector<std::string>> ConfigFile::get_strings(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&it->second.value)) return std::vector<std::string>{*s};
    const auto* arr = std::get_if<ConfigArray>(&it->second.value);
    if (!arr) type_error(key, "an array of strings");
    std::vector<std::string> out;
    for (const auto& v : *arr) {
        const auto* s = std::get_if<std::string>(&v.value);
        if (!s) type_error(key, "an array of strings");
        out.push_back(*s);
    }
    return out;
}

std::optional<std::vector<std::int64_t>> ConfigFile::get_ints(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    const auto* arr = std::get_if<ConfigArray>(&it->second.value);
    if (!arr) type_error(key, "an array of integers");
    std::vector<std::int64_t> out;
    for (const auto& v : *arr) {
        const auto* i = std::get_if<std::int64_t>(&v.value);
        if (!i) type_error(key, "an array of integers");
        out.push_back(*i);
    }
    return out;
}

PipelineConfig::PipelineConfig() {
    search.threshold = 0.3;
    final.threshold = 0.03;
}

std::vector<CandidateSpec> PipelineConfig::grid() const {
    return explicit_grid.empty() ? make_grid(grid_axes) : explicit_grid;
}

std::vector<MaskRule> PipelineConfig::mask_rules() const {
    std::vector<MaskRule> rules;
    if (vacancy == VacancyPolicy::exclude) {
        rules.push_back(MaskRule::weekend(utc_offset));
        rules.push_back(MaskRule::night(utc_offset, night_start_minute, night_end_minute));
    }
    if (mask_implausible_co2) rules.push_back(MaskRule::implausible_co2(co2_rate_threshold, guard_samples));
    return rules;
}

void PipelineConfig::validate() const {
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw InvalidArgument("split fraction must be in (0, 1)");
    if (feature_stride == 0) throw InvalidArgument("feature stride must be >= 1");
    if (folds < 2) throw InvalidArgument("need at least 2 folds");
    if (!(0 <= night_start_minute && night_start_minute < night_end_minute && night_end_minute <= 24 * 60))
        throw InvalidArgument("night window must satisfy 00:00 <= start < end <= 24:00");
    search.validate();
    final.validate();
    candidate.structure.validate();
}

int parse_clock_minutes(std::string_view hhmm) {
    if (hhmm.size() != 5 || hhmm[2] != ':') throw InvalidArgument("clock time must be HH:MM");
    const auto h = csv::to_integer(hhmm.substr(0, 2));
    const auto m = csv::to_integer(hhmm.substr(3, 2));
    if (!h || !m || *h < 0 || *h > 24 || *m < 0 || *m > 59 || (*h == 24 && *m != 0))
        throw InvalidArgument("clock time out of range: " + std::string(hhmm));
    return static_cast<int>(*h * 60 + *m);
}

SensorSource parse_sensor_source(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
        std::filesystem::path p{std::string(text)};
        return {p.stem().string(), p};
    }
    return {std::string(csv::trim(text.substr(0, eq))), std::filesystem::path(std::string(csv::trim(text.substr(eq + 1))))};
}

namespace {

std::vector<std::size_t> to_sizes(const std::vector<std::int64_t>& v, const std::string& key) {
    std::vector<std::size_t> out;
    for (const auto x : v) {
        if (x <= 0) throw InvalidArgument("config key '" + key + "' needs positive integers");
        out.push_back(static_cast<std::size_t>(x));
    }
    return out;
}

void read_rprop(const ConfigFile& f, const std::string& section, RpropConfig& c) {
    if (auto v = f.get_double(section + ".eta_plus")) c.eta_plus = *v;
    if (auto v = f.get_double(section + ".eta_minus")) c.eta_minus = *v;
    if (auto v = f.get_double(section + ".delta_zero")) c.delta_zero = *v;
    if (auto v = f.get_double(section + ".delta_min")) c.delta_min = *v;
    if (auto v = f.get_double(section + ".delta_max")) c.delta_max = *v;
    if (auto v = f.get_double(section + ".threshold")) c.threshold = *v;
    if (auto v = f.get_int(section + ".stepmax")) c.stepmax = static_cast<std::size_t>(*v);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> k = {
            "paths.sensors", "paths.attendance", "paths.output_dir",
            "mask.utc_offset", "mask.vacancy", "mask.night_start", "mask.night_end", "mask.implausible_co2",
            "mask.co2_rate_threshold", "mask.guard",
            "features.windows", "features.stride",
            "grid.combos", "grid.single_layer", "grid.first_layer", "grid.second_layer", "grid.structures",
            "grid.folds", "grid.reuse_partition",
            "train.split", "train.split_mode", "train.structure", "train.combo",
            "estimate.masked_only",
            "run.seed", "run.workers",
            "synth.days", "synth.start", "synth.room", "synth.seed", "synth.volume", "synth.outdoor_co2",
            "synth.air_change", "synth.co2_generation", "synth.moisture", "synth.co2_noise", "synth.rh_noise",
            "synth.t_noise", "synth.glitches", "synth.min_classes", "synth.max_classes", "synth.min_occupants",
            "synth.max_occupants",
        };
        for (const char* s : {"search", "final"}) {
            for (const char* p : {"eta_plus", "eta_minus", "delta_zero", "delta_min", "delta_max", "threshold", "stepmax"})
                k.insert(std::string(s) + "." + p);
        }
        return k;
    }();
    return keys;
}

}  // namespace

PipelineConfig pipeline_config_from(const ConfigFile& f, const std::filesystem::path& base_dir) {
    for (const auto& [key, value] : f.values()) {
        if (!known_keys().count(key)) throw InvalidArgument("unknown config key '" + key + "'");
    }
    auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() || base_dir.empty() ? p : base_dir / p; };

    PipelineConfig c;
    if (auto v = f.get_strings("paths.sensors")) {
        for (const auto& s : *v) {
            auto src = parse_sensor_source(s);
            src.path = resolve(src.path);
            c.sensors.push_back(src);
        }
    }
    if (auto v = f.get_string("paths.attendance")) c.attendance = resolve(*v);
    if (auto v = f.get_string("paths.output_dir")) c.output_dir = resolve(*v);

    if (auto v = f.get_string("mask.utc_offset")) c.utc_offset = parse_utc_offset(*v);
    if (auto v = f.get_string("mask.vacancy")) {
        if (*v == "zero")
            c.vacancy = VacancyPolicy::zero_label;
        else if (*v == "exclude")
            c.vacancy = VacancyPolicy::exclude;
        else
            throw InvalidArgument("mask.vacancy must be \"zero\" or \"exclude\"");
    }
    if (auto v = f.get_string("mask.night_start")) c.night_start_minute = parse_clock_minutes(*v);
    if (auto v = f.get_string("mask.night_end")) c.night_end_minute = parse_clock_minutes(*v);
    if (auto v = f.get_bool("mask.implausible_co2")) c.mask_implausible_co2 = *v;
    if (auto v = f.get_double("mask.co2_rate_threshold")) c.co2_rate_threshold = *v;
    if (auto v = f.get_int("mask.guard")) c.guard_samples = static_cast<std::size_t>(*v);

    if (auto v = f.get_string("features.windows")) c.window = WindowSpec::parse(*v);
    if (auto v = f.get_int("features.stride")) c.feature_stride = static_cast<std::size_t>(*v);
    const std::size_t input_dim = 2 * c.window.size();
    c.grid_axes.input_dim = input_dim;
    c.candidate.structure.input_dim = input_dim;

    if (auto v = f.get_strings("grid.combos")) {
        c.grid_axes.combos.clear();
        for (const auto& s : *v) c.grid_axes.combos.push_back(parse_combo(s));
    }
    if (auto v = f.get_ints("grid.single_layer")) c.grid_axes.single_layer = to_sizes(*v, "grid.single_layer");
    if (auto v = f.get_ints("grid.first_layer")) c.grid_axes.first_layer = to_sizes(*v, "grid.first_layer");
    if (auto v = f.get_ints("grid.second_layer")) c.grid_axes.second_layer = to_sizes(*v, "grid.second_layer");
    if (auto v = f.get_strings("grid.structures")) {
        for (const auto combo : c.grid_axes.combos) {
            for (const auto& s : *v) c.explicit_grid.push_back({combo, NetworkStructure::parse(s, input_dim)});
        }
    }
    if (auto v = f.get_int("grid.folds")) c.folds = static_cast<std::size_t>(*v);
    if (auto v = f.get_bool("grid.reuse_partition")) c.reuse_partition = *v;

    read_rprop(f, "search", c.search);
    read_rprop(f, "final", c.final);

    if (auto v = f.get_double("train.split")) c.split_fraction = *v;
    if (auto v = f.get_string("train.split_mode")) {
        if (*v == "shuffle")
            c.split_mode = SplitMode::shuffle;
        else if (*v == "time_block")
            c.split_mode = SplitMode::time_block;
        else
            throw InvalidArgument("train.split_mode must be \"shuffle\" or \"time_block\"");
    }
    if (auto v = f.get_string("train.structure")) c.candidate.structure = NetworkStructure::parse(*v, input_dim);
    if (auto v = f.get_string("train.combo")) c.candidate.combo = parse_combo(*v);

    if (auto v = f.get_bool("estimate.masked_only")) c.masked_only = *v;
    if (auto v = f.get_int("run.seed")) c.seed = static_cast<std::uint64_t>(*v);
    if (auto v = f.get_int("run.workers")) c.workers = static_cast<std::size_t>(std::max<std::int64_t>(1, *v));

    auto& s = c.synth;
    if (auto v = f.get_int("synth.days")) s.days = static_cast<int>(*v);
    if (auto v = f.get_string("synth.start")) s.start = *v;
    if (auto v = f.get_string("synth.room")) s.scenario.room_id = *v;
    if (auto v = f.get_int("synth.seed")) s.scenario.seed = static_cast<std::uint64_t>(*v);
    if (auto v = f.get_double("synth.volume")) s.scenario.volume_m3 = *v;
    if (auto v = f.get_double("synth.outdoor_co2")) s.scenario.outdoor_co2_ppm = *v;
    if (auto v = f.get_double("synth.air_change")) s.scenario.air_change_per_h = *v;
    if (auto v = f.get_double("synth.co2_generation")) s.scenario.co2_generation_lph = *v;
    if (auto v = f.get_double("synth.moisture")) s.scenario.moisture_pct_per_h = *v;
    if (auto v = f.get_double("synth.co2_noise")) s.scenario.co2_noise_ppm = *v;
    if (auto v = f.get_double("synth.rh_noise")) s.scenario.rh_noise_pct = *v;
    if (auto v = f.get_double("synth.t_noise")) s.scenario.t_noise_c = *v;
    if (auto v = f.get_int("synth.glitches")) s.scenario.co2_glitches = static_cast<std::size_t>(*v);
    if (auto v = f.get_int("synth.min_classes")) s.schedule.min_classes = static_cast<int>(*v);
    if (auto v = f.get_int("synth.max_classes")) s.schedule.max_classes = static_cast<int>(*v);
    if (auto v = f.get_int("synth.min_occupants")) s.schedule.min_occupants = static_cast<int>(*v);
    if (auto v = f.get_int("synth.max_occupants")) s.schedule.max_occupants = static_cast<int>(*v);
    s.schedule.utc_offset = c.utc_offset;

    c.validate();
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    return pipeline_config_from(ConfigFile::load(path), path.parent_path());
}

}  // namespace occupancy
