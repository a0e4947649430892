#include "occupancy/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include "csv.hpp"
#include "occupancy/errors.hpp"

namespace occupancy {

SensorSeries::SensorSeries(std::string room_id, std::vector<SensorRecord> records)
    : room_id_(std::move(room_id)), records_(std::move(records)) {
    segment_index_.resize(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (!(r.co2 >= 0.0) || !(r.rh >= 0.0 && r.rh <= 100.0) || !std::isfinite(r.t_in))
            throw DataError("sensor record out of range at " + format_timestamp(r.timestamp));
        if (i > 0 && records_[i - 1].timestamp >= r.timestamp)
            throw DataError("timestamps not strictly increasing at " + format_timestamp(r.timestamp));
        if (i == 0 || r.timestamp - records_[i - 1].timestamp != kSamplePeriod) segments_.push_back({i, i});
        segments_.back().end = i + 1;
        segment_index_[i] = segments_.size() - 1;
    }
}

std::size_t SensorSeries::segment_of(std::size_t i) const { return segment_index_.at(i); }

OccupancySchedule::OccupancySchedule(std::vector<OccupancyInterval> intervals) {
    for (auto& iv : intervals) {
        if (iv.end <= iv.start)
            throw DataError("interval end <= start for room " + iv.room_id + " at " + format_timestamp(iv.start));
        if (iv.occupants < 0) throw DataError("negative occupants for room " + iv.room_id);
        rooms_[iv.room_id].push_back(std::move(iv));
    }
    for (auto& [room, list] : rooms_) {
        std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
        for (std::size_t i = 1; i < list.size(); ++i) {
            if (list[i].start < list[i - 1].end)
                throw DataError("overlapping intervals for room " + room + ": " + format_timestamp(list[i - 1].start) +
                                " and " + format_timestamp(list[i].start));
        }
    }
}

const std::vector<OccupancyInterval>& OccupancySchedule::intervals(const std::string& room_id) const {
    static const std::vector<OccupancyInterval> empty;
    const auto it = rooms_.find(room_id);
    return it == rooms_.end() ? empty : it->second;
}

std::vector<OccupancyInterval> OccupancySchedule::all() const {
    std::vector<OccupancyInterval> out;
    for (const auto& [room, list] : rooms_) out.insert(out.end(), list.begin(), list.end());
    return out;
}

std::size_t OccupancySchedule::size() const {
    std::size_t n = 0;
    for (const auto& [room, list] : rooms_) n += list.size();
    return n;
}

std::optional<int> OccupancySchedule::lookup(const std::string& room_id, Timestamp t) const {
    const auto& list = intervals(room_id);
    auto it = std::upper_bound(list.begin(), list.end(), t, [](Timestamp v, const auto& iv) { return v < iv.start; });
    if (it == list.begin()) return std::nullopt;
    --it;
    if (it->contains(t)) return it->occupants;
    return std::nullopt;
}

MaskRule MaskRule::weekend(Minutes utc_offset) {
    MaskRule r;
    r.kind = MaskKind::weekend;
    r.utc_offset = utc_offset;
    return r;
}

MaskRule MaskRule::night(Minutes utc_offset, int start_minute, int end_minute) {
    if (!(0 <= start_minute && start_minute < end_minute && end_minute <= 24 * 60))
        throw InvalidArgument("night window must satisfy 0 <= start < end <= 24h");
    MaskRule r;
    r.kind = MaskKind::night;
    r.utc_offset = utc_offset;
    r.night_start_minute = start_minute;
    r.night_end_minute = end_minute;
    return r;
}

MaskRule MaskRule::implausible_co2(double ppm_per_minute, std::size_t guard) {
    if (!(ppm_per_minute > 0.0)) throw InvalidArgument("CO2 rate threshold must be positive");
    MaskRule r;
    r.kind = MaskKind::implausible_co2;
    r.co2_rate_threshold = ppm_per_minute;
    r.guard_samples = guard;
    return r;
}

MaskRule MaskRule::custom(std::vector<std::pair<Timestamp, Timestamp>> ranges) {
    MaskRule r;
    r.kind = MaskKind::custom;
    r.custom_ranges = std::move(ranges);
    return r;
}

std::vector<MaskRule> default_mask_rules(Minutes utc_offset) {
    return {MaskRule::weekend(utc_offset), MaskRule::night(utc_offset), MaskRule::implausible_co2()};
}

namespace {

struct HeaderMap {
    std::unordered_map<std::string, std::size_t> index;

    std::size_t require(const std::string& name) const {
        const auto it = index.find(name);
        if (it == index.end()) throw DataError("missing column '" + name + "' in header");
        return it->second;
    }
};

HeaderMap read_header(std::istream& stream, std::size_t& line_no) {
    std::string line;
    while (std::getline(stream, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        HeaderMap h;
        const auto fields = csv::split(line);
        for (std::size_t i = 0; i < fields.size(); ++i) h.index.emplace(std::string(fields[i]), i);
        return h;
    }
    throw DataError("empty input: header line expected");
}

std::string at_line(std::size_t line_no) { return " (line " + std::to_string(line_no) + ")"; }

}  // namespace

SensorSeries parse_sensor_log(std::istream& stream, const std::string& room_id) {
    std::size_t line_no = 0;
    const auto header = read_header(stream, line_no);
    const std::size_t c_ts = header.require("timestamp");
    const std::size_t c_rh = header.require("rh");
    const std::size_t c_t = header.require("t_in");
    const std::size_t c_co2 = header.require("co2");
    const std::size_t width = std::max({c_ts, c_rh, c_t, c_co2}) + 1;

    std::vector<SensorRecord> records;
    std::vector<std::size_t> lines;
    std::size_t missing = 0;
    std::string line;
    while (std::getline(stream, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(line);
        if (f.size() < width) throw DataError("too few fields" + at_line(line_no));
        Timestamp ts;
        try {
            ts = parse_timestamp(f[c_ts]);
        } catch (const InvalidArgument& e) {
            throw DataError(std::string(e.what()) + at_line(line_no));
        }
        if (!records.empty() && ts <= records.back().timestamp) {
            throw DataError("non-increasing timestamp " + std::string(f[c_ts]) + " at line " +
                            std::to_string(line_no) + ", previous at line " + std::to_string(lines.back()));
        }
        if (csv::is_missing(f[c_rh]) || csv::is_missing(f[c_t]) || csv::is_missing(f[c_co2])) {
            ++missing;
            continue;
        }
        const auto rh = csv::to_double(f[c_rh]);
        const auto t = csv::to_double(f[c_t]);
        const auto co2 = csv::to_double(f[c_co2]);
        if (!rh || !t || !co2) throw DataError("malformed number" + at_line(line_no));
        if (*co2 < 0.0 || *rh < 0.0 || *rh > 100.0) throw DataError("value out of range" + at_line(line_no));
        records.push_back({ts, *rh, *t, *co2});
        lines.push_back(line_no);
    }
    SensorSeries series(room_id, std::move(records));
    series.set_missing_rows(missing);
    return series;
}

OccupancySchedule parse_attendance(std::istream& stream) {
    std::size_t line_no = 0;
    const auto header = read_header(stream, line_no);
    const std::size_t c_room = header.require("room_id");
    const std::size_t c_start = header.require("start");
    const std::size_t c_end = header.require("end");
    const std::size_t c_n = header.require("occupants");
    const std::size_t width = std::max({c_room, c_start, c_end, c_n}) + 1;

    std::vector<OccupancyInterval> intervals;
    std::string line;
    while (std::getline(stream, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(line);
        if (f.size() < width || f[c_room].empty()) throw DataError("malformed attendance row" + at_line(line_no));
        OccupancyInterval iv;
        iv.room_id = std::string(f[c_room]);
        try {
            iv.start = parse_timestamp(f[c_start]);
            iv.end = parse_timestamp(f[c_end]);
        } catch (const InvalidArgument& e) {
            throw DataError(std::string(e.what()) + at_line(line_no));
        }
        const auto n = csv::to_integer(f[c_n]);
        if (!n) throw DataError("malformed occupant count" + at_line(line_no));
        if (*n < 0) throw DataError("negative occupants" + at_line(line_no));
        if (iv.end <= iv.start) throw DataError("end <= start" + at_line(line_no));
        iv.occupants = static_cast<int>(*n);
        intervals.push_back(std::move(iv));
    }
    return OccupancySchedule(std::move(intervals));
}

void write_sensor_log(std::ostream& out, const SensorSeries& series) {
    out << "timestamp,rh,t_in,co2\n";
    for (const auto& r : series.records()) {
        out << format_timestamp(r.timestamp) << ',' << csv::format_double(r.rh) << ',' << csv::format_double(r.t_in)
            << ',' << csv::format_double(r.co2) << '\n';
    }
}

void write_attendance(std::ostream& out, const OccupancySchedule& schedule) {
    out << "room_id,start,end,occupants\n";
    for (const auto& iv : schedule.all()) {
        out << iv.room_id << ',' << format_timestamp(iv.start) << ',' << format_timestamp(iv.end) << ','
            << iv.occupants << '\n';
    }
}

namespace {

void mark_implausible_co2(const SensorSeries& series, const MaskRule& rule, std::vector<bool>& excluded) {
    const auto& recs = series.records();
    for (const auto& seg : series.segments()) {
        // jump[i] is true when the step from i-1 to i exceeds the rate threshold.
        std::size_t i = seg.begin + 1;
        while (i < seg.end) {
            if (std::abs(recs[i].co2 - recs[i - 1].co2) <= rule.co2_rate_threshold) {
                ++i;
                continue;
            }
            std::size_t run_end = i;
            while (run_end + 1 < seg.end &&
                   std::abs(recs[run_end + 1].co2 - recs[run_end].co2) > rule.co2_rate_threshold)
                ++run_end;
            // Samples touched by the run are [i-1, run_end]; widen by the guard within the segment.
            const std::size_t lo = (i - 1 >= seg.begin + rule.guard_samples) ? i - 1 - rule.guard_samples : seg.begin;
            const std::size_t hi = std::min(seg.end - 1, run_end + rule.guard_samples);
            for (std::size_t j = lo; j <= hi; ++j) excluded[j] = true;
            i = run_end + 1;
        }
    }
}

}  // namespace

std::vector<bool> exclusion_mask(const SensorSeries& series, const std::vector<MaskRule>& rules) {
    const auto& recs = series.records();
    std::vector<bool> excluded(recs.size(), false);
    for (const auto& rule : rules) {
        switch (rule.kind) {
            case MaskKind::weekend:
                for (std::size_t i = 0; i < recs.size(); ++i) {
                    const auto wd = to_local(recs[i].timestamp, rule.utc_offset).weekday;
                    if (wd == 0 || wd == 6) excluded[i] = true;
                }
                break;
            case MaskKind::night:
                for (std::size_t i = 0; i < recs.size(); ++i) {
                    const auto m = to_local(recs[i].timestamp, rule.utc_offset).minute_of_day;
                    if (m >= rule.night_start_minute && m < rule.night_end_minute) excluded[i] = true;
                }
                break;
            case MaskKind::implausible_co2:
                mark_implausible_co2(series, rule, excluded);
                break;
            case MaskKind::custom:
                for (std::size_t i = 0; i < recs.size(); ++i) {
                    for (const auto& [from, to] : rule.custom_ranges) {
                        if (from <= recs[i].timestamp && recs[i].timestamp < to) excluded[i] = true;
                    }
                }
                break;
        }
    }
    return excluded;
}

SensorSeries apply_exclusions(const SensorSeries& series, const std::vector<MaskRule>& rules) {
    const auto excluded = exclusion_mask(series, rules);
    std::vector<SensorRecord> kept;
    kept.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!excluded[i]) kept.push_back(series.records()[i]);
    }
    SensorSeries out(series.room_id(), std::move(kept));
    out.set_missing_rows(series.missing_rows());
    return out;
}

std::vector<LabeledSample> label_samples(const SensorSeries& series, const OccupancySchedule& schedule) {
    const auto& list = schedule.intervals(series.room_id());
    std::vector<LabeledSample> out;
    out.reserve(series.size());
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const Timestamp t = series.records()[i].timestamp;
        while (cursor < list.size() && list[cursor].end <= t) ++cursor;
        std::optional<int> label;
        std::size_t hits = 0;
        for (std::size_t j = cursor; j < list.size() && list[j].start <= t; ++j) {
            if (list[j].contains(t)) {
                label = list[j].occupants;
                ++hits;
            }
        }
        if (hits > 1) throw DataError("sample " + format_timestamp(t) + " covered by more than one interval");
        out.push_back({t, i, series.segment_of(i), label});
    }
    return out;
}

OccupancySchedule with_vacant_periods(const OccupancySchedule& schedule, const std::string& room_id, Timestamp from,
                                      Timestamp to, Minutes utc_offset, int night_start_minute,
                                      int night_end_minute) {
    using namespace std::chrono;
    // Candidate vacant ranges per local day, merged when they touch.
    std::vector<std::pair<Timestamp, Timestamp>> vacant;
    for (Timestamp day = local_midnight(from, utc_offset); day < to; day += days{1}) {
        const auto wd = to_local(day, utc_offset).weekday;
        std::pair<Timestamp, Timestamp> range =
            (wd == 0 || wd == 6) ? std::pair{day, day + days{1}}
                                 : std::pair{day + minutes{night_start_minute}, day + minutes{night_end_minute}};
        range.first = std::max(range.first, from);
        range.second = std::min(range.second, to);
        if (range.first >= range.second) continue;
        if (!vacant.empty() && vacant.back().second == range.first)
            vacant.back().second = range.second;
        else
            vacant.push_back(range);
    }

    const auto& existing = schedule.intervals(room_id);
    std::vector<OccupancyInterval> result = schedule.all();
    for (auto [lo, hi] : vacant) {
        for (const auto& iv : existing) {
            if (iv.end <= lo || iv.start >= hi) continue;
            if (iv.start > lo) result.push_back({room_id, lo, iv.start, 0});
            lo = std::max(lo, iv.end);
            if (lo >= hi) break;
        }
        if (lo < hi) result.push_back({room_id, lo, hi, 0});
    }
    return OccupancySchedule(std::move(result));
}

}  // namespace occupancy
