#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "occupancy/time.hpp"

namespace occupancy {

struct SensorRecord {
    Timestamp timestamp;
    double rh;    // percent, 0..100
    double t_in;  // degrees Celsius
    double co2;   // ppm

    bool operator==(const SensorRecord&) const = default;
};

// Half-open index range [begin, end) into SensorSeries::records().
struct Segment {
    std::size_t begin;
    std::size_t end;

    std::size_t size() const { return end - begin; }
    bool operator==(const Segment&) const = default;
};

// Readings for one room. Segments are the maximal runs whose consecutive
// timestamps are exactly one sample period apart; they are recomputed on
// construction and never stored independently of the records.
class SensorSeries {
public:
    SensorSeries() = default;
    // Throws DataError if timestamps are not strictly increasing or values are out of range.
    SensorSeries(std::string room_id, std::vector<SensorRecord> records);

    const std::string& room_id() const { return room_id_; }
    const std::vector<SensorRecord>& records() const { return records_; }
    const std::vector<Segment>& segments() const { return segments_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    // Segment index holding record i.
    std::size_t segment_of(std::size_t i) const;

    // Rows dropped during parsing because a field was missing.
    std::size_t missing_rows() const { return missing_rows_; }
    void set_missing_rows(std::size_t n) { missing_rows_ = n; }

    bool operator==(const SensorSeries& other) const {
        return room_id_ == other.room_id_ && records_ == other.records_;
    }

private:
    std::string room_id_;
    std::vector<SensorRecord> records_;
    std::vector<Segment> segments_;
    std::vector<std::size_t> segment_index_;
    std::size_t missing_rows_ = 0;
};

// Occupied interval [start, end).
struct OccupancyInterval {
    std::string room_id;
    Timestamp start;
    Timestamp end;
    int occupants;  // students plus teacher

    bool contains(Timestamp t) const { return start <= t && t < end; }
    bool operator==(const OccupancyInterval&) const = default;
};

// Per-room, start-sorted, non-overlapping interval lists.
class OccupancySchedule {
public:
    OccupancySchedule() = default;
    // Validates and sorts. Throws DataError on overlap, end <= start or negative counts.
    explicit OccupancySchedule(std::vector<OccupancyInterval> intervals);

    const std::map<std::string, std::vector<OccupancyInterval>>& rooms() const { return rooms_; }
    const std::vector<OccupancyInterval>& intervals(const std::string& room_id) const;
    std::vector<OccupancyInterval> all() const;
    std::size_t size() const;
    bool empty() const { return size() == 0; }

    // Count for the interval containing t, if any.
    std::optional<int> lookup(const std::string& room_id, Timestamp t) const;

private:
    std::map<std::string, std::vector<OccupancyInterval>> rooms_;
};

enum class MaskKind { weekend, night, implausible_co2, custom };

struct MaskRule {
    MaskKind kind = MaskKind::custom;
    Minutes utc_offset{0};             // local civil time for weekend/night
    int night_start_minute = 0;        // [start, end) minutes after local midnight
    int night_end_minute = 7 * 60;
    double co2_rate_threshold = 200.0; // ppm per minute
    std::size_t guard_samples = 2;
    std::vector<std::pair<Timestamp, Timestamp>> custom_ranges;  // [start, end)

    static MaskRule weekend(Minutes utc_offset = Minutes{0});
    static MaskRule night(Minutes utc_offset = Minutes{0}, int start_minute = 0, int end_minute = 7 * 60);
    static MaskRule implausible_co2(double ppm_per_minute = 200.0, std::size_t guard = 2);
    static MaskRule custom(std::vector<std::pair<Timestamp, Timestamp>> ranges);
};

std::vector<MaskRule> default_mask_rules(Minutes utc_offset = Minutes{0});

struct LabeledSample {
    Timestamp timestamp;
    std::size_t record_index;
    std::size_t segment_id;
    std::optional<int> occupants;  // nullopt = unknown
};

// CSV header `timestamp,rh,t_in,co2`. Rows with an empty or `NA` field become gaps.
SensorSeries parse_sensor_log(std::istream& stream, const std::string& room_id);
// CSV header `room_id,start,end,occupants`.
OccupancySchedule parse_attendance(std::istream& stream);

void write_sensor_log(std::ostream& out, const SensorSeries& series);
void write_attendance(std::ostream& out, const OccupancySchedule& schedule);

// Which records each rule would remove. Entry i is true if record i is excluded.
std::vector<bool> exclusion_mask(const SensorSeries& series, const std::vector<MaskRule>& rules);
SensorSeries apply_exclusions(const SensorSeries& series, const std::vector<MaskRule>& rules);

std::vector<LabeledSample> label_samples(const SensorSeries& series, const OccupancySchedule& schedule);

// Zero-occupancy intervals covering every local night window and every local
// Saturday/Sunday in [from, to). Intervals that would overlap existing entries
// of `schedule` for the room are trimmed around them.
OccupancySchedule with_vacant_periods(const OccupancySchedule& schedule, const std::string& room_id, Timestamp from,
                                      Timestamp to, Minutes utc_offset, int night_start_minute = 0,
                                      int night_end_minute = 7 * 60);

}  // namespace occupancy
