#include "occupancy/time.hpp"

#include <charconv>
#include <cstdio>

#include "occupancy/errors.hpp"

namespace occupancy {
namespace {

int read_digits(std::string_view text, std::size_t pos, std::size_t count) {
    if (pos + count > text.size()) throw InvalidArgument("truncated timestamp: " + std::string(text));
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, value);
    if (ec != std::errc{} || ptr != text.data() + pos + count)
        throw InvalidArgument("bad digits in timestamp: " + std::string(text));
    return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
    if (pos >= text.size() || text[pos] != c)
        throw InvalidArgument("malformed timestamp: " + std::string(text));
}

}  // namespace

Minutes parse_utc_offset(std::string_view text) {
    if (text == "Z" || text == "z") return Minutes{0};
    if (text.size() != 6 || (text[0] != '+' && text[0] != '-') || text[3] != ':')
        throw InvalidArgument("malformed UTC offset: " + std::string(text));
    const int hh = read_digits(text, 1, 2);
    const int mm = read_digits(text, 4, 2);
    if (hh > 23 || mm > 59) throw InvalidArgument("UTC offset out of range: " + std::string(text));
    const int total = hh * 60 + mm;
    return Minutes{text[0] == '-' ? -total : total};
}

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    const int y = read_digits(text, 0, 4);
    expect(text, 4, '-');
    const int mo = read_digits(text, 5, 2);
    expect(text, 7, '-');
    const int d = read_digits(text, 8, 2);
    if (text.size() <= 10 || (text[10] != 'T' && text[10] != ' '))
        throw InvalidArgument("malformed timestamp: " + std::string(text));
    const int hh = read_digits(text, 11, 2);
    expect(text, 13, ':');
    const int mi = read_digits(text, 14, 2);
    std::size_t pos = 16;
    int ss = 0;
    if (pos < text.size() && text[pos] == ':') {
        ss = read_digits(text, pos + 1, 2);
        pos += 3;
    }
    Minutes offset{0};
    if (pos < text.size()) offset = parse_utc_offset(text.substr(pos));

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh > 23 || mi > 59 || ss > 59)
        throw InvalidArgument("timestamp field out of range: " + std::string(text));
    return sys_days{ymd} + hours{hh} + minutes{mi} + seconds{ss} - offset;
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day_start = floor<days>(t);
    const year_month_day ymd{day_start};
    const hh_mm_ss hms{t - day_start};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

LocalTime to_local(Timestamp t, Minutes utc_offset) {
    using namespace std::chrono;
    const auto local = t + utc_offset;
    const auto day_start = floor<days>(local);
    const auto minute = duration_cast<minutes>(local - day_start).count();
    return {static_cast<int>(minute), weekday{day_start}.c_encoding()};
}

Timestamp local_midnight(Timestamp t, Minutes utc_offset) {
    using namespace std::chrono;
    const auto local = t + utc_offset;
    return Timestamp{floor<days>(local)} - utc_offset;
}

}  // namespace occupancy
