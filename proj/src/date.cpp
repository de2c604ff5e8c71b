#include "episens/date.hpp"

#include <charconv>
#include <cstdio>

#include "episens/error.hpp"

namespace episens {

namespace {

template <typename T>
bool parse_digits(std::string_view s, T& out) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Date::Date(int y, unsigned m, unsigned d) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw InputError("invalid calendar date");
    days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text) {
    std::string_view s = text;
    if (const auto cut = s.find_first_of("T "); cut != std::string_view::npos) s = s.substr(0, cut);
    int y = 0;
    unsigned m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !parse_digits(s.substr(0, 4), y) ||
        !parse_digits(s.substr(5, 2), m) || !parse_digits(s.substr(8, 2), d)) {
        throw InputError("bad date '" + std::string(text) + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw InputError("bad date '" + std::string(text) + "'");
    return Date(std::chrono::sys_days{ymd});
}

std::string Date::iso() const {
    const std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace episens
