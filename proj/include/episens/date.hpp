#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace episens {

/// Calendar day. Time-of-day is dropped on parse.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int y, unsigned m, unsigned d);

    /// Accepts `YYYY-MM-DD` optionally followed by `T...` or a space and a time.
    /// Throws InputError on anything else.
    static Date parse(std::string_view text);

    std::string iso() const;
    std::chrono::sys_days sys_days() const { return days_; }

    Date operator+(int n) const { return Date(days_ + std::chrono::days{n}); }
    Date operator-(int n) const { return Date(days_ - std::chrono::days{n}); }
    /// Signed number of days from `other` to this.
    int operator-(const Date& other) const { return static_cast<int>((days_ - other.days_).count()); }

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

}  // namespace episens
