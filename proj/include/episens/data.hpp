#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "episens/date.hpp"

namespace episens {

/// Daily national counts. total_confirmed = quarantined + recovered + deceased on every row.
struct ObservedSeries {
    std::vector<Date> dates;
    std::vector<std::int64_t> quarantined;      ///< currently positive
    std::vector<std::int64_t> recovered;        ///< cumulative
    std::vector<std::int64_t> deceased;         ///< cumulative
    std::vector<std::int64_t> total_confirmed;  ///< cumulative

    std::size_t size() const { return dates.size(); }
    bool empty() const { return dates.empty(); }
    Date first_date() const { return dates.front(); }
    Date last_date() const { return dates.back(); }

    /// Index of `day`, or throws OutOfRange.
    std::size_t index_of(Date day) const;

    bool operator==(const ObservedSeries&) const = default;
};

/// Throws InconsistentSeries naming the first offending row.
void validate(const ObservedSeries& series);

/// National-trend CSV (`data`, `totale_positivi`, `dimessi_guariti`, `deceduti`, `totale_casi`;
/// other columns ignored). Errors: MissingColumn, MalformedRow, InconsistentSeries.
ObservedSeries parse_national_csv(std::string_view text);

/// Normalized `date,quarantined,recovered,deceased,total` CSV.
ObservedSeries parse_normalized_csv(std::string_view text);

/// Picks the dialect from the header row.
ObservedSeries parse_series_csv(std::string_view text);

std::string to_normalized_csv(const ObservedSeries& series);

/// Inclusive sub-series. Throws OutOfRange.
ObservedSeries slice_window(const ObservedSeries& series, Date start, Date end);

std::vector<double> as_doubles(const std::vector<std::int64_t>& counts);

/// Whole file as a string; throws InputError if unreadable.
std::string read_text_file(const std::string& path);

}  // namespace episens
