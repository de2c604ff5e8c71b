#include "episens/data.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "episens/error.hpp"

namespace episens {

namespace {

// Splits one CSV record; honors double-quoted fields (the upstream notes columns use them).
std::vector<std::string> split_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                field.push_back('"');
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        pos = end + 1;
    }
    return lines;
}

std::int64_t parse_count(const std::string& raw, std::size_t row, const char* column) {
    std::string_view s = raw;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw MalformedRow("row " + std::to_string(row) + ": non-integer " + column + " '" + raw + "'");
    }
    return v;
}

struct Dialect {
    std::array<const char*, 5> columns;  // date, quarantined, recovered, deceased, total
};

constexpr Dialect kNational{{"data", "totale_positivi", "dimessi_guariti", "deceduti", "totale_casi"}};
constexpr Dialect kNormalized{{"date", "quarantined", "recovered", "deceased", "total"}};

ObservedSeries parse_with(std::string_view text, const Dialect& dialect) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw MissingColumn("empty input: no header row");
    const auto header = split_record(lines[0]);
    std::array<std::size_t, 5> col{};
    for (std::size_t c = 0; c < col.size(); ++c) {
        std::optional<std::size_t> found;
        for (std::size_t h = 0; h < header.size(); ++h) {
            if (header[h] == dialect.columns[c]) found = h;
        }
        if (!found) throw MissingColumn(std::string("missing column '") + dialect.columns[c] + "'");
        col[c] = *found;
    }

    ObservedSeries series;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const std::size_t row = k - 1;
        const auto fields = split_record(lines[k]);
        for (std::size_t c : col) {
            if (c >= fields.size()) throw MalformedRow("row " + std::to_string(row) + ": too few fields");
        }
        try {
            series.dates.push_back(Date::parse(fields[col[0]]));
        } catch (const InputError&) {
            throw MalformedRow("row " + std::to_string(row) + ": bad date '" + fields[col[0]] + "'");
        }
        series.quarantined.push_back(parse_count(fields[col[1]], row, dialect.columns[1]));
        series.recovered.push_back(parse_count(fields[col[2]], row, dialect.columns[2]));
        series.deceased.push_back(parse_count(fields[col[3]], row, dialect.columns[3]));
        series.total_confirmed.push_back(parse_count(fields[col[4]], row, dialect.columns[4]));
    }
    validate(series);
    return series;
}

}  // namespace

std::size_t ObservedSeries::index_of(Date day) const {
    if (empty() || day < first_date() || day > last_date()) {
        throw OutOfRange("date " + day.iso() + " outside series range");
    }
    return static_cast<std::size_t>(day - first_date());
}

void validate(const ObservedSeries& s) {
    const std::size_t n = s.dates.size();
    if (s.quarantined.size() != n || s.recovered.size() != n || s.deceased.size() != n ||
        s.total_confirmed.size() != n) {
        throw InconsistentSeries("column lengths differ");
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::string at = "row " + std::to_string(k) + ": ";
        if (s.quarantined[k] < 0 || s.recovered[k] < 0 || s.deceased[k] < 0) {
            throw InconsistentSeries(at + "negative count");
        }
        if (s.quarantined[k] + s.recovered[k] + s.deceased[k] != s.total_confirmed[k]) {
            throw InconsistentSeries(at + "quarantined + recovered + deceased != total");
        }
        if (k == 0) continue;
        if (s.dates[k] - s.dates[k - 1] != 1) {
            throw InconsistentSeries(at + "dates are not consecutive days (" + s.dates[k - 1].iso() +
                                     " -> " + s.dates[k].iso() + ")");
        }
        if (s.recovered[k] < s.recovered[k - 1] || s.deceased[k] < s.deceased[k - 1] ||
            s.total_confirmed[k] < s.total_confirmed[k - 1]) {
            throw InconsistentSeries(at + "cumulative count decreased");
        }
    }
}

ObservedSeries parse_national_csv(std::string_view text) { return parse_with(text, kNational); }

ObservedSeries parse_normalized_csv(std::string_view text) { return parse_with(text, kNormalized); }

ObservedSeries parse_series_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (!lines.empty()) {
        for (const auto& h : split_record(lines[0])) {
            if (h == "totale_casi" || h == "data") return parse_national_csv(text);
        }
    }
    return parse_normalized_csv(text);
}

std::string to_normalized_csv(const ObservedSeries& s) {
    std::ostringstream out;
    out << "date,quarantined,recovered,deceased,total\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        out << s.dates[k].iso() << ',' << s.quarantined[k] << ',' << s.recovered[k] << ','
            << s.deceased[k] << ',' << s.total_confirmed[k] << '\n';
    }
    return out.str();
}

ObservedSeries slice_window(const ObservedSeries& s, Date start, Date end) {
    if (end < start) throw OutOfRange("window end " + end.iso() + " precedes start " + start.iso());
    const std::size_t a = s.index_of(start);
    const std::size_t b = s.index_of(end) + 1;
    auto cut = [a, b](const auto& v) { return std::decay_t<decltype(v)>(v.begin() + a, v.begin() + b); };
    return ObservedSeries{cut(s.dates), cut(s.quarantined), cut(s.recovered), cut(s.deceased),
                          cut(s.total_confirmed)};
}

std::vector<double> as_doubles(const std::vector<std::int64_t>& counts) {
    return {counts.begin(), counts.end()};
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace episens
