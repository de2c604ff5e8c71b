#include "episens/keyvalue.hpp"

#include <charconv>
#include <sstream>

#include "episens/data.hpp"
#include "episens/error.hpp"

namespace episens {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double to_double(std::string_view s, const std::string& key) {
    s = trim(s);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InputError("key '" + key + "': expected a number, got '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

KeyValueDoc KeyValueDoc::parse(std::string_view text) {
    KeyValueDoc doc;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InputError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw InputError("line " + std::to_string(line_no) + ": empty key");
        doc.values_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
    }
    return doc;
}

KeyValueDoc KeyValueDoc::load(const std::string& path) { return parse(read_text_file(path)); }

std::optional<std::string> KeyValueDoc::find(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueDoc::get_string(const std::string& key) const {
    if (auto v = find(key)) return *v;
    throw InputError("missing key '" + key + "'");
}

std::string KeyValueDoc::get_string(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
}

double KeyValueDoc::get_double(const std::string& key) const { return to_double(get_string(key), key); }

double KeyValueDoc::get_double(const std::string& key, double fallback) const {
    if (auto v = find(key)) return to_double(*v, key);
    return fallback;
}

long long KeyValueDoc::get_int(const std::string& key, long long fallback) const {
    const auto v = find(key);
    if (!v) return fallback;
    const std::string_view s = trim(*v);
    long long out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InputError("key '" + key + "': expected an integer, got '" + *v + "'");
    }
    return out;
}

std::vector<double> KeyValueDoc::get_doubles(const std::string& key, std::vector<double> fallback) const {
    const auto v = find(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::string_view rest = *v;
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(to_double(rest.substr(0, comma), key));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::string KeyValueDoc::dump() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
    return out.str();
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

template <typename Params>
auto& param_member(Params& p, std::size_t index) {
    switch (index) {
        case 0: return p.alpha;
        case 1: return p.beta;
        case 2: return p.gamma_inv;
        case 3: return p.delta;
        case 4: return p.lambda0;
        case 5: return p.lambda1;
        case 6: return p.kappa0;
        case 7: return p.kappa1;
        default: throw InputError("parameter index out of range");
    }
}

}  // namespace

double& param_ref(SeirParams& p, std::size_t index) { return param_member(p, index); }

double param_value(const SeirParams& p, std::size_t index) { return param_member(p, index); }

SeirParams read_params(const KeyValueDoc& doc, const std::string& prefix, const SeirParams& defaults) {
    SeirParams p = defaults;
    for (std::size_t k = 0; k < std::size(kParamKeys); ++k) {
        param_ref(p, k) = doc.get_double(prefix + kParamKeys[k], param_value(defaults, k));
    }
    p.n_pop = doc.get_double(prefix + "n_pop", defaults.n_pop);
    return p;
}

void write_params(KeyValueDoc& doc, const std::string& prefix, const SeirParams& p) {
    for (std::size_t k = 0; k < std::size(kParamKeys); ++k) {
        doc.set(prefix + kParamKeys[k], format_double(param_value(p, k)));
    }
    doc.set(prefix + "n_pop", format_double(p.n_pop));
}

}  // namespace episens
