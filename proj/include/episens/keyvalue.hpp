#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "episens/seir.hpp"

namespace episens {

/// Flat `key = value` document. `#` starts a comment; later keys override earlier ones.
class KeyValueDoc {
public:
    static KeyValueDoc parse(std::string_view text);
    static KeyValueDoc load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::optional<std::string> find(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;

    /// Keys in sorted order, one per line.
    std::string dump() const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

/// Names used for the eight regime parameters in files, in declaration order.
inline constexpr const char* kParamKeys[] = {"alpha",   "beta",    "gamma_inv", "delta",
                                             "lambda0", "lambda1", "kappa0",    "kappa1"};

double& param_ref(SeirParams& p, std::size_t index);
double param_value(const SeirParams& p, std::size_t index);

/// Reads `<prefix>alpha`, ... falling back to `defaults` for absent keys.
SeirParams read_params(const KeyValueDoc& doc, const std::string& prefix, const SeirParams& defaults);

/// Writes the eight rates plus n_pop under `prefix`.
void write_params(KeyValueDoc& doc, const std::string& prefix, const SeirParams& p);

}  // namespace episens
