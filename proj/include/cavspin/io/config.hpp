#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cavspin::io {

/// Run defaults read from a `key = value` file. Keys are section-qualified:
/// a `[purcell]` header followed by `alpha = 0.05` sets `purcell.alpha`.
struct RunConfig {
    double purcell_alpha = 0.053;
    double purcell_consistency_threshold = 0.25;
    double spin_gamma = 2.8;
    double spin_d_nanobeam_hh = 1328.0;
    double spin_d_bulk_hh = 1336.0;
    int fit_max_iterations = 200;
    std::string fit_interval = "ci95";
    unsigned long long mc_seed = 1;
    int mc_threads = 1;

    /// Keys explicitly set by the file.
    std::vector<std::string> set_keys;
    std::string source;
};

/// Known keys, section-qualified.
const std::vector<std::string>& config_keys();

/// Throws ConfigError on a malformed line, a bad value, or an unknown key; in
/// the last case the message suggests the nearest known key.
RunConfig parse_config(std::istream& in, const std::string& source = "<stream>");
RunConfig load_config(const std::string& path);

/// `explicit_path` when given, else $CAVSPIN_CONFIG, else defaults.
RunConfig resolve_config(const std::optional<std::string>& explicit_path);

/// Edit distance, used for did-you-mean suggestions.
std::size_t levenshtein(const std::string& a, const std::string& b);

}  // namespace cavspin::io
