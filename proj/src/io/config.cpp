#include "cavspin/io/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>

#include "cavspin/errors.hpp"
#include "cavspin/io/units.hpp"

namespace cavspin::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

double number(const std::string& v) { return parse_number(v); }

int integer(const std::string& v) {
    const double d = parse_number(v);
    if (d != static_cast<double>(static_cast<long long>(d))) throw InvalidParameter("expected an integer");
    return static_cast<int>(d);
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"purcell.alpha", [](RunConfig& c, const std::string& v) { c.purcell_alpha = number(v); }},
        {"purcell.consistency_threshold",
         [](RunConfig& c, const std::string& v) { c.purcell_consistency_threshold = number(v); }},
        {"spin.gamma", [](RunConfig& c, const std::string& v) { c.spin_gamma = number(v); }},
        {"spin.d_nanobeam_hh", [](RunConfig& c, const std::string& v) { c.spin_d_nanobeam_hh = number(v); }},
        {"spin.d_bulk_hh", [](RunConfig& c, const std::string& v) { c.spin_d_bulk_hh = number(v); }},
        {"fit.max_iterations", [](RunConfig& c, const std::string& v) { c.fit_max_iterations = integer(v); }},
        {"fit.interval",
         [](RunConfig& c, const std::string& v) {
             if (v != "ci95" && v != "one_sigma") throw InvalidParameter("expected ci95 or one_sigma");
             c.fit_interval = v;
         }},
        {"mc.seed",
         [](RunConfig& c, const std::string& v) {
             char* end = nullptr;
             const auto s = std::strtoull(v.c_str(), &end, 10);
             if (v.empty() || end != v.c_str() + v.size()) throw InvalidParameter("expected an unsigned integer");
             c.mc_seed = s;
         }},
        {"mc.threads",
         [](RunConfig& c, const std::string& v) {
             c.mc_threads = integer(v);
             if (c.mc_threads < 1) throw InvalidParameter("threads must be >= 1");
         }},
    };
    return table;
}

}  // namespace

std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, setter] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    RunConfig cfg;
    cfg.source = source;
    std::string line, section;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (!section.empty()) key = section + "." + key;
        const auto it = setters().find(key);
        if (it == setters().end()) {
            std::string best;
            std::size_t best_d = std::string::npos;
            for (const auto& k : config_keys()) {
                const auto d = levenshtein(key, k);
                if (d < best_d) best_d = d, best = k;
            }
            fail("unknown key '" + key + "'; did you mean '" + best + "'?");
        }
        try {
            it->second(cfg, value);
        } catch (const std::exception& e) {
            fail("bad value '" + value + "' for " + key + ": " + e.what());
        }
        cfg.set_keys.push_back(key);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

RunConfig resolve_config(const std::optional<std::string>& explicit_path) {
    if (explicit_path) return load_config(*explicit_path);
    if (const char* env = std::getenv("CAVSPIN_CONFIG"); env && *env) return load_config(env);
    return RunConfig{};
}

}  // namespace cavspin::io
