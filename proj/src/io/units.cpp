#include "cavspin/io/units.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <utility>

#include "cavspin/errors.hpp"

namespace cavspin::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

struct Suffix {
    std::string_view name;
    double factor;
};

template <std::size_t N>
double parse_with_units(std::string_view text, const std::array<Suffix, N>& suffixes,
                        const char* quantity) {
    const std::string_view s = trim(text);
    for (const auto& [name, factor] : suffixes) {
        if (s.size() > name.size() && s.substr(s.size() - name.size()) == name) {
            return parse_number(s.substr(0, s.size() - name.size())) * factor;
        }
    }
    try {
        return parse_number(s);
    } catch (const InvalidParameter&) {
        throw InvalidParameter(std::string("cannot parse ") + quantity + " '" + std::string(text) + "'");
    }
}

}  // namespace

double parse_number(std::string_view text) {
    const std::string s(trim(text));
    if (s.empty()) throw InvalidParameter("empty number");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        throw InvalidParameter("not a finite number: '" + s + "'");
    return v;
}

double parse_frequency_mhz(std::string_view text) {
    // Longer suffixes first so "MHz" is not read as "Hz".
    static constexpr std::array<Suffix, 5> kSuffixes{{
        {"THz", 1e6}, {"GHz", 1e3}, {"MHz", 1.0}, {"kHz", 1e-3}, {"Hz", 1e-6}}};
    return parse_with_units(text, kSuffixes, "frequency");
}

double parse_time_ns(std::string_view text) {
    static constexpr std::array<Suffix, 6> kSuffixes{{
        {"ps", 1e-3}, {"ns", 1.0}, {"us", 1e3}, {"µs", 1e3}, {"ms", 1e6}, {"s", 1e9}}};
    return parse_with_units(text, kSuffixes, "time");
}

double parse_length_um(std::string_view text) {
    static constexpr std::array<Suffix, 4> kSuffixes{{
        {"nm", 1e-3}, {"um", 1.0}, {"µm", 1.0}, {"mm", 1e3}}};
    return parse_with_units(text, kSuffixes, "length");
}

}  // namespace cavspin::io
