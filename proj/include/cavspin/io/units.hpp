#pragma once

#include <string>
#include <string_view>

namespace cavspin::io {

/// Parses a frequency with optional suffix (Hz, kHz, MHz, GHz, THz) into MHz.
/// A bare number is taken to be MHz.
double parse_frequency_mhz(std::string_view text);

/// Parses a time with optional suffix (ps, ns, us, µs, ms, s) into ns.
/// A bare number is taken to be ns.
double parse_time_ns(std::string_view text);

/// Parses a length with optional suffix (nm, um, µm, mm) into µm.
/// A bare number is taken to be µm.
double parse_length_um(std::string_view text);

/// Plain decimal number; the whole string must be consumed.
double parse_number(std::string_view text);

}  // namespace cavspin::io
