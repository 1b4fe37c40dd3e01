#pragma once

#include <ostream>
#include <string>
#include <string_view>

namespace cavspin::io {

/// Shortest round-trip-safe decimal text: 17 significant digits.
std::string format_number(double value);

/// Writes `key=value` lines with 17-significant-digit numbers.
class ReportWriter {
public:
    explicit ReportWriter(std::ostream& out) : out_(out) {}

    ReportWriter& add(std::string_view key, double value);
    ReportWriter& add(std::string_view key, long long value);
    ReportWriter& add(std::string_view key, int value) { return add(key, static_cast<long long>(value)); }
    ReportWriter& add(std::string_view key, std::size_t value) {
        return add(key, static_cast<long long>(value));
    }
    ReportWriter& add(std::string_view key, bool value);
    ReportWriter& add(std::string_view key, std::string_view value);
    ReportWriter& add(std::string_view key, const char* value) { return add(key, std::string_view(value)); }

private:
    std::ostream& out_;
};

}  // namespace cavspin::io
