#include "cavspin/io/report.hpp"

#include <cstdio>

namespace cavspin::io {

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

ReportWriter& ReportWriter::add(std::string_view key, double value) {
    out_ << key << '=' << format_number(value) << '\n';
    return *this;
}

ReportWriter& ReportWriter::add(std::string_view key, long long value) {
    out_ << key << '=' << value << '\n';
    return *this;
}

ReportWriter& ReportWriter::add(std::string_view key, bool value) {
    out_ << key << '=' << (value ? "true" : "false") << '\n';
    return *this;
}

ReportWriter& ReportWriter::add(std::string_view key, std::string_view value) {
    out_ << key << '=' << value << '\n';
    return *this;
}

}  // namespace cavspin::io
