#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cavspin/fit/data_series.hpp"

namespace cavspin::io {

/// Comma-delimited numeric table. Lines starting with '#' are kept as
/// metadata. A first data line containing any non-numeric cell is a header.
/// Headerless tables get the names x, y, sigma (up to three columns) or
/// c1..cN. A `# timestamps_ns` comment selects single-column timestamp mode.
struct CsvTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<std::string> comments;  ///< without the leading '#'
    bool timestamp_mode = false;
    std::string source;

    [[nodiscard]] std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    [[nodiscard]] bool has(const std::string& name) const;
    [[nodiscard]] const std::vector<double>& column(const std::string& name) const;
};

CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv(const std::string& path);

/// Header line of names, then rows at 17 significant digits.
void write_csv(std::ostream& out, const std::vector<std::string>& names,
               const std::vector<std::vector<double>>& columns,
               const std::vector<std::string>& comments = {});
void write_csv(const std::string& path, const std::vector<std::string>& names,
               const std::vector<std::vector<double>>& columns,
               const std::vector<std::string>& comments = {});

struct IngestResult {
    fit::DataSeries series;
    std::vector<std::string> warnings;
};

/// Selects columns, sorts by x and averages rows with duplicate x (σ of the
/// mean: sqrt(Σσ²)/k). Empty column names pick the first/second column.
IngestResult ingest_table(const CsvTable& table, const std::string& x_column = {},
                          const std::string& y_column = {},
                          const std::optional<std::string>& sigma_column = std::nullopt,
                          std::size_t min_rows = 2);

IngestResult ingest_csv(const std::string& path, const std::string& x_column = {},
                        const std::string& y_column = {},
                        const std::optional<std::string>& sigma_column = std::nullopt,
                        std::size_t min_rows = 2);

}  // namespace cavspin::io
