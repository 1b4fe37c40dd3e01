#include "cavspin/io/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cavspin/errors.hpp"
#include "cavspin/io/report.hpp"

namespace cavspin::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_cell(const std::string& cell, double& value) {
    if (cell.empty()) return false;
    char* end = nullptr;
    value = std::strtod(cell.c_str(), &end);
    return end == cell.c_str() + cell.size();
}

std::vector<std::string> default_names(std::size_t n) {
    if (n == 1) return {"x"};
    if (n == 2) return {"x", "y"};
    if (n == 3) return {"x", "y", "sigma"};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("c" + std::to_string(i + 1));
    return out;
}

}  // namespace

bool CsvTable::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        std::string available;
        for (const auto& n : names) available += (available.empty() ? "" : ", ") + n;
        throw IngestionError(source + ": no column named '" + name + "' (available: " + available + ")");
    }
    return columns[static_cast<std::size_t>(it - names.begin())];
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
    CsvTable t;
    t.source = source;
    std::string line;
    std::size_t line_no = 0;
    bool first_data = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        if (stripped[0] == '#') {
            const std::string body = trim(stripped.substr(1));
            t.comments.push_back(body);
            if (body == "timestamps_ns" && first_data) {
                t.timestamp_mode = true;
                t.names = {"timestamps_ns"};
                t.columns.assign(1, {});
            }
            continue;
        }
        const auto cells = split(stripped);
        std::vector<double> values(cells.size());
        bool numeric = true;
        for (std::size_t c = 0; c < cells.size(); ++c) numeric = numeric && parse_cell(cells[c], values[c]);

        if (first_data) {
            first_data = false;
            if (t.timestamp_mode) {
                if (cells.size() != 1)
                    throw IngestionError(source + ":" + std::to_string(line_no) +
                                         ": timestamp files have exactly one column");
            } else if (!numeric) {
                t.names = cells;
                t.columns.assign(cells.size(), {});
                continue;
            } else {
                t.names = default_names(cells.size());
                t.columns.assign(cells.size(), {});
            }
        }
        if (cells.size() != t.names.size())
            throw IngestionError(source + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(t.names.size()) + " cells, found " +
                                 std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_cell(cells[c], values[c]) || !std::isfinite(values[c]))
                throw IngestionError(source + ":" + std::to_string(line_no) + ": column " +
                                     std::to_string(c + 1) + " ('" + t.names[c] +
                                     "') is not a finite number: '" + cells[c] + "'");
            t.columns[c].push_back(values[c]);
        }
    }
    return t;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open '" + path + "'");
    return parse_csv(in, path);
}

void write_csv(std::ostream& out, const std::vector<std::string>& names,
               const std::vector<std::vector<double>>& columns,
               const std::vector<std::string>& comments) {
    if (names.size() != columns.size()) throw InvalidParameter("column/name count mismatch");
    for (const auto& c : comments) out << "# " << c << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    out << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw InvalidParameter("columns must have equal length");
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << (i ? "," : "") << format_number(columns[i][r]);
        out << '\n';
    }
}

void write_csv(const std::string& path, const std::vector<std::string>& names,
               const std::vector<std::vector<double>>& columns,
               const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot open '" + path + "' for writing");
    write_csv(out, names, columns, comments);
}

IngestResult ingest_table(const CsvTable& table, const std::string& x_column,
                          const std::string& y_column,
                          const std::optional<std::string>& sigma_column, std::size_t min_rows) {
    if (table.names.size() < 2 && (x_column.empty() || y_column.empty()))
        throw IngestionError(table.source + ": need at least two columns for an x/y series");
    const std::string xname = x_column.empty() ? table.names.at(0) : x_column;
    const std::string yname = y_column.empty() ? table.names.at(1) : y_column;
    const auto& xs = table.column(xname);
    const auto& ys = table.column(yname);
    const std::vector<double>* ss = sigma_column ? &table.column(*sigma_column) : nullptr;

    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

    IngestResult out;
    auto& s = out.series;
    s.source = table.source;
    s.x_name = xname;
    s.y_name = yname;
    if (ss) s.sigma.emplace();

    std::size_t duplicates = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        double sum_y = 0.0, sum_var = 0.0;
        while (j < order.size() && xs[order[j]] == xs[order[i]]) {
            sum_y += ys[order[j]];
            if (ss) sum_var += (*ss)[order[j]] * (*ss)[order[j]];
            ++j;
        }
        const auto k = static_cast<double>(j - i);
        if (j - i > 1) duplicates += j - i - 1;
        s.x.push_back(xs[order[i]]);
        s.y.push_back(sum_y / k);
        if (ss) s.sigma->push_back(std::sqrt(sum_var) / k);
        i = j;
    }
    if (duplicates > 0)
        out.warnings.push_back(table.source + ": averaged " + std::to_string(duplicates) +
                               " duplicate x row(s)");
    if (s.size() < min_rows)
        throw InsufficientData(table.source + ": need at least " + std::to_string(min_rows) +
                               " distinct x rows, found " + std::to_string(s.size()));
    s.validate(min_rows);
    return out;
}

IngestResult ingest_csv(const std::string& path, const std::string& x_column,
                        const std::string& y_column, const std::optional<std::string>& sigma_column,
                        std::size_t min_rows) {
    return ingest_table(read_csv(path), x_column, y_column, sigma_column, min_rows);
}

}  // namespace cavspin::io
