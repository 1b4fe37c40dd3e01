#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cavspin/errors.hpp"

namespace cavspin::fit {

/// Ordered samples (x, y[, σ]) with unit and provenance tags.
struct DataSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::optional<std::vector<double>> sigma;
    std::string x_unit;
    std::string source;
    std::string x_name = "x";
    std::string y_name = "y";

    [[nodiscard]] std::size_t size() const { return x.size(); }

    /// Checks finiteness, equal lengths, strictly increasing x, positive σ
    /// and at least `min_points` samples.
    void validate(std::size_t min_points = 1) const {
        if (x.size() != y.size()) throw IngestionError("x and y lengths differ");
        if (sigma && sigma->size() != x.size()) throw IngestionError("sigma length differs from x");
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
                throw IngestionError("non-finite value at row " + std::to_string(i));
            if (i > 0 && !(x[i] > x[i - 1]))
                throw IngestionError("x must be strictly increasing (row " + std::to_string(i) + ")");
            if (sigma && !((*sigma)[i] > 0.0 && std::isfinite((*sigma)[i])))
                throw IngestionError("sigma must be finite and > 0 (row " + std::to_string(i) + ")");
        }
        if (x.size() < min_points)
            throw InsufficientData("need at least " + std::to_string(min_points) + " points, have " +
                                   std::to_string(x.size()));
    }
};

}  // namespace cavspin::fit
