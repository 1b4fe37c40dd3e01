#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cavspin/fit/data_series.hpp"
#include "cavspin/fit/models.hpp"

namespace cavspin::fit {

enum class IntervalLevel {
    ci95,       ///< 1.96 standard errors
    one_sigma,  ///< 1 standard error
};

struct FitOptions {
    int max_iterations = 200;
    double lambda0 = 1e-3;
    double lambda_factor = 10.0;
    double relative_tolerance = 1e-10;  ///< on the objective decrease
    double step_tolerance = 1e-12;      ///< on the internal step norm
    IntervalLevel interval = IntervalLevel::ci95;
};

using ParamMap = std::map<std::string, double>;

struct FitResult {
    std::string model_id;
    std::vector<std::string> names;
    Eigen::VectorXd params;
    Eigen::VectorXd ci;          ///< half-widths at `interval`
    IntervalLevel interval = IntervalLevel::ci95;
    Eigen::MatrixXd covariance;
    double residual_rms = 0.0;
    std::optional<double> reduced_chi2;  ///< only with per-point sigma
    bool converged = false;
    int iterations = 0;
    std::map<std::string, double> derived;
    /// Objective after every accepted step, starting with the initial value.
    std::vector<double> objective_history;

    [[nodiscard]] double param(const std::string& name) const;
    [[nodiscard]] double interval_of(const std::string& name) const;
};

/// Levenberg-Marquardt minimization of Σ((f(x)−y)/σ)² with Marquardt
/// diagonal scaling. Missing entries of `initial` come from initial_guess.
///
/// Intervals use covariance s²(JᵀJ)⁻¹ with s² the residual variance when
/// sigma is absent, (JᵀWJ)⁻¹ otherwise, evaluated in natural parameters.
/// Throws RankDeficient when JᵀJ is singular at the solution.
FitResult fit(const ModelSpec& model, const DataSeries& data,
              const std::optional<ParamMap>& initial = std::nullopt, const FitOptions& options = {});

/// Heuristic starting point for `model` on `data`. Throws NoSignal for
/// constant data.
Eigen::VectorXd initial_guess(const ModelSpec& model, const DataSeries& data);

/// Stable key=value serialization: model, converged, iterations, param.*,
/// ci95.* (or sd.* for one-sigma), derived.*, residual_rms, reduced_chi2.
void write_fit_result(std::ostream& out, const FitResult& result);

}  // namespace cavspin::fit
