#include <algorithm>
#include <cmath>
#include <ostream>

#include "cavspin/errors.hpp"
#include "cavspin/fit/fit.hpp"

namespace cavspin::fit {

namespace {

constexpr double kLambdaMax = 1e20;
constexpr double kRankTolerance = 1e-12;

struct Problem {
    const ModelSpec& model;
    const DataSeries& data;

    [[nodiscard]] Eigen::VectorXd natural(const Eigen::VectorXd& theta) const {
        Eigen::VectorXd p(theta.size());
        for (Eigen::Index k = 0; k < theta.size(); ++k)
            p(k) = to_natural(model.params()[static_cast<std::size_t>(k)].constraint, theta(k));
        return p;
    }

    [[nodiscard]] Eigen::VectorXd weights() const {
        const auto n = static_cast<Eigen::Index>(data.size());
        Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
        if (data.sigma)
            for (Eigen::Index i = 0; i < n; ++i) w(i) = 1.0 / (*data.sigma)[static_cast<std::size_t>(i)];
        return w;
    }

    // Weighted residuals (f - y)/σ.
    [[nodiscard]] Eigen::VectorXd residuals(const Eigen::VectorXd& p, const Eigen::VectorXd& w) const {
        const auto n = static_cast<Eigen::Index>(data.size());
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            r(i) = (model.evaluate(p, data.x[ii]) - data.y[ii]) * w(i);
        }
        return r;
    }

    // Weighted Jacobian with respect to the internal coordinates.
    [[nodiscard]] Eigen::MatrixXd internal_jacobian(const Eigen::VectorXd& theta,
                                                    const Eigen::VectorXd& w) const {
        Eigen::MatrixXd j = jacobian(model, natural(theta), data.x);
        for (Eigen::Index k = 0; k < theta.size(); ++k)
            j.col(k) *= natural_derivative(model.params()[static_cast<std::size_t>(k)].constraint,
                                           theta(k));
        return w.asDiagonal() * j;
    }
};

// Throws RankDeficient naming the parameter that dominates the weakest
// direction of the column-normalized Jacobian.
void check_rank(const ModelSpec& model, const Eigen::MatrixXd& j) {
    const auto zeros = zero_columns(model, j);
    if (!zeros.empty())
        throw RankDeficient("data do not constrain parameter '" + zeros.front() + "'", zeros.front());
    Eigen::VectorXd norms = j.colwise().norm().transpose();
    const Eigen::MatrixXd scaled = j * norms.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return;
    if (s(s.size() - 1) <= kRankTolerance * s(0)) {
        Eigen::Index worst = 0;
        svd.matrixV().col(s.size() - 1).cwiseAbs().maxCoeff(&worst);
        const auto& name = model.params()[static_cast<std::size_t>(worst)].name;
        throw RankDeficient("J^T J is singular; parameter '" + name + "' is unconstrained", name);
    }
}

}  // namespace

double FitResult::param(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return params(static_cast<Eigen::Index>(i));
    throw InvalidParameter("fit result has no parameter '" + name + "'");
}

double FitResult::interval_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return ci(static_cast<Eigen::Index>(i));
    throw InvalidParameter("fit result has no parameter '" + name + "'");
}

FitResult fit(const ModelSpec& model, const DataSeries& data, const std::optional<ParamMap>& initial,
              const FitOptions& options) {
    const std::size_t n_params = model.size();
    data.validate(n_params + 1);

    Eigen::VectorXd start;
    bool complete = initial.has_value();
    if (initial)
        for (const auto& info : model.params()) complete = complete && initial->count(info.name);
    if (complete) {
        start.resize(static_cast<Eigen::Index>(n_params));
    } else {
        start = initial_guess(model, data);
    }
    if (initial) {
        for (const auto& [name, value] : *initial)
            start(static_cast<Eigen::Index>(model.index(name))) = value;
    }
    if (!model.in_domain(start))
        throw InvalidParameter("initial parameters are outside the model domain");

    const Problem problem{model, data};
    const Eigen::VectorXd w = problem.weights();

    Eigen::VectorXd theta(start.size());
    for (Eigen::Index k = 0; k < start.size(); ++k)
        theta(k) = to_internal(model.params()[static_cast<std::size_t>(k)].constraint, start(k));

    Eigen::VectorXd r = problem.residuals(problem.natural(theta), w);
    double objective = r.squaredNorm();
    if (!std::isfinite(objective)) throw InvalidParameter("model is not finite at the initial point");

    FitResult result;
    result.model_id = model.id();
    result.names = model.names();
    result.interval = options.interval;
    result.objective_history.push_back(objective);

    double lambda = options.lambda0;
    bool converged = objective == 0.0;
    int iteration = 0;
    Eigen::MatrixXd j = problem.internal_jacobian(theta, w);

    while (!converged && iteration < options.max_iterations) {
        ++iteration;
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd grad = j.transpose() * r;
        Eigen::VectorXd diag = jtj.diagonal();
        const double diag_floor = std::max(diag.maxCoeff(), 1.0) * 1e-30;
        diag = diag.cwiseMax(diag_floor);

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal() += lambda * diag;
            const Eigen::VectorXd step = lhs.ldlt().solve(-grad);
            const double step_norm = step.norm();
            const double step_limit = options.step_tolerance * (1.0 + theta.norm());

            if (step.allFinite()) {
                const Eigen::VectorXd trial = theta + step;
                const Eigen::VectorXd trial_r = problem.residuals(problem.natural(trial), w);
                const double trial_obj = trial_r.squaredNorm();
                if (std::isfinite(trial_obj) && trial_obj < objective) {
                    const double decrease = (objective - trial_obj) / objective;
                    theta = trial;
                    r = trial_r;
                    objective = trial_obj;
                    result.objective_history.push_back(objective);
                    lambda = std::max(lambda / options.lambda_factor, 1e-300);
                    accepted = true;
                    if (decrease < options.relative_tolerance || step_norm < step_limit ||
                        objective == 0.0)
                        converged = true;
                    break;
                }
            }
            if (step.allFinite() && step_norm < step_limit) {
                // No downhill step at any resolvable length: local minimum.
                converged = true;
                break;
            }
            lambda *= options.lambda_factor;
            if (lambda > kLambdaMax) break;
        }
        if (!accepted) break;
        if (!converged) j = problem.internal_jacobian(theta, w);
    }

    result.converged = converged;
    result.iterations = iteration;
    result.params = problem.natural(theta);

    // Covariance in natural parameters.
    const Eigen::MatrixXd jn = w.asDiagonal() * jacobian(model, result.params, data.x);
    check_rank(model, jn);
    const Eigen::MatrixXd info = jn.transpose() * jn;
    Eigen::MatrixXd cov = info.completeOrthogonalDecomposition().pseudoInverse();
    cov = (0.5 * (cov + cov.transpose())).eval();

    const auto n = static_cast<double>(data.size());
    const double dof = n - static_cast<double>(n_params);
    if (data.sigma) {
        result.reduced_chi2 = objective / dof;
    } else {
        cov *= objective / dof;
    }
    result.covariance = cov;
    const double z = options.interval == IntervalLevel::ci95 ? 1.96 : 1.0;
    result.ci = z * cov.diagonal().cwiseMax(0.0).cwiseSqrt();

    double sum_sq = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double d = model.evaluate(result.params, data.x[i]) - data.y[i];
        sum_sq += d * d;
    }
    result.residual_rms = std::sqrt(sum_sq / n);
    result.derived = model.derived(result.params);
    return result;
}

void write_fit_result(std::ostream& out, const FitResult& result) {
    const auto precision = out.precision(17);
    const char* ci_key = result.interval == IntervalLevel::ci95 ? "ci95." : "sd.";
    out << "model=" << result.model_id << '\n';
    out << "converged=" << (result.converged ? "true" : "false") << '\n';
    out << "iterations=" << result.iterations << '\n';
    for (std::size_t i = 0; i < result.names.size(); ++i)
        out << "param." << result.names[i] << '=' << result.params(static_cast<Eigen::Index>(i)) << '\n';
    for (std::size_t i = 0; i < result.names.size(); ++i)
        out << ci_key << result.names[i] << '=' << result.ci(static_cast<Eigen::Index>(i)) << '\n';
    for (const auto& [name, value] : result.derived) out << "derived." << name << '=' << value << '\n';
    out << "residual_rms=" << result.residual_rms << '\n';
    if (result.reduced_chi2) out << "reduced_chi2=" << *result.reduced_chi2 << '\n';
    out.precision(precision);
}

}  // namespace cavspin::fit
