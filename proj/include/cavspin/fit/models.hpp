#pragma once

// Registry of the curve models used for spectroscopy, lifetime, coherence and
// photon-correlation fits. Parameters are held in natural units; the
// optimizer works on a reparameterized vector where positivity or bound
// constraints apply.

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cavspin::fit {

enum class Constraint {
    none,
    positive,  ///< p = exp(θ)
    stretch,   ///< p in (kStretchMin, kStretchMax) through a logistic map
};

inline constexpr double kStretchMin = 0.2;
inline constexpr double kStretchMax = 4.0;

struct ParamInfo {
    std::string name;
    Constraint constraint = Constraint::none;
    /// Scales linearly with y (amplitudes, offsets).
    bool scales_with_y = false;
};

struct ModelOptions {
    int peaks = 1;               ///< lorentzian / gaussian peak count
    bool constrained_g2 = false; ///< g2_three_level with amp_anti = 1 + amp_bunch
    bool analytic_jacobian = true;
};

class ModelSpec {
public:
    virtual ~ModelSpec() = default;

    [[nodiscard]] virtual std::string id() const = 0;
    [[nodiscard]] const std::vector<ParamInfo>& params() const { return params_; }
    [[nodiscard]] std::size_t size() const { return params_.size(); }
    [[nodiscard]] std::vector<std::string> names() const;
    /// Index of `name`; throws InvalidParameter when absent.
    [[nodiscard]] std::size_t index(std::string_view name) const;

    [[nodiscard]] virtual double evaluate(const Eigen::VectorXd& p, double x) const = 0;

    [[nodiscard]] bool analytic() const { return analytic_; }
    void set_analytic(bool on) { analytic_ = on && has_gradient(); }

    /// ∂f/∂p at x. Only valid when has_gradient().
    virtual void gradient(const Eigen::VectorXd& p, double x, Eigen::Ref<Eigen::VectorXd> out) const;

    /// Derived quantities, e.g. Q = center/fwhm for peaks.
    [[nodiscard]] virtual std::map<std::string, double> derived(const Eigen::VectorXd& p) const;

    /// True when every parameter satisfies its constraint.
    [[nodiscard]] bool in_domain(const Eigen::VectorXd& p) const;

protected:
    [[nodiscard]] virtual bool has_gradient() const { return true; }
    std::vector<ParamInfo> params_;
    bool analytic_ = true;
};

std::unique_ptr<ModelSpec> make_model(std::string_view id, const ModelOptions& options = {});

/// Model ids accepted by make_model.
std::vector<std::string> model_ids();

/// Natural value -> internal coordinate and back.
double to_internal(Constraint c, double value);
double to_natural(Constraint c, double internal);
/// d(natural)/d(internal) at the internal coordinate.
double natural_derivative(Constraint c, double internal);

/// Jacobian of the model over `x`, rows = points, columns = parameters. Uses
/// the analytic gradient when the model is flagged analytic, otherwise
/// central differences refined by Richardson extrapolation with a step scaled
/// to each parameter.
Eigen::MatrixXd jacobian(const ModelSpec& model, const Eigen::VectorXd& p, std::span<const double> x);

/// Central-difference Jacobian regardless of the analytic flag.
Eigen::MatrixXd numeric_jacobian(const ModelSpec& model, const Eigen::VectorXd& p,
                                 std::span<const double> x);

/// Names of parameters whose Jacobian column is identically zero.
std::vector<std::string> zero_columns(const ModelSpec& model, const Eigen::MatrixXd& j);

}  // namespace cavspin::fit
