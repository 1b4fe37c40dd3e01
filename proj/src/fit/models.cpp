#include "cavspin/fit/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "cavspin/errors.hpp"

namespace cavspin::fit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kGaussK = 4.0 * std::log(2.0);

std::string indexed(const std::string& base, int i, int count) {
    return count == 1 ? base : base + std::to_string(i + 1);
}

// Shared by the stretched envelopes: s = (|x|/T)^n, e = exp(-s).
struct Stretch {
    double s = 0.0;
    double e = 1.0;
    double log_ratio = 0.0;  // ln(|x|/T), 0 at x = 0
};

Stretch stretch_terms(double x, double time, double n) {
    Stretch out;
    const double ax = std::abs(x);
    if (ax > 0.0) {
        out.log_ratio = std::log(ax / time);
        out.s = std::exp(n * out.log_ratio);
    }
    out.e = std::exp(-out.s);
    return out;
}

class PeakModel : public ModelSpec {
public:
    enum class Shape { lorentzian, gaussian };

    PeakModel(Shape shape, int peaks) : shape_(shape), peaks_(peaks) {
        if (peaks < 1) throw InvalidParameter("peak count must be >= 1");
        for (int i = 0; i < peaks; ++i) {
            params_.push_back({indexed("center", i, peaks), Constraint::none, false});
            params_.push_back({indexed("fwhm", i, peaks), Constraint::positive, false});
            params_.push_back({indexed("amplitude", i, peaks), Constraint::none, true});
        }
        params_.push_back({"offset", Constraint::none, true});
    }

    [[nodiscard]] std::string id() const override {
        return shape_ == Shape::lorentzian ? "lorentzian" : "gaussian";
    }

    [[nodiscard]] double evaluate(const Eigen::VectorXd& p, double x) const override {
        double y = p(3 * peaks_);
        for (int i = 0; i < peaks_; ++i) y += peak(p(3 * i), p(3 * i + 1), p(3 * i + 2), x);
        return y;
    }

    void gradient(const Eigen::VectorXd& p, double x, Eigen::Ref<Eigen::VectorXd> out) const override {
        for (int i = 0; i < peaks_; ++i) {
            const double c = p(3 * i), w = p(3 * i + 1), a = p(3 * i + 2);
            const double u = x - c;
            if (shape_ == Shape::lorentzian) {
                const double h = 0.5 * w;
                const double d = u * u + h * h;
                out(3 * i) = a * h * h * 2.0 * u / (d * d);
                out(3 * i + 1) = a * h * u * u / (d * d);
                out(3 * i + 2) = h * h / d;
            } else {
                const double e = std::exp(-kGaussK * u * u / (w * w));
                out(3 * i) = a * e * 2.0 * kGaussK * u / (w * w);
                out(3 * i + 1) = a * e * 2.0 * kGaussK * u * u / (w * w * w);
                out(3 * i + 2) = e;
            }
        }
        out(3 * peaks_) = 1.0;
    }

    [[nodiscard]] std::map<std::string, double> derived(const Eigen::VectorXd& p) const override {
        std::map<std::string, double> out;
        if (shape_ == Shape::lorentzian)
            for (int i = 0; i < peaks_; ++i) out[indexed("Q", i, peaks_)] = p(3 * i) / p(3 * i + 1);
        return out;
    }

private:
    [[nodiscard]] double peak(double c, double w, double a, double x) const {
        const double u = x - c;
        if (shape_ == Shape::lorentzian) {
            const double h = 0.5 * w;
            return a * h * h / (u * u + h * h);
        }
        return a * std::exp(-kGaussK * u * u / (w * w));
    }

    Shape shape_;
    int peaks_;
};

class ExpDecay : public ModelSpec {
public:
    ExpDecay() {
        params_ = {{"amplitude", Constraint::none, true},
                   {"tau", Constraint::positive, false},
                   {"offset", Constraint::none, true}};
    }
    [[nodiscard]] std::string id() const override { return "exp_decay"; }
    [[nodiscard]] double evaluate(const Eigen::VectorXd& p, double x) const override {
        return p(0) * std::exp(-x / p(1)) + p(2);
    }
    void gradient(const Eigen::VectorXd& p, double x, Eigen::Ref<Eigen::VectorXd> out) const override {
        const double e = std::exp(-x / p(1));
        out(0) = e;
        out(1) = p(0) * e * x / (p(1) * p(1));
        out(2) = 1.0;
    }
};

class StretchedExp : public ModelSpec {
public:
    StretchedExp() {
        params_ = {{"amplitude", Constraint::none, true},
                   {"T", Constraint::positive, false},
                   {"n", Constraint::stretch, false},
                   {"offset", Constraint::none, true}};
    }
    [[nodiscard]] std::string id() const override { return "stretched_exp"; }
    [[nodiscard]] double evaluate(const Eigen::VectorXd& p, double x) const override {
        return p(0) * stretch_terms(x, p(1), p(2)).e + p(3);
    }
    void gradient(const Eigen::VectorXd& p, double x, Eigen::Ref<Eigen::VectorXd> out) const override {
        const auto st = stretch_terms(x, p(1), p(2));
        out(0) = st.e;
        out(1) = p(0) * st.e * st.s * p(2) / p(1);
        out(2) = -p(0) * st.e * st.s * st.log_ratio;
        out(3) = 1.0;
    }
};

// amplitude · carrier(2π f x + φ) · exp(-(|x|/T)^n) + offset
class OscillatingStretch : public ModelSpec {
public:
    enum class Carrier { cosine, sine_squared };

    explicit OscillatingStretch(Carrier carrier) : carrier_(carrier) {
        params_ = {{"amplitude", Constraint::none, true}, {"frequency", Constraint::none, false},
                   {"phase", Constraint::none, false},    {"T", Constraint::positive, false},
                   {"n", Constraint::stretch, false},     {"offset", Constraint::none, true}};
    }
    [[nodiscard]] std::string id() const override {
        return carrier_ == Carrier::cosine ? "damped_sinusoid" : "sin2_stretched";
    }
    [[nodiscard]] double evaluate(const Eigen::VectorXd& p, double x) const override {
        const double psi = kTwoPi * p(1) * x + p(2);
        return p(0) * wave(psi) * stretch_terms(x, p(3), p(4)).e + p(5);
    }
    void gradient(const Eigen::VectorXd& p, double x, Eigen::Ref<Eigen::VectorXd> out) const override {
        const double psi = kTwoPi * p(1) * x + p(2);
        const auto st = stretch_terms(x, p(3), p(4));
        const double w = wave(psi);
        const double dw = carrier_ == Carrier::cosine ? -std::sin(psi) : std::sin(2.0 * psi);
        out(0) = w * st.e;
        out(1) = p(0) * dw * kTwoPi * x * st.e;
        out(2) = p(0) * dw * st.e;
        out(3) = p(0) * w * st.e * st.s * p(4) / p(3);
        out(4) = -p(0) * w * st.e * st.s * st.log_ratio;
        out(5) = 1.0;
    }
    [[nodiscard]] std::map<std::string, double> derived(const Eigen::VectorXd& p) const override {
        if (p(1) == 0.0) return {};
        return {{"period", 1.0 / std::abs(p(1))}};
    }

private:
    [[nodiscard]] double wave(double psi) const {
        if (carrier_ == Carrier::cosine) return std::cos(psi);
        const double s = std::sin(psi);
        return s * s;
    }
    Carrier carrier_;
};

class G2ThreeLevel : public ModelSpec {
public:
    explicit G2ThreeLevel(bool constrained) : constrained_(constrained) {
        if (!constrained) params_.push_back({"amp_anti", Constraint::none, false});
        params_.push_back({"amp_bunch", Constraint::none, false});
        params_.push_back({"t1", Constraint::positive, false});
        params_.push_back({"t2", Constraint::positive, false});
    }
    [[nodiscard]] std::string id() const override { return "g2_three_level"; }
    [[nodiscard]] double evaluate(const Eigen::VectorXd& p, double x) const override {
        const auto [a, b, t1, t2] = unpack(p);
        const double ax = std::abs(x);
        return 1.0 - a * std::exp(-ax / t1) + b * std::exp(-ax / t2);
    }
    void gradient(const Eigen::VectorXd& p, double x, Eigen::Ref<Eigen::VectorXd> out) const override {
        const auto [a, b, t1, t2] = unpack(p);
        const double ax = std::abs(x);
        const double e1 = std::exp(-ax / t1);
        const double e2 = std::exp(-ax / t2);
        const int o = constrained_ ? 0 : 1;
        if (constrained_) {
            out(0) = -e1 + e2;
        } else {
            out(0) = -e1;
            out(1) = e2;
        }
        out(o + 1) = -a * e1 * ax / (t1 * t1);
        out(o + 2) = b * e2 * ax / (t2 * t2);
    }
    [[nodiscard]] std::map<std::string, double> derived(const Eigen::VectorXd& p) const override {
        const auto [a, b, t1, t2] = unpack(p);
        std::map<std::string, double> out{{"g2_zero", 1.0 - a + b}};
        if (constrained_) out["amp_anti"] = a;
        return out;
    }

private:
    struct Unpacked {
        double a, b, t1, t2;
    };
    [[nodiscard]] Unpacked unpack(const Eigen::VectorXd& p) const {
        if (constrained_) return {1.0 + p(0), p(0), p(1), p(2)};
        return {p(0), p(1), p(2), p(3)};
    }
    bool constrained_;
};

}  // namespace

std::vector<std::string> ModelSpec::names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.name);
    return out;
}

std::size_t ModelSpec::index(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name) return i;
    throw InvalidParameter("model '" + id() + "' has no parameter '" + std::string(name) + "'");
}

void ModelSpec::gradient(const Eigen::VectorXd&, double, Eigen::Ref<Eigen::VectorXd>) const {
    throw InvalidParameter("model '" + id() + "' has no analytic gradient");
}

std::map<std::string, double> ModelSpec::derived(const Eigen::VectorXd&) const { return {}; }

bool ModelSpec::in_domain(const Eigen::VectorXd& p) const {
    if (static_cast<std::size_t>(p.size()) != params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const double v = p(static_cast<Eigen::Index>(i));
        if (!std::isfinite(v)) return false;
        switch (params_[i].constraint) {
            case Constraint::positive:
                if (!(v > 0.0)) return false;
                break;
            case Constraint::stretch:
                if (!(v > kStretchMin && v < kStretchMax)) return false;
                break;
            case Constraint::none: break;
        }
    }
    return true;
}

std::unique_ptr<ModelSpec> make_model(std::string_view id, const ModelOptions& options) {
    std::unique_ptr<ModelSpec> m;
    if (id == "lorentzian") {
        m = std::make_unique<PeakModel>(PeakModel::Shape::lorentzian, options.peaks);
    } else if (id == "gaussian") {
        m = std::make_unique<PeakModel>(PeakModel::Shape::gaussian, options.peaks);
    } else if (id == "exp_decay") {
        m = std::make_unique<ExpDecay>();
    } else if (id == "stretched_exp") {
        m = std::make_unique<StretchedExp>();
    } else if (id == "damped_sinusoid") {
        m = std::make_unique<OscillatingStretch>(OscillatingStretch::Carrier::cosine);
    } else if (id == "sin2_stretched") {
        m = std::make_unique<OscillatingStretch>(OscillatingStretch::Carrier::sine_squared);
    } else if (id == "g2_three_level") {
        m = std::make_unique<G2ThreeLevel>(options.constrained_g2);
    } else {
        throw InvalidParameter("unknown model '" + std::string(id) + "'");
    }
    m->set_analytic(options.analytic_jacobian);
    return m;
}

std::vector<std::string> model_ids() {
    return {"lorentzian",      "gaussian",       "exp_decay",     "stretched_exp",
            "damped_sinusoid", "sin2_stretched", "g2_three_level"};
}

double to_internal(Constraint c, double value) {
    switch (c) {
        case Constraint::positive: return std::log(value);
        case Constraint::stretch: {
            const double u = (value - kStretchMin) / (kStretchMax - kStretchMin);
            return std::log(u / (1.0 - u));
        }
        case Constraint::none: break;
    }
    return value;
}

double to_natural(Constraint c, double internal) {
    switch (c) {
        case Constraint::positive: return std::exp(internal);
        case Constraint::stretch:
            return kStretchMin + (kStretchMax - kStretchMin) / (1.0 + std::exp(-internal));
        case Constraint::none: break;
    }
    return internal;
}

double natural_derivative(Constraint c, double internal) {
    switch (c) {
        case Constraint::positive: return std::exp(internal);
        case Constraint::stretch: {
            const double s = 1.0 / (1.0 + std::exp(-internal));
            return (kStretchMax - kStretchMin) * s * (1.0 - s);
        }
        case Constraint::none: break;
    }
    return 1.0;
}

Eigen::MatrixXd numeric_jacobian(const ModelSpec& model, const Eigen::VectorXd& p,
                                 std::span<const double> x) {
    // Ridders' extrapolation of central differences, vectorized over x.
    constexpr int kTable = 16;
    constexpr double kShrink = 2.0;
    constexpr double kShrink2 = kShrink * kShrink;
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd j(n, p.size());

    auto central = [&](Eigen::Index k, double h) {
        Eigen::VectorXd up = p, down = p;
        up(k) += h;
        down(k) -= h;
        Eigen::VectorXd d(n);
        for (Eigen::Index i = 0; i < n; ++i)
            d(i) = (model.evaluate(up, x[i]) - model.evaluate(down, x[i])) / (2.0 * h);
        return d;
    };

    for (Eigen::Index k = 0; k < p.size(); ++k) {
        double h = 1e-3 * std::max(std::abs(p(k)), 1e-6);
        std::vector<std::vector<Eigen::VectorXd>> a(kTable, std::vector<Eigen::VectorXd>(kTable));
        a[0][0] = central(k, h);
        Eigen::VectorXd best = a[0][0];
        double best_err = std::numeric_limits<double>::infinity();
        for (int i = 1; i < kTable; ++i) {
            h /= kShrink;
            a[0][i] = central(k, h);
            double fac = kShrink2;
            for (int m = 1; m <= i; ++m) {
                a[m][i] = (a[m - 1][i] * fac - a[m - 1][i - 1]) / (fac - 1.0);
                fac *= kShrink2;
                const double err = std::max((a[m][i] - a[m - 1][i]).cwiseAbs().maxCoeff(),
                                            (a[m][i] - a[m - 1][i - 1]).cwiseAbs().maxCoeff());
                if (err <= best_err) {
                    best_err = err;
                    best = a[m][i];
                }
            }
            if ((a[i][i] - a[i - 1][i - 1]).cwiseAbs().maxCoeff() >= 2.0 * best_err) break;
        }
        j.col(k) = best;
    }
    return j;
}

Eigen::MatrixXd jacobian(const ModelSpec& model, const Eigen::VectorXd& p, std::span<const double> x) {
    if (!model.analytic()) return numeric_jacobian(model, p, x);
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd j(n, p.size());
    Eigen::VectorXd row(p.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        model.gradient(p, x[i], row);
        j.row(i) = row.transpose();
    }
    return j;
}

std::vector<std::string> zero_columns(const ModelSpec& model, const Eigen::MatrixXd& j) {
    std::vector<std::string> out;
    for (Eigen::Index k = 0; k < j.cols(); ++k)
        if (j.col(k).cwiseAbs().maxCoeff() == 0.0)
            out.push_back(model.params()[static_cast<std::size_t>(k)].name);
    return out;
}

}  // namespace cavspin::fit
