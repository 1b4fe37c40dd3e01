#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "cavspin/kinetics.hpp"

namespace oracle {

using State3 = std::array<double, 3>;

/// Integrates dp/dt = M p with an adaptive Dormand-Prince stepper.
inline State3 integrate_rates(const cavspin::ThreeLevelRatesd& r, State3 p, double t,
                              double tol = 1e-13) {
    namespace ode = boost::numeric::odeint;
    if (t == 0.0) return p;
    auto rhs = [&](const State3& x, State3& dx, double) {
        dx[0] = -r.pump * x[0] + r.radiative * x[1] + r.deshelve * x[2];
        dx[1] = r.pump * x[0] - (r.radiative + r.shelve) * x[1];
        dx[2] = r.shelve * x[1] - r.deshelve * x[2];
    };
    auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<State3>());
    ode::integrate_adaptive(stepper, rhs, p, 0.0, t, std::min(t, 0.01));
    return p;
}

/// Stationary vector from the null space of the rate matrix.
inline Eigen::Vector3d null_space_steady_state(const cavspin::ThreeLevelRatesd& r) {
    Eigen::Matrix3d m;
    m << -r.pump, r.radiative, r.deshelve, r.pump, -(r.radiative + r.shelve), 0.0, 0.0, r.shelve,
        -r.deshelve;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
    Eigen::Vector3d v = lu.kernel().col(0);
    return v / v.sum();
}

/// Roots of the monic cubic x³ + a x² + b x + c (trigonometric / Cardano).
inline std::array<std::complex<double>, 3> cubic_roots(double a, double b, double c) {
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double shift = -a / 3.0;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    std::array<std::complex<double>, 3> out;
    if (disc < 0.0) {
        const double r = 2.0 * std::sqrt(-p / 3.0);
        const double phi = std::acos(std::clamp(3.0 * q / (p * r), -1.0, 1.0));
        for (int k = 0; k < 3; ++k)
            out[static_cast<std::size_t>(k)] = r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0) + shift;
    } else {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-q / 2.0 + s);
        const double v = std::cbrt(-q / 2.0 - s);
        const std::complex<double> w(-0.5, std::sqrt(3.0) / 2.0);
        out[0] = u + v + shift;
        out[1] = w * u + std::conj(w) * v + shift;
        out[2] = std::conj(w) * u + w * v + shift;
    }
    return out;
}

/// Characteristic polynomial coefficients (x³ + a x² + b x + c) of a 3×3
/// matrix, from its invariants.
template <typename M>
std::array<double, 3> char_poly(const M& m) {
    const auto tr = m.trace();
    const auto minors = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) + (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) +
                        (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1));
    return {std::real(-tr), std::real(minors), std::real(-m.determinant())};
}

/// Mean of f over [a, b] by 20-point Gauss-Legendre.
template <typename F>
double bin_average(F f, double a, double b) {
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b) / (b - a);
}

/// Log-uniform sample on [lo, hi].
inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

inline cavspin::ThreeLevelRatesd random_rates(std::mt19937_64& rng) {
    cavspin::ThreeLevelRatesd r;
    r.pump = log_uniform(rng, 1e-3, 1.0);
    r.radiative = log_uniform(rng, 1e-2, 1.0);
    r.shelve = log_uniform(rng, 1e-4, 0.5);
    r.deshelve = log_uniform(rng, 1e-4, 0.5);
    return r;
}

/// Rates of the form used in the paper-like examples.
inline cavspin::ThreeLevelRatesd paper_like_rates() {
    return {0.05, 1.0 / 15.7, 0.01, 1.0 / 75.0};
}

}  // namespace oracle
