#pragma once

// Three-level (ground / excited / dark) rate-equation model of a single
// emitter. Times are in ns and rates in 1/ns everywhere in this header.
//
// State vector ordering is (ground, excited, dark). The generator M of
// dp/dt = M p has columns summing to zero:
//
//        | -pump   radiative          deshelve |
//    M = |  pump  -(radiative+shelve)  0       |
//        |  0      shelve             -deshelve|

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "cavspin/errors.hpp"

namespace cavspin {

template <typename Scalar>
struct ThreeLevelRates {
    Scalar pump{0};       ///< ground -> excited
    Scalar radiative{1};  ///< excited -> ground, emits a photon
    Scalar shelve{0};     ///< excited -> dark
    Scalar deshelve{0};   ///< dark -> ground

    /// 1/deshelve; infinite when the dark state never empties.
    [[nodiscard]] Scalar dark_lifetime() const {
        return deshelve > Scalar(0) ? Scalar(1) / deshelve
                                    : std::numeric_limits<Scalar>::infinity();
    }

    void validate() const {
        using std::isfinite;
        auto check = [](Scalar v, const char* name) {
            if (!(v >= Scalar(0)) || !isfinite(v))
                throw InvalidParameter(std::string("rate '") + name +
                                       "' must be finite and >= 0");
        };
        check(pump, "pump");
        check(radiative, "radiative");
        check(shelve, "shelve");
        check(deshelve, "deshelve");
        if (!(radiative > Scalar(0))) throw InvalidParameter("rate 'radiative' must be > 0");
    }
};

template <typename Scalar>
struct PopulationState {
    Scalar ground{1};
    Scalar excited{0};
    Scalar dark{0};

    using Vector = Eigen::Matrix<Scalar, 3, 1>;

    [[nodiscard]] Vector vector() const { return Vector(ground, excited, dark); }
    static PopulationState from_vector(const Vector& v) { return {v(0), v(1), v(2)}; }

    [[nodiscard]] Scalar total() const { return ground + excited + dark; }

    static PopulationState all_ground() { return {Scalar(1), Scalar(0), Scalar(0)}; }
    static PopulationState all_excited() { return {Scalar(0), Scalar(1), Scalar(0)}; }

    void validate() const {
        using std::abs;
        for (Scalar p : {ground, excited, dark})
            if (!(p >= Scalar(0) && p <= Scalar(1)))
                throw InvalidParameter("population components must lie in [0, 1]");
        if (abs(total() - Scalar(1)) > Scalar(1e-9))
            throw InvalidParameter("populations must sum to 1");
    }
};

using ThreeLevelRatesd = ThreeLevelRates<double>;
using PopulationStated = PopulationState<double>;

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rate_matrix(const ThreeLevelRates<Scalar>& r) {
    r.validate();
    Eigen::Matrix<Scalar, 3, 3> m;
    // clang-format off
    m << -r.pump,  r.radiative,              r.deshelve,
          r.pump, -(r.radiative + r.shelve), Scalar(0),
          Scalar(0), r.shelve,              -r.deshelve;
    // clang-format on
    return m;
}

namespace detail {

// Dynamics restricted to (excited, dark); ground = 1 - excited - dark.
// x' = A x + b with b = (pump, 0).
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> reduced_generator(const ThreeLevelRates<Scalar>& r) {
    Eigen::Matrix<Scalar, 2, 2> a;
    a << -(r.pump + r.radiative + r.shelve), -r.pump, r.shelve, -r.deshelve;
    return a;
}

// Closed-form exp(A t) of a real 2x2 matrix written as
// e^{mt} [C(t) I + S(t) (A - m I)], with m = tr/2 and q^2 = m^2 - det.
// Stable through q -> 0 because S is evaluated as sinh(qt)/q directly.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> exp2x2(const Eigen::Matrix<Scalar, 2, 2>& a, Scalar t) {
    using std::cos;
    using std::cosh;
    using std::exp;
    using std::sin;
    using std::sinh;
    using std::sqrt;
    const Scalar m = a.trace() / Scalar(2);
    const Scalar disc = m * m - a.determinant();
    Scalar c, s;
    if (disc >= Scalar(0)) {
        const Scalar q = sqrt(disc);
        if (q * t < Scalar(1)) {
            const Scalar em = exp(m * t);
            c = em * cosh(q * t);
            s = q > Scalar(0) ? em * sinh(q * t) / q : em * t;
        } else {
            const Scalar up = exp((m + q) * t);
            const Scalar down = exp((m - q) * t);
            c = (up + down) / Scalar(2);
            s = (up - down) / (Scalar(2) * q);
        }
    } else {
        const Scalar w = sqrt(-disc);
        const Scalar em = exp(m * t);
        c = em * cos(w * t);
        s = em * sin(w * t) / w;
    }
    Eigen::Matrix<Scalar, 2, 2> shifted = a;
    shifted.diagonal().array() -= m;
    return c * Eigen::Matrix<Scalar, 2, 2>::Identity() + s * shifted;
}

template <typename Scalar>
PopulationState<Scalar> clamp_populations(Scalar excited, Scalar dark) {
    excited = std::clamp(excited, Scalar(0), Scalar(1));
    dark = std::clamp(dark, Scalar(0), Scalar(1) - excited);
    return {Scalar(1) - excited - dark, excited, dark};
}

}  // namespace detail

/// Nonzero eigenvalues of the rate matrix (roots of λ² + bλ + c), ordered
/// fast (largest |Re|) first. They are complex conjugates when the cyclic
/// ground -> excited -> dark -> ground flow dominates.
template <typename Scalar>
std::array<std::complex<Scalar>, 2> relaxation_eigenvalues(const ThreeLevelRates<Scalar>& r) {
    r.validate();
    const auto a = detail::reduced_generator(r);
    const Scalar m = a.trace() / Scalar(2);
    const std::complex<Scalar> q = std::sqrt(std::complex<Scalar>(m * m - a.determinant()));
    return {std::complex<Scalar>(m) - q, std::complex<Scalar>(m) + q};
}

/// Stationary populations. With shelve == 0 the dark state is decoupled and
/// the two-level stationary state is returned.
template <typename Scalar>
PopulationState<Scalar> steady_state(const ThreeLevelRates<Scalar>& r) {
    r.validate();
    if (r.shelve == Scalar(0)) {
        const Scalar pe = r.pump / (r.pump + r.radiative);
        return {Scalar(1) - pe, pe, Scalar(0)};
    }
    if (r.deshelve == Scalar(0)) return {Scalar(0), Scalar(0), Scalar(1)};
    const Scalar c = r.pump * r.shelve + r.pump * r.deshelve + r.radiative * r.deshelve +
                     r.shelve * r.deshelve;
    const Scalar pe = r.pump * r.deshelve / c;
    const Scalar pd = r.shelve * pe / r.deshelve;
    return detail::clamp_populations(pe, pd);
}

/// Populations after time t (ns) starting from `initial`.
///
/// Uses the closed-form exponential of the reduced 2x2 generator. Falls
/// back to a general matrix exponential of the 3x3 generator when the two
/// relaxation eigenvalues are nearly degenerate with each other or with 0
/// (relative gap < 1e-8).
template <typename Scalar>
PopulationState<Scalar> evolve(const ThreeLevelRates<Scalar>& r,
                               const PopulationState<Scalar>& initial, Scalar t) {
    using std::abs;
    r.validate();
    initial.validate();
    if (!(t >= Scalar(0))) throw InvalidParameter("evolution time must be >= 0");
    if (t == Scalar(0)) return initial;

    const auto lambdas = relaxation_eigenvalues(r);
    const Scalar scale = std::max(abs(lambdas[0]), abs(lambdas[1]));
    const Scalar tol = Scalar(1e-8) * scale;
    const bool degenerate = abs(lambdas[0] - lambdas[1]) < tol || abs(lambdas[0]) < tol ||
                            abs(lambdas[1]) < tol;

    if (degenerate) {
        const Eigen::Matrix<Scalar, 3, 3> propagator = (rate_matrix(r) * t).exp();
        const auto p = (propagator * initial.vector()).eval();
        return detail::clamp_populations(p(1), p(2));
    }

    const auto a = detail::reduced_generator(r);
    const Eigen::Matrix<Scalar, 2, 1> b(r.pump, Scalar(0));
    const Eigen::Matrix<Scalar, 2, 1> x_ss = -a.partialPivLu().solve(b);
    const Eigen::Matrix<Scalar, 2, 1> x0(initial.excited, initial.dark);
    const Eigen::Matrix<Scalar, 2, 1> x = x_ss + detail::exp2x2(a, t) * (x0 - x_ss);
    return detail::clamp_populations(x(0), x(1));
}

/// Normalized intensity correlation of the ideal three-level model: the
/// excited population at |tau| after a detection (emitter reset to ground),
/// divided by its stationary value.
template <typename Scalar>
Scalar g2_analytic(const ThreeLevelRates<Scalar>& r, Scalar tau) {
    using std::abs;
    r.validate();
    if (!(r.pump > Scalar(0))) throw NoSteadyState("g2 needs pump > 0 for a steady state");
    if (r.shelve > Scalar(0) && r.deshelve == Scalar(0))
        throw NoSteadyState("dark state with deshelve = 0 traps the emitter");
    const Scalar pe_ss = steady_state(r).excited;
    return evolve(r, PopulationState<Scalar>::all_ground(), abs(tau)).excited / pe_ss;
}

/// Bi-exponential correlation model
/// 1 - amp_anti·exp(-|τ|/t1) + amp_bunch·exp(-|τ|/t2).
template <typename Scalar>
struct G2FitParams {
    Scalar amp_anti{1};
    Scalar amp_bunch{0};
    Scalar t1{1};
    Scalar t2{1};
};

using G2FitParamsd = G2FitParams<double>;

template <typename Scalar>
Scalar g2_fit_model(const G2FitParams<Scalar>& p, Scalar tau) {
    using std::abs;
    using std::exp;
    if (!(p.t1 > Scalar(0)) || !(p.t2 > Scalar(0)))
        throw InvalidParameter("g2 time constants must be > 0");
    const Scalar at = abs(tau);
    return Scalar(1) - p.amp_anti * exp(-at / p.t1) + p.amp_bunch * exp(-at / p.t2);
}

/// Maps rates onto the bi-exponential form through the spectral projectors
/// of the reduced generator. The result satisfies amp_anti = 1 + amp_bunch.
/// Requires real relaxation eigenvalues.
template <typename Scalar>
G2FitParams<Scalar> g2_fit_params_from_rates(const ThreeLevelRates<Scalar>& r) {
    using std::abs;
    r.validate();
    if (!(r.pump > Scalar(0))) throw NoSteadyState("g2 needs pump > 0 for a steady state");
    const auto lambdas = relaxation_eigenvalues(r);
    const Scalar scale = std::max(abs(lambdas[0]), abs(lambdas[1]));
    if (abs(lambdas[0].imag()) > Scalar(1e-12) * scale)
        throw DomainError("relaxation eigenvalues are complex; g2 oscillates");
    const Scalar fast = lambdas[0].real();
    const Scalar slow = lambdas[1].real();
    if (abs(fast - slow) < Scalar(1e-8) * scale || abs(slow) < Scalar(1e-8) * scale)
        throw DomainError("degenerate relaxation rates; bi-exponential form is ill-defined");

    const auto a = detail::reduced_generator(r);
    const Eigen::Matrix<Scalar, 2, 1> b(r.pump, Scalar(0));
    const Eigen::Matrix<Scalar, 2, 1> x_ss = -a.partialPivLu().solve(b);
    using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
    const Mat2 eye = Mat2::Identity();
    const Mat2 proj_fast = (a - slow * eye) / (fast - slow);
    const Mat2 proj_slow = (a - fast * eye) / (slow - fast);
    const Scalar pe = x_ss(0);

    G2FitParams<Scalar> p;
    p.amp_anti = (proj_fast * x_ss)(0) / pe;
    p.amp_bunch = -(proj_slow * x_ss)(0) / pe;
    p.t1 = Scalar(-1) / fast;
    p.t2 = Scalar(-1) / slow;
    return p;
}

}  // namespace cavspin
