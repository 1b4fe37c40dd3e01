#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cavspin/kinetics.hpp"
#include "oracles.hpp"

using namespace cavspin;

TEST_CASE("rate_matrix: isolated decay has a single excited->ground entry") {
    const ThreeLevelRatesd r{0.0, 0.2, 0.0, 0.0};
    const Eigen::Matrix3d m = rate_matrix(r);
    Eigen::Matrix3d expected = Eigen::Matrix3d::Zero();
    expected(0, 1) = 0.2;
    expected(1, 1) = -0.2;
    CHECK(m == expected);
}

TEST_CASE("rate_matrix: columns sum to zero") {
    // Exact whenever the diagonal sums are representable.
    const Eigen::Matrix3d dyadic = rate_matrix(ThreeLevelRatesd{0.5, 0.25, 0.125, 0.0625});
    for (int c = 0; c < 3; ++c) CHECK(dyadic.col(c).sum() == 0.0);

    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto r = oracle::random_rates(rng);
        const Eigen::Matrix3d m = rate_matrix(r);
        CHECK(m.col(0).sum() == 0.0);
        CHECK(m.col(2).sum() == 0.0);
        // One rounding of radiative + shelve.
        CHECK(std::abs(m.col(1).sum()) <= std::numeric_limits<double>::epsilon() * std::abs(m(1, 1)));
    }
}

TEST_CASE("relaxation eigenvalues match the characteristic polynomial") {
    const auto r = oracle::paper_like_rates();
    const auto coeffs = oracle::char_poly(rate_matrix(r));
    auto roots = oracle::cubic_roots(coeffs[0], coeffs[1], coeffs[2]);
    std::sort(roots.begin(), roots.end(), [](auto a, auto b) { return a.real() < b.real(); });
    const auto lambdas = relaxation_eigenvalues(r);
    CHECK(std::abs(roots[2]) < 1e-12);
    CHECK(std::abs(lambdas[0] - roots[0]) < 1e-12);
    CHECK(std::abs(lambdas[1] - roots[1]) < 1e-12);

    // Eigen's general solver agrees too.
    Eigen::EigenSolver<Eigen::Matrix3d> es(rate_matrix(r));
    auto ev = es.eigenvalues();
    std::vector<std::complex<double>> sorted(ev.data(), ev.data() + 3);
    std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a.real() < b.real(); });
    CHECK(std::abs(sorted[0] - lambdas[0]) < 1e-12);
    CHECK(std::abs(sorted[1] - lambdas[1]) < 1e-12);
}

TEST_CASE("evolve: t = 0 is the identity") {
    const auto r = oracle::paper_like_rates();
    const PopulationStated p{0.3, 0.5, 0.2};
    const auto q = evolve(r, p, 0.0);
    CHECK(q.ground == p.ground);
    CHECK(q.excited == p.excited);
    CHECK(q.dark == p.dark);
}

TEST_CASE("evolve: pure radiative decay from the excited state") {
    const ThreeLevelRatesd r{0.0, 1.0 / 15.7, 0.0, 0.0};
    for (double t : {0.5, 5.3, 15.7, 40.0, 150.0}) {
        const auto p = evolve(r, PopulationStated::all_excited(), t);
        CHECK(p.excited == doctest::Approx(std::exp(-t / 15.7)).epsilon(1e-12));
        CHECK(p.total() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("evolve: long times reach the null-space stationary vector") {
    const auto r = oracle::paper_like_rates();
    const auto ns = oracle::null_space_steady_state(r);
    const auto p = evolve(r, PopulationStated::all_ground(), 1e5);
    CHECK(std::abs(p.ground - ns(0)) < 1e-12);
    CHECK(std::abs(p.excited - ns(1)) < 1e-12);
    CHECK(std::abs(p.dark - ns(2)) < 1e-12);
    const auto ss = steady_state(r);
    CHECK(std::abs(ss.excited - ns(1)) < 1e-14);
    CHECK(std::abs(ss.dark - ns(2)) < 1e-14);
}

TEST_CASE("property: closed form agrees with adaptive ODE integration on 1000 rate sets") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0, worst_sum = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto r = oracle::random_rates(rng);
        double a = u(rng), b = u(rng), c = u(rng);
        const double s = a + b + c;
        const PopulationStated p0{a / s, b / s, 1.0 - a / s - b / s};
        const double t = oracle::log_uniform(rng, 0.1, 500.0);
        const auto p = evolve(r, p0, t);
        const auto ref = oracle::integrate_rates(r, {p0.ground, p0.excited, p0.dark}, t);
        worst = std::max({worst, std::abs(p.ground - ref[0]), std::abs(p.excited - ref[1]),
                          std::abs(p.dark - ref[2])});
        worst_sum = std::max(worst_sum, std::abs(p.total() - 1.0));
    }
    CHECK(worst < 1e-8);
    CHECK(worst_sum < 1e-9);
}

TEST_CASE("evolve: near-degenerate eigenvalues take the matrix-exponential path") {
    // With pump = 0 the reduced generator is triangular with eigenvalues
    // -(radiative + shelve) and -deshelve, equal here.
    const ThreeLevelRatesd r{0.0, 0.05, 0.05, 0.1};
    const auto lambdas = relaxation_eigenvalues(r);
    CHECK(std::abs(lambdas[0] - lambdas[1]) < 1e-12);
    for (double t : {1.0, 10.0, 35.0}) {
        const auto p = evolve(r, PopulationStated::all_excited(), t);
        const auto ref = oracle::integrate_rates(r, {0.0, 1.0, 0.0}, t);
        CHECK(std::abs(p.ground - ref[0]) < 1e-10);
        CHECK(std::abs(p.excited - ref[1]) < 1e-10);
        CHECK(std::abs(p.dark - ref[2]) < 1e-10);
        // Degenerate triangular block: p_d = ks t e^{-λt}.
        CHECK(p.dark == doctest::Approx(0.05 * t * std::exp(-0.1 * t)).epsilon(1e-10));
    }
}

TEST_CASE("evolve: oscillatory (complex eigenvalue) regime agrees with ODE") {
    const ThreeLevelRatesd r{5.0, 0.01, 5.0, 5.0};
    const auto lambdas = relaxation_eigenvalues(r);
    REQUIRE(std::abs(lambdas[0].imag()) > 0.0);
    for (double t : {0.05, 0.3, 1.0, 4.0}) {
        const auto p = evolve(r, PopulationStated::all_ground(), t);
        const auto ref = oracle::integrate_rates(r, {1.0, 0.0, 0.0}, t);
        CHECK(std::abs(p.excited - ref[1]) < 1e-9);
        CHECK(std::abs(p.dark - ref[2]) < 1e-9);
    }
    CHECK_THROWS_AS(g2_fit_params_from_rates(r), DomainError);
}

TEST_CASE("g2_analytic: limits") {
    const auto r = oracle::paper_like_rates();
    CHECK(g2_analytic(r, 0.0) == 0.0);
    const double horizon = 50.0 * std::max(1.0 / r.radiative, r.dark_lifetime());
    for (double tau : {horizon * 1.001, 2.0 * horizon, 10.0 * horizon})
        CHECK(std::abs(g2_analytic(r, tau) - 1.0) < 1e-6);
    CHECK(g2_analytic(r, -30.0) == g2_analytic(r, 30.0));
}

TEST_CASE("g2_analytic: bunching shoulder against the ODE oracle") {
    const auto r = oracle::paper_like_rates();
    const double pe_ss = oracle::null_space_steady_state(r)(1);
    double peak = 0.0;
    for (double tau = 0.0; tau <= 400.0; tau += 0.5) {
        const double g = g2_analytic(r, tau);
        const double ref = oracle::integrate_rates(r, {1.0, 0.0, 0.0}, tau)[1] / pe_ss;
        CHECK(std::abs(g - ref) < 1e-8);
        peak = std::max(peak, g);
    }
    CHECK(peak > 1.0);

    // Shoulder decay time from two late ODE samples, where the fast term
    // has died out.
    auto excess = [&](double tau) { return oracle::integrate_rates(r, {1.0, 0.0, 0.0}, tau)[1] / pe_ss - 1.0; };
    const double t_a = 250.0, t_b = 350.0;
    const double shoulder = (t_b - t_a) / std::log(excess(t_a) / excess(t_b));
    const auto fp = g2_fit_params_from_rates(r);
    CHECK(fp.t2 == doctest::Approx(shoulder).epsilon(1e-5));
    // Faster than the bare dark lifetime: the slow mode mixes in the pump
    // and shelving rates.
    CHECK(fp.t2 == doctest::Approx(55.349662114444975).epsilon(1e-9));
}

TEST_CASE("g2_analytic: shelve = 0 reduces to the two-level form") {
    const ThreeLevelRatesd r{0.03, 1.0 / 15.7, 0.0, 0.02};
    const double lambda = r.pump + r.radiative;
    for (double tau = 0.0; tau < 200.0; tau += 3.7)
        CHECK(std::abs(g2_analytic(r, tau) - (1.0 - std::exp(-lambda * tau))) < 1e-10);
}

TEST_CASE("g2_analytic: error paths") {
    CHECK_THROWS_AS(g2_analytic(ThreeLevelRatesd{0.0, 0.1, 0.01, 0.01}, 1.0), NoSteadyState);
    CHECK_THROWS_AS(g2_analytic(ThreeLevelRatesd{0.1, 0.1, 0.01, 0.0}, 1.0), NoSteadyState);
    CHECK_THROWS_AS(g2_analytic(ThreeLevelRatesd{0.1, 0.0, 0.01, 0.01}, 1.0), InvalidParameter);
    CHECK_THROWS_AS(g2_analytic(ThreeLevelRatesd{-0.1, 0.1, 0.01, 0.01}, 1.0), InvalidParameter);
    CHECK_THROWS_AS(evolve(oracle::paper_like_rates(), PopulationStated{0.5, 0.6, 0.0}, 1.0),
                    InvalidParameter);
}

TEST_CASE("g2_fit_model: two-level and free-amplitude cases") {
    const G2FitParamsd two_level{1.0, 0.0, 12.0, 75.0};
    CHECK(g2_fit_model(two_level, 0.0) == 0.0);
    // Free antibunching amplitude: g2(0) = 1 - amp_anti + amp_bunch.
    const G2FitParamsd free_amp{0.921, 0.0, 10.0, 75.0};
    CHECK(g2_fit_model(free_amp, 0.0) == doctest::Approx(0.079).epsilon(1e-12));
    const G2FitParamsd with_bunch{0.921 + 0.3, 0.3, 10.0, 75.0};
    CHECK(g2_fit_model(with_bunch, 0.0) == doctest::Approx(0.079).epsilon(1e-12));
    CHECK_THROWS_AS(g2_fit_model(G2FitParamsd{1.0, 0.0, 0.0, 1.0}, 1.0), InvalidParameter);
}

TEST_CASE("property: eigen-mapped bi-exponential reproduces g2_analytic") {
    std::mt19937_64 rng(7);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const auto r = oracle::random_rates(rng);
        G2FitParamsd p;
        try {
            p = g2_fit_params_from_rates(r);
        } catch (const DomainError&) {
            continue;
        }
        ++checked;
        CHECK(p.amp_anti == doctest::Approx(1.0 + p.amp_bunch).epsilon(1e-10));
        for (double f : {0.0, 0.1, 0.5, 1.0, 3.0}) {
            const double tau = f * p.t2;
            CHECK(std::abs(g2_fit_model(p, tau) - g2_analytic(r, tau)) < 1e-9);
        }
    }
    CHECK(checked > 100);
}
