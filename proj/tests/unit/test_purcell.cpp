#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "cavspin/kinetics.hpp"
#include "cavspin/purcell.hpp"

using namespace cavspin;

TEST_CASE("purcell_from_cavity: reduced-volume arithmetic") {
    CavityParamsd c;
    c.quality_factor = 5100.0;
    c.mode_volume = 1.0;
    const double expected = 3.0 * 5100.0 / (4.0 * std::numbers::pi * std::numbers::pi) + 1.0;
    CHECK(purcell_from_cavity(c) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(purcell_from_cavity(c) == doctest::Approx(388.55).epsilon(1e-4));

    CavityParamsd doubled = c;
    doubled.quality_factor *= 2.0;
    CHECK(purcell_from_cavity(doubled) - 1.0 == doctest::Approx(2.0 * (purcell_from_cavity(c) - 1.0)).epsilon(1e-14));

    CavityParamsd uncoupled = c;
    uncoupled.spatial_overlap = 0.0;
    uncoupled.spectral_match = 0.0;
    CHECK(purcell_from_cavity(uncoupled) == 1.0);
}

TEST_CASE("purcell_from_cavity: physical and reduced volume units agree") {
    CavityParamsd reduced;
    reduced.quality_factor = 5100.0;
    reduced.mode_volume = 0.8;
    reduced.wavelength_um = 1.078;
    reduced.index = 2.6;
    CavityParamsd physical = reduced;
    physical.volume_unit = ModeVolumeUnit::cubic_microns;
    physical.mode_volume = 0.8 * std::pow(1.078 / 2.6, 3);
    CHECK(purcell_from_cavity(physical) == doctest::Approx(purcell_from_cavity(reduced)).epsilon(1e-13));

    CavityParamsd bad = reduced;
    bad.index = 0.5;
    CHECK_THROWS_AS(purcell_from_cavity(bad), InvalidParameter);
    bad = reduced;
    bad.spatial_overlap = 1.5;
    CHECK_THROWS_AS(purcell_from_cavity(bad), InvalidParameter);
}

TEST_CASE("purcell_from_intensity") {
    CHECK(purcell_from_intensity(3.0, 3.0) == 1.0);
    CHECK(purcell_from_intensity(53.0, 1.0) == 53.0);
    CHECK_THROWS_AS(purcell_from_intensity(1.0, 0.0), InvalidParameter);
}

TEST_CASE("purcell_from_lifetimes: golden number and limits") {
    const double f = purcell_from_lifetimes(5.3, 15.7, 75.0, 0.053);
    CHECK(f == doctest::Approx(47.826).epsilon(1e-4));
    CHECK(purcell_from_lifetimes(15.7, 15.7, 75.0, 0.053) == 1.0);

    const double limit = (15.7 - 5.3) / (0.053 * 5.3) + 1.0;
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(purcell_from_lifetimes(5.3, 15.7, inf, 0.053) == doctest::Approx(limit).epsilon(1e-15));
    CHECK(purcell_from_lifetimes(5.3, 15.7, 1e9, 0.053) == doctest::Approx(limit).epsilon(1e-7));

    CHECK_THROWS_AS(purcell_from_lifetimes(16.0, 15.7, 75.0, 0.053), DomainError);
    CHECK_THROWS_AS(purcell_from_lifetimes(5.3, 80.0, 75.0, 0.053), DomainError);
    CHECK_THROWS_AS(purcell_from_lifetimes(5.3, 15.7, 75.0, 0.0), InvalidParameter);
}

TEST_CASE("property: purcell_from_lifetimes is monotone in tau_on and tau_dark") {
    double prev = std::numeric_limits<double>::infinity();
    for (double tau_on = 1.0; tau_on <= 15.7; tau_on += 0.1) {
        const double f = purcell_from_lifetimes(tau_on, 15.7, 75.0, 0.053);
        CHECK(f < prev);
        prev = f;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double tau_dark = 16.0; tau_dark < 1e4; tau_dark *= 1.1) {
        const double f = purcell_from_lifetimes(5.3, 15.7, tau_dark, 0.053);
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("Debye-Waller relation: worked values") {
    CHECK(purcell_from_dw(0.053, 0.053) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(purcell_from_dw(0.053, 0.748) == doctest::Approx(53.04).epsilon(1e-3));
    CHECK(purcell_from_dw(0.053, 0.73) == doctest::Approx(48.31).epsilon(1e-3));
    CHECK(dw_on_resonance(1.0, 0.053) == doctest::Approx(0.053).epsilon(1e-15));
    CHECK(dw_on_resonance(53.0, 0.053) == doctest::Approx(0.7479).epsilon(1e-4));
    CHECK(dw_on_resonance(48.0, 0.053) == doctest::Approx(0.7287).epsilon(1e-4));
    CHECK_THROWS_AS(dw_on_resonance(0.5, 0.053), InvalidParameter);
    CHECK_THROWS_AS(purcell_from_dw(0.053, 1.0), InvalidParameter);

    // Brute-force inversion: bisection on dw_on_resonance for beta = 0.73.
    double lo = 1.0, hi = 1000.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (dw_on_resonance(mid, 0.053) < 0.73 ? lo : hi) = mid;
    }
    CHECK(purcell_from_dw(0.053, 0.73) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
}

TEST_CASE("property: DW round trip on 10^4 random (F, alpha)") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> log_f(0.0, std::log(1e3));
    std::uniform_real_distribution<double> u_alpha(0.001, 0.5);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double f = std::exp(log_f(rng));
        const double alpha = u_alpha(rng);
        const double beta = dw_on_resonance(f, alpha);
        worst = std::max(worst, std::abs(purcell_from_dw(alpha, beta) - f) / f);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("property: DW round trip error tracks the conditioning of beta") {
    // Storing beta costs eps/(1 - beta) relative in F.
    std::mt19937_64 rng(321);
    std::uniform_real_distribution<double> log_f(0.0, std::log(1e4));
    std::uniform_real_distribution<double> u_alpha(0.001, 0.9);
    const double eps = std::numeric_limits<double>::epsilon();
    for (int i = 0; i < 10000; ++i) {
        const double f = std::exp(log_f(rng));
        const double alpha = u_alpha(rng);
        const double beta = dw_on_resonance(f, alpha);
        if (!(beta < 1.0)) continue;
        const double err = std::abs(purcell_from_dw(alpha, beta) - f) / f;
        CHECK(err <= 8.0 * eps / (1.0 - beta));
    }
}

TEST_CASE("entanglement_rate_gain") {
    CHECK(entanglement_rate_gain(0.75, 0.053) == doctest::Approx(200.25).epsilon(1e-4));
    CHECK(entanglement_rate_gain(0.729, 0.053) == doctest::Approx(189.19).epsilon(1e-4));
    CHECK(entanglement_rate_gain(0.053, 0.053) == 1.0);
}

TEST_CASE("consistency_report: quoted values agree to about ten percent") {
    EmissionBudget b;
    b.intensity_on = 53.0;
    b.intensity_off = 1.0;
    b.tau_on = 5.3;
    b.tau_off = 15.7;
    b.tau_dark = 75.0;
    b.beta = 0.748;
    const auto report = consistency_report(b);
    REQUIRE(report.route("intensity"));
    REQUIRE(report.route("lifetime"));
    REQUIRE(report.route("dw"));
    CHECK_FALSE(report.route("external"));
    const double f_life = *report.route("lifetime");
    CHECK(report.max_relative_spread == doctest::Approx((53.0365 - f_life) / f_life).epsilon(1e-4));
    CHECK(report.max_relative_spread > 0.09);
    CHECK(report.max_relative_spread < 0.12);
    CHECK_FALSE(report.flagged);
    CHECK(consistency_report(b, 0.05).flagged);

    std::ostringstream out;
    write_report(out, report);
    CHECK(out.str().find("F_lifetime=47.82") != std::string::npos);
    CHECK(out.str().find("flagged=false") != std::string::npos);
}

TEST_CASE("consistency_report: a forward-generated budget is self-consistent") {
    for (double f : {1.0, 16.0, 48.0, 53.0, 300.0}) {
        const auto b = synthesize_budget(f, 0.053, 15.7, 75.0);
        const auto report = consistency_report(b);
        CHECK(report.max_relative_spread < 1e-9);
        CHECK(*report.route("lifetime") == doctest::Approx(f).epsilon(1e-12));
    }
}

TEST_CASE("consistency_report: a broken route reports its error and the rest still compute") {
    EmissionBudget b;
    b.tau_on = 20.0;
    b.tau_off = 15.7;
    b.tau_dark = 75.0;
    b.beta = 0.748;
    b.intensity_on = 53.0;
    b.intensity_off = 1.0;
    const auto report = consistency_report(b);
    CHECK_FALSE(report.route("lifetime"));
    CHECK_FALSE(report.routes[1].error.empty());
    CHECK(report.route("dw"));
    CHECK(report.route("intensity"));
}

TEST_CASE("lifetime route recovers F from kinetics-simulated decays") {
    // Emitter with DW factor alpha: the cavity multiplies only the ZPL part
    // of the radiative rate. The nonradiative channel is the shelving rate.
    const double alpha = 0.053, tau_off = 15.7, tau_nr = 75.0;
    const double radiative = 1.0 / tau_off - 1.0 / tau_nr;
    auto measured_lifetime = [&](double rad) {
        const ThreeLevelRatesd r{0.0, rad, 1.0 / tau_nr, 0.0};
        const double t = 3.0;
        return -t / std::log(evolve(r, PopulationStated::all_excited(), t).excited);
    };
    for (double f : {5.0, 16.0, 48.0, 53.0}) {
        const double enhanced = f * alpha * radiative + (1.0 - alpha) * radiative;
        const double t_on = measured_lifetime(enhanced);
        const double t_off = measured_lifetime(radiative);
        CHECK(t_off == doctest::Approx(tau_off).epsilon(1e-10));
        CHECK(purcell_from_lifetimes(t_on, t_off, tau_nr, alpha) == doctest::Approx(f).epsilon(0.01));
    }
}
