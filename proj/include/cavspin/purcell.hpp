#pragma once

// Purcell-factor relations between cavity parameters, zero-phonon-line
// intensities, excited-state lifetimes and Debye-Waller (DW) factors.

#include <cmath>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cavspin/errors.hpp"

namespace cavspin {

/// Intrinsic zero-phonon-line fraction of the neutral divacancy.
inline constexpr double kIntrinsicDebyeWaller = 0.053;

/// Default relative spread above which the consistency report raises a flag.
inline constexpr double kDefaultConsistencyThreshold = 0.25;

enum class ModeVolumeUnit {
    cubic_microns,        ///< physical volume in µm³
    reduced_wavelength3,  ///< dimensionless, in units of (λ/n)³
};

template <typename Scalar>
struct CavityParams {
    Scalar quality_factor{1};
    Scalar mode_volume{1};
    ModeVolumeUnit volume_unit = ModeVolumeUnit::reduced_wavelength3;
    Scalar wavelength_um{1};
    Scalar index{1};
    Scalar spatial_overlap{1};  ///< F₁
    Scalar spectral_match{1};   ///< F₂

    void validate() const {
        if (!(quality_factor > Scalar(0))) throw InvalidParameter("Q must be > 0");
        if (!(mode_volume > Scalar(0))) throw InvalidParameter("mode volume must be > 0");
        if (!(wavelength_um > Scalar(0))) throw InvalidParameter("wavelength must be > 0");
        if (!(index >= Scalar(1))) throw InvalidParameter("refractive index must be >= 1");
        if (!(spatial_overlap >= Scalar(0) && spatial_overlap <= Scalar(1)))
            throw InvalidParameter("spatial overlap F1 must lie in [0, 1]");
        if (!(spectral_match >= Scalar(0) && spectral_match <= Scalar(1)))
            throw InvalidParameter("spectral match F2 must lie in [0, 1]");
    }
};

using CavityParamsd = CavityParams<double>;

/// F = F₁·F₂·3Q/(4π²V)·(λ/n)³ + 1.
template <typename Scalar>
Scalar purcell_from_cavity(const CavityParams<Scalar>& c) {
    c.validate();
    const Scalar pi = std::numbers::pi_v<Scalar>;
    Scalar volume_in_reduced = c.mode_volume;
    if (c.volume_unit == ModeVolumeUnit::cubic_microns) {
        const Scalar reduced = c.wavelength_um / c.index;
        volume_in_reduced = c.mode_volume / (reduced * reduced * reduced);
    }
    return c.spatial_overlap * c.spectral_match * Scalar(3) * c.quality_factor /
               (Scalar(4) * pi * pi * volume_in_reduced) +
           Scalar(1);
}

/// Ratio of zero-phonon-line intensities on and off cavity resonance.
template <typename Scalar>
Scalar purcell_from_intensity(Scalar intensity_on, Scalar intensity_off) {
    if (!(intensity_off > Scalar(0))) throw InvalidParameter("off-resonance intensity must be > 0");
    if (!(intensity_on > Scalar(0))) throw InvalidParameter("on-resonance intensity must be > 0");
    return intensity_on / intensity_off;
}

/// F from lifetimes on/off resonance, corrected for nonradiative decay with
/// lifetime tau_dark: F = τ_d(τ_off − τ_on) / (α τ_on (τ_d − τ_off)) + 1.
/// tau_dark = +inf gives the no-dark-state limit.
template <typename Scalar>
Scalar purcell_from_lifetimes(Scalar tau_on, Scalar tau_off, Scalar tau_dark, Scalar alpha) {
    using std::isinf;
    if (!(alpha > Scalar(0) && alpha < Scalar(1)))
        throw InvalidParameter("DW factor alpha must lie in (0, 1)");
    if (!(tau_on > Scalar(0))) throw InvalidParameter("tau_on must be > 0");
    if (!(tau_on <= tau_off && tau_off < tau_dark))
        throw DomainError("lifetimes must satisfy 0 < tau_on <= tau_off < tau_dark");
    if (isinf(tau_dark)) return (tau_off - tau_on) / (alpha * tau_on) + Scalar(1);
    return tau_dark * (tau_off - tau_on) / (alpha * tau_on * (tau_dark - tau_off)) + Scalar(1);
}

/// F = β(α − 1) / (α(β − 1)).
template <typename Scalar>
Scalar purcell_from_dw(Scalar alpha, Scalar beta) {
    if (!(alpha > Scalar(0) && alpha < Scalar(1)))
        throw InvalidParameter("DW factor alpha must lie in (0, 1)");
    if (!(beta > Scalar(0) && beta < Scalar(1)))
        throw InvalidParameter("DW factor beta must lie in (0, 1)");
    return beta * (alpha - Scalar(1)) / (alpha * (beta - Scalar(1)));
}

/// Inverse of purcell_from_dw in beta: β = Fα / (1 + α(F − 1)).
template <typename Scalar>
Scalar dw_on_resonance(Scalar purcell, Scalar alpha) {
    if (!(purcell >= Scalar(1))) throw InvalidParameter("Purcell factor must be >= 1");
    if (!(alpha > Scalar(0) && alpha < Scalar(1)))
        throw InvalidParameter("DW factor alpha must lie in (0, 1)");
    return purcell * alpha / (Scalar(1) + alpha * (purcell - Scalar(1)));
}

/// Two-photon heralded entanglement scales with the square of the ZPL
/// fraction, so the rate gain is (β/α)².
template <typename Scalar>
Scalar entanglement_rate_gain(Scalar beta, Scalar alpha) {
    if (!(alpha > Scalar(0))) throw InvalidParameter("alpha must be > 0");
    if (!(beta >= alpha && beta < Scalar(1)))
        throw InvalidParameter("beta must satisfy alpha <= beta < 1");
    const Scalar ratio = beta / alpha;
    return ratio * ratio;
}

/// Measured quantities feeding the independent routes to F. Missing fields
/// disable the corresponding route.
struct EmissionBudget {
    double alpha = kIntrinsicDebyeWaller;
    std::optional<double> beta;
    std::optional<double> intensity_on;
    std::optional<double> intensity_off;
    std::optional<double> tau_on;
    std::optional<double> tau_off;
    std::optional<double> tau_dark;
    /// Purcell factor obtained elsewhere (e.g. from count rates), reported
    /// alongside the computed routes.
    std::optional<double> external_purcell;
};

struct PurcellRoute {
    std::string name;                ///< intensity | lifetime | dw | external
    std::optional<double> value;
    std::string error;               ///< set when the route was attempted and failed
};

struct ConsistencyReport {
    std::vector<PurcellRoute> routes;
    /// max |Fi − Fj| / min(Fi, Fj) over computed routes; 0 with fewer than two.
    double max_relative_spread = 0.0;
    double threshold = kDefaultConsistencyThreshold;
    bool flagged = false;

    [[nodiscard]] std::optional<double> route(const std::string& name) const;
};

ConsistencyReport consistency_report(const EmissionBudget& budget,
                                     double threshold = kDefaultConsistencyThreshold);

/// key=value lines: F_<route>=..., error_<route>=..., spread=..., flagged=...
void write_report(std::ostream& out, const ConsistencyReport& report);

/// Forward model: the budget an emitter with Purcell factor F would produce,
/// given its DW factor alpha, off-resonance lifetime and nonradiative
/// lifetime. The off-resonance ZPL intensity is normalized to 1.
EmissionBudget synthesize_budget(double purcell, double alpha, double tau_off, double tau_dark);

}  // namespace cavspin
