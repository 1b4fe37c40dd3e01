#pragma once

// Two-level (|0⟩, |+1⟩) spin dynamics: Bloch-vector rotations for ideal
// pulse sequences and the closed-form signal models for Rabi, Ramsey, Hahn
// echo and CPMG. Frequencies in MHz, times in ns.
//
// Bloch convention: sz = +1 is |0⟩, sz = −1 is |+1⟩. A pulse of phase φ
// rotates about (cos φ, sin φ, 0); free evolution at detuning δ rotates
// about +z by 2π·δ·t.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cavspin/errors.hpp"

namespace cavspin {

template <typename Scalar>
using BlochState = Eigen::Matrix<Scalar, 3, 1>;
using BlochStated = BlochState<double>;

/// MHz · ns -> cycles.
inline constexpr double kCyclesPerMHzNs = 1e-3;

/// Rodrigues rotation of `v` by `angle` (right-handed) about unit `axis`.
template <typename Scalar>
BlochState<Scalar> rotate(const BlochState<Scalar>& v, const BlochState<Scalar>& axis, Scalar angle) {
    using std::cos;
    using std::sin;
    const Scalar c = cos(angle);
    const Scalar s = sin(angle);
    return v * c + axis.cross(v) * s + axis * (axis.dot(v) * (Scalar(1) - c));
}

/// Ideal instantaneous pulse of rotation angle `angle` and phase `phase`.
template <typename Scalar>
BlochState<Scalar> apply_pulse(const BlochState<Scalar>& v, Scalar angle, Scalar phase) {
    using std::cos;
    using std::sin;
    return rotate(v, BlochState<Scalar>(cos(phase), sin(phase), Scalar(0)), angle);
}

/// Precession about z at `detuning_mhz` for `t_ns`.
template <typename Scalar>
BlochState<Scalar> precess(const BlochState<Scalar>& v, Scalar detuning_mhz, Scalar t_ns) {
    const Scalar angle = Scalar(2) * std::numbers::pi_v<Scalar> * detuning_mhz * t_ns *
                         Scalar(kCyclesPerMHzNs);
    return rotate(v, BlochState<Scalar>::UnitZ().eval(), angle);
}

/// A·exp(−(t/T)ⁿ) + offset type envelope. T = +inf disables decay.
struct DecayEnvelope {
    double time = std::numeric_limits<double>::infinity();  ///< T, same unit as the sweep
    double stretch = 1.0;                                    ///< n
    double amplitude = 1.0;                                  ///< A
    double offset = 0.0;

    void validate() const {
        if (!(time > 0.0)) throw InvalidParameter("envelope time constant must be > 0");
        if (!(stretch > 0.0)) throw InvalidParameter("stretch exponent must be > 0");
    }
    /// exp(−(t/T)ⁿ), without amplitude or offset.
    [[nodiscard]] double decay(double t) const {
        if (std::isinf(time)) return 1.0;
        return std::exp(-std::pow(std::abs(t) / time, stretch));
    }
};

/// Which quantity the Rabi sweep axis represents.
enum class RabiAxis {
    field_amplitude,  ///< Rabi frequency ∝ a
    power,            ///< Rabi frequency ∝ √a
};

/// |+1⟩ population after a resonant pulse of fixed length and swept drive:
/// offset + A·(1 − d(a)·cos(2π f_R s(a) t_p))/2, which is A·sin²(π f_R s t_p)
/// undamped. The envelope's T is in sweep units; damping relaxes toward
/// the fully mixed value.
std::vector<double> rabi_signal(double rabi_frequency_at_unit_mhz, const std::vector<double>& sweep,
                                double pulse_length_ns, const DecayEnvelope& envelope,
                                RabiAxis axis = RabiAxis::field_amplitude);

/// A·cos(2π δ t + φ)·exp(−(t/T₂*)ⁿ) + offset.
std::vector<double> ramsey_signal(double detuning_mhz, const std::vector<double>& times_ns,
                                  const DecayEnvelope& envelope, double phase = 0.0);

/// Optional sin²(2π f t + φ) factor multiplying the echo envelope.
struct SinSquaredModulation {
    double frequency_mhz = 0.0;
    double phase = 0.0;
};

/// A·exp(−(t/T₂)ⁿ)·[sin²(2π f t + φ)] + offset against total free evolution time.
std::vector<double> cpmg_signal(int n_pi, const std::vector<double>& times_ns,
                                const DecayEnvelope& envelope,
                                std::optional<SinSquaredModulation> modulation = std::nullopt);

/// cpmg_signal with one π pulse.
std::vector<double> hahn_signal(const std::vector<double>& times_ns, const DecayEnvelope& envelope,
                                std::optional<SinSquaredModulation> modulation = std::nullopt);

enum class SequenceKind { rabi, ramsey, hahn, cpmg };

SequenceKind parse_sequence_kind(const std::string& name);

struct SequenceSpec {
    SequenceKind kind = SequenceKind::ramsey;
    int n_pi = 1;                 ///< π pulses for cpmg; hahn is treated as 1
    double detuning_mhz = 0.0;
    double rabi_frequency_mhz = 1.0;  ///< at unit amplitude, rabi only
    double pulse_length_ns = 400.0;   ///< rabi only
    RabiAxis rabi_axis = RabiAxis::field_amplitude;
    std::vector<double> sweep;    ///< drive amplitude (rabi) or total free time in ns

    void validate() const;
    /// Number of refocusing pulses actually applied.
    [[nodiscard]] int refocusing_pulses() const;
};

/// Markovian channels applied during free evolution. Infinite = off.
struct RelaxationChannels {
    double t2_white_ns = std::numeric_limits<double>::infinity();
    double t1_ns = std::numeric_limits<double>::infinity();
};

/// Readout of one sequence for one static detuning offset. Rabi reports the
/// |+1⟩ population; the free-evolution sequences report the probability of
/// returning to |0⟩ (π/2 pulses on +x then −x, π pulses on +y).
double run_sequence(const SequenceSpec& seq, double sweep_value, double extra_detuning_mhz,
                    const RelaxationChannels& channels = {},
                    std::vector<BlochStated>* trajectory = nullptr);

struct MonteCarloOptions {
    double noise_sigma_mhz = 0.0;  ///< width of the quasi-static detuning distribution
    std::size_t samples = 1;
    RelaxationChannels channels;
    std::uint64_t seed = 0;
};

/// Average of run_sequence over quasi-static detunings drawn from
/// N(0, noise_sigma²); sample i uses RNG substream i.
std::vector<double> simulate_sequence_mc(const SequenceSpec& seq, const MonteCarloOptions& options);

/// Characteristic time of the Gaussian Ramsey envelope under quasi-static
/// noise of width sigma (MHz): T₂* = √2 / (2π σ), in ns.
double quasi_static_t2star_ns(double noise_sigma_mhz);

}  // namespace cavspin
