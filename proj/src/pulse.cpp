#include "cavspin/pulse.hpp"

#include <string>

#include "cavspin/random.hpp"

namespace cavspin {

namespace {

constexpr double kPi = std::numbers::pi;

void evolve_free(BlochStated& v, double detuning_mhz, double t_ns, const RelaxationChannels& ch) {
    v = precess(v, detuning_mhz, t_ns);
    double transverse = 1.0;
    double longitudinal = 1.0;
    if (std::isfinite(ch.t2_white_ns)) transverse *= std::exp(-t_ns / ch.t2_white_ns);
    if (std::isfinite(ch.t1_ns)) {
        transverse *= std::exp(-t_ns / (2.0 * ch.t1_ns));
        longitudinal = std::exp(-t_ns / ch.t1_ns);
    }
    v.x() *= transverse;
    v.y() *= transverse;
    v.z() *= longitudinal;
}

}  // namespace

std::vector<double> rabi_signal(double rabi_frequency_at_unit_mhz, const std::vector<double>& sweep,
                                double pulse_length_ns, const DecayEnvelope& envelope,
                                RabiAxis axis) {
    if (!(pulse_length_ns > 0.0)) throw InvalidParameter("pulse length must be > 0");
    envelope.validate();
    std::vector<double> out;
    out.reserve(sweep.size());
    for (double a : sweep) {
        if (axis == RabiAxis::power && a < 0.0)
            throw InvalidParameter("power sweep values must be >= 0");
        const double drive = axis == RabiAxis::power ? std::sqrt(a) : a;
        const double cycles = rabi_frequency_at_unit_mhz * drive * pulse_length_ns * kCyclesPerMHzNs;
        out.push_back(envelope.offset + envelope.amplitude * 0.5 *
                                            (1.0 - envelope.decay(a) * std::cos(2.0 * kPi * cycles)));
    }
    return out;
}

std::vector<double> ramsey_signal(double detuning_mhz, const std::vector<double>& times_ns,
                                  const DecayEnvelope& envelope, double phase) {
    envelope.validate();
    std::vector<double> out;
    out.reserve(times_ns.size());
    for (double t : times_ns)
        out.push_back(envelope.amplitude *
                          std::cos(2.0 * kPi * detuning_mhz * t * kCyclesPerMHzNs + phase) *
                          envelope.decay(t) +
                      envelope.offset);
    return out;
}

std::vector<double> cpmg_signal(int n_pi, const std::vector<double>& times_ns,
                                const DecayEnvelope& envelope,
                                std::optional<SinSquaredModulation> modulation) {
    if (n_pi < 1) throw InvalidParameter("CPMG needs at least one pi pulse");
    envelope.validate();
    std::vector<double> out;
    out.reserve(times_ns.size());
    for (double t : times_ns) {
        double shape = envelope.decay(t);
        if (modulation) {
            const double s = std::sin(2.0 * kPi * modulation->frequency_mhz * t * kCyclesPerMHzNs +
                                      modulation->phase);
            shape *= s * s;
        }
        out.push_back(envelope.amplitude * shape + envelope.offset);
    }
    return out;
}

std::vector<double> hahn_signal(const std::vector<double>& times_ns, const DecayEnvelope& envelope,
                                std::optional<SinSquaredModulation> modulation) {
    return cpmg_signal(1, times_ns, envelope, modulation);
}

SequenceKind parse_sequence_kind(const std::string& name) {
    if (name == "rabi") return SequenceKind::rabi;
    if (name == "ramsey") return SequenceKind::ramsey;
    if (name == "hahn") return SequenceKind::hahn;
    if (name == "cpmg") return SequenceKind::cpmg;
    throw InvalidParameter("unknown sequence '" + name + "'");
}

void SequenceSpec::validate() const {
    if (kind == SequenceKind::cpmg && n_pi < 1)
        throw InvalidParameter("CPMG needs at least one pi pulse");
    if (kind == SequenceKind::rabi && !(pulse_length_ns > 0.0))
        throw InvalidParameter("pulse length must be > 0");
    if (kind != SequenceKind::rabi)
        for (double t : sweep)
            if (t < 0.0) throw InvalidParameter("free evolution time must be >= 0");
}

int SequenceSpec::refocusing_pulses() const {
    switch (kind) {
        case SequenceKind::hahn: return 1;
        case SequenceKind::cpmg: return n_pi;
        default: return 0;
    }
}

double run_sequence(const SequenceSpec& seq, double sweep_value, double extra_detuning_mhz,
                    const RelaxationChannels& channels, std::vector<BlochStated>* trajectory) {
    BlochStated v = BlochStated::UnitZ();
    auto record = [&] {
        if (trajectory) trajectory->push_back(v);
    };
    record();
    const double detuning = seq.detuning_mhz + extra_detuning_mhz;

    switch (seq.kind) {
        case SequenceKind::rabi: {
            const double drive = seq.rabi_axis == RabiAxis::power ? std::sqrt(sweep_value) : sweep_value;
            const double rabi = seq.rabi_frequency_mhz * drive;
            const double effective = std::hypot(rabi, detuning);
            if (effective > 0.0) {
                const BlochStated axis = BlochStated(rabi, 0.0, detuning) / effective;
                v = rotate(v, axis, 2.0 * kPi * effective * seq.pulse_length_ns * kCyclesPerMHzNs);
            }
            record();
            return 0.5 * (1.0 - v.z());
        }
        case SequenceKind::ramsey: {
            v = apply_pulse(v, kPi / 2, 0.0);
            record();
            evolve_free(v, detuning, sweep_value, channels);
            record();
            v = apply_pulse(v, kPi / 2, kPi);
            record();
            return 0.5 * (1.0 + v.z());
        }
        case SequenceKind::hahn:
        case SequenceKind::cpmg: {
            const int n = seq.refocusing_pulses();
            const double spacing = sweep_value / n;
            v = apply_pulse(v, kPi / 2, 0.0);
            record();
            for (int k = 0; k < n; ++k) {
                evolve_free(v, detuning, spacing / 2, channels);
                record();
                v = apply_pulse(v, kPi, kPi / 2);
                record();
                evolve_free(v, detuning, spacing / 2, channels);
                record();
            }
            v = apply_pulse(v, kPi / 2, kPi);
            record();
            return 0.5 * (1.0 + v.z());
        }
    }
    return 0.0;
}

std::vector<double> simulate_sequence_mc(const SequenceSpec& seq, const MonteCarloOptions& options) {
    seq.validate();
    if (options.samples < 1) throw InvalidParameter("need at least one Monte Carlo sample");
    if (!(options.noise_sigma_mhz >= 0.0)) throw InvalidParameter("noise sigma must be >= 0");

    std::vector<double> sum(seq.sweep.size(), 0.0);
    const RandomStream root(options.seed);
    for (std::size_t i = 0; i < options.samples; ++i) {
        double offset = 0.0;
        if (options.noise_sigma_mhz > 0.0) {
            RandomStream rng = root.substream(i);
            offset = options.noise_sigma_mhz * rng.normal();
        }
        for (std::size_t k = 0; k < seq.sweep.size(); ++k)
            sum[k] += run_sequence(seq, seq.sweep[k], offset, options.channels);
    }
    for (double& s : sum) s /= static_cast<double>(options.samples);
    return sum;
}

double quasi_static_t2star_ns(double noise_sigma_mhz) {
    if (!(noise_sigma_mhz > 0.0)) throw InvalidParameter("noise sigma must be > 0");
    return std::sqrt(2.0) / (2.0 * kPi * noise_sigma_mhz * kCyclesPerMHzNs);
}

}  // namespace cavspin
