#include "cavspin/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include "cavspin/errors.hpp"
#include "cavspin/fit/fit.hpp"
#include "cavspin/io/config.hpp"
#include "cavspin/io/csv.hpp"
#include "cavspin/io/report.hpp"
#include "cavspin/io/units.hpp"
#include "cavspin/kinetics.hpp"
#include "cavspin/photon_stream.hpp"
#include "cavspin/pulse.hpp"
#include "cavspin/purcell.hpp"
#include "cavspin/spin.hpp"

namespace cavspin::cli {

namespace {

using Parser = double (*)(std::string_view);
constexpr double kInf = std::numeric_limits<double>::infinity();

// Value of a string option through `parse`, or `fallback` when not given.
double value_or(const CLI::Option* opt, const std::string& text, Parser parse, double fallback) {
    return opt->count() > 0 ? parse(text) : fallback;
}

std::optional<double> optional_value(const CLI::Option* opt, const std::string& text, Parser parse) {
    if (opt->count() == 0) return std::nullopt;
    return parse(text);
}

// "min,max,step" with each element parsed by `parse`.
std::vector<double> parse_range(const std::string& text, Parser parse) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream ss(text);
    while (std::getline(ss, part, ',')) parts.push_back(part);
    if (parts.size() != 3) throw InvalidParameter("expected min,max,step but got '" + text + "'");
    const double lo = parse(parts[0]), hi = parse(parts[1]), step = parse(parts[2]);
    if (!(step > 0.0) || !(hi >= lo)) throw InvalidParameter("range needs max >= min and step > 0");
    return linear_range(lo, hi, step);
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

struct FitArgs {
    std::string model;
    std::string input;
    std::string x_col, y_col, sigma_col;
    std::vector<std::string> init;
    int peaks = 1;
    bool constrained = false;
    bool numeric_jacobian = false;
    std::string interval;
    int max_iter = 0;
    CLI::Option* interval_opt = nullptr;
    CLI::Option* max_iter_opt = nullptr;
    CLI::Option* sigma_opt = nullptr;
};

void add_fit_options(CLI::App* cmd, FitArgs& a) {
    cmd->add_option("--input", a.input, "CSV file")->required();
    cmd->add_option("--x-col", a.x_col, "x column name (default: first)");
    cmd->add_option("--y-col", a.y_col, "y column name (default: second)");
    a.sigma_opt = cmd->add_option("--sigma-col", a.sigma_col, "per-point standard deviation column");
    cmd->add_option("--init", a.init, "starting value name=value (repeatable)");
    cmd->add_flag("--constrained", a.constrained, "g2_three_level with amp_anti = 1 + amp_bunch");
    cmd->add_flag("--numeric-jacobian", a.numeric_jacobian, "finite-difference Jacobian");
    a.interval_opt = cmd->add_option("--interval", a.interval, "ci95 or one_sigma")
                         ->check(CLI::IsMember({"ci95", "one_sigma"}));
    a.max_iter_opt = cmd->add_option("--max-iter", a.max_iter, "iteration limit")->check(CLI::PositiveNumber);
}

int run_fit(const FitArgs& a, const io::RunConfig& cfg, std::ostream& out, std::ostream& err) {
    fit::ModelOptions mopts;
    mopts.peaks = a.peaks;
    mopts.constrained_g2 = a.constrained;
    mopts.analytic_jacobian = !a.numeric_jacobian;
    const auto model = fit::make_model(a.model, mopts);

    std::optional<std::string> sigma;
    if (a.sigma_opt->count() > 0) sigma = a.sigma_col;
    const auto ingested = io::ingest_csv(a.input, a.x_col, a.y_col, sigma, model->size() + 1);
    for (const auto& w : ingested.warnings) err << "warning: " << w << '\n';

    std::optional<fit::ParamMap> initial;
    for (const auto& kv : a.init) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidParameter("--init expects name=value, got '" + kv + "'");
        const std::string name = kv.substr(0, eq);
        (void)model->index(name);
        if (!initial) initial.emplace();
        (*initial)[name] = io::parse_number(kv.substr(eq + 1));
    }

    fit::FitOptions fopts;
    fopts.max_iterations = a.max_iter_opt->count() > 0 ? a.max_iter : cfg.fit_max_iterations;
    const std::string interval = a.interval_opt->count() > 0 ? a.interval : cfg.fit_interval;
    fopts.interval = interval == "one_sigma" ? fit::IntervalLevel::one_sigma : fit::IntervalLevel::ci95;

    const auto result = fit::fit(*model, ingested.series, initial, fopts);
    fit::write_fit_result(out, result);
    if (!result.converged) {
        err << "error: fit did not converge in " << result.iterations << " iterations\n";
        return kExitFit;
    }
    return kExitOk;
}

struct RateArgs {
    std::string pump = "0.02", radiative = io::format_number(1.0 / 15.7), shelve = "0.004",
                deshelve = io::format_number(1.0 / 75.0);
};

void add_rate_options(CLI::App* cmd, RateArgs& r) {
    cmd->add_option("--pump", r.pump, "ground -> excited rate, 1/ns")->capture_default_str();
    cmd->add_option("--radiative", r.radiative, "excited -> ground rate, 1/ns")->capture_default_str();
    cmd->add_option("--shelve", r.shelve, "excited -> dark rate, 1/ns")->capture_default_str();
    cmd->add_option("--deshelve", r.deshelve, "dark -> ground rate, 1/ns")->capture_default_str();
}

ThreeLevelRatesd to_rates(const RateArgs& a) {
    ThreeLevelRatesd r;
    r.pump = io::parse_number(a.pump);
    r.radiative = io::parse_number(a.radiative);
    r.shelve = io::parse_number(a.shelve);
    r.deshelve = io::parse_number(a.deshelve);
    r.validate();
    return r;
}

void report_rate_mapping(io::ReportWriter& rep, const ThreeLevelRatesd& r, std::ostream& err) {
    try {
        const auto p = g2_fit_params_from_rates(r);
        rep.add("amp_anti", p.amp_anti).add("amp_bunch", p.amp_bunch).add("t1", p.t1).add("t2", p.t2);
    } catch (const DomainError& e) {
        err << "warning: no bi-exponential form: " << e.what() << '\n';
    }
}

struct PulseArgs {
    std::string sweep;
    std::string out;
    bool mc = false;
    std::string noise_sigma = "0";
    std::size_t samples = 1000;
    unsigned long long seed = 0;
    CLI::Option* seed_opt = nullptr;
    std::string t2_white, t1;
    CLI::Option* t2_white_opt = nullptr;
    CLI::Option* t1_opt = nullptr;
    double amplitude = 1.0, offset = 0.0, stretch = 1.0;
    std::string decay;
    CLI::Option* decay_opt = nullptr;
    // Sequence specific.
    std::string rabi_frequency = "1";
    std::string pulse_length = "400";
    std::string axis = "amplitude";
    std::string detuning = "0";
    double phase = 0.0;
    int n_pi = 2;
    std::string mod_frequency;
    CLI::Option* mod_opt = nullptr;
    double mod_phase = 0.0;
};

void add_pulse_common(CLI::App* cmd, PulseArgs& a, const char* decay_flag, const char* sweep_help) {
    cmd->add_option("--sweep", a.sweep, sweep_help)->required();
    cmd->add_option("--out", a.out, "write the signal CSV here");
    cmd->add_flag("--mc", a.mc, "Bloch-vector Monte Carlo over quasi-static detuning noise");
    cmd->add_option("--noise-sigma", a.noise_sigma, "quasi-static detuning width (MHz unless suffixed)");
    cmd->add_option("--samples", a.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
    a.seed_opt = cmd->add_option("--seed", a.seed, "RNG seed");
    a.t2_white_opt = cmd->add_option("--t2-white", a.t2_white, "Markovian dephasing time (Monte Carlo)");
    a.t1_opt = cmd->add_option("--t1", a.t1, "longitudinal relaxation time (Monte Carlo)");
    cmd->add_option("--amplitude", a.amplitude, "signal amplitude (analytic)");
    cmd->add_option("--offset", a.offset, "signal offset (analytic)");
    cmd->add_option("--stretch", a.stretch, "stretch exponent n (analytic)");
    a.decay_opt = cmd->add_option(decay_flag, a.decay, "decay constant of the envelope (analytic)");
}

int run_pulse(SequenceKind kind, const PulseArgs& a, const io::RunConfig& cfg, std::ostream& out,
              std::ostream& err) {
    const bool rabi = kind == SequenceKind::rabi;
    const Parser sweep_parser = rabi ? io::parse_number : io::parse_time_ns;
    const auto sweep = parse_range(a.sweep, sweep_parser);

    SequenceSpec seq;
    seq.kind = kind;
    seq.n_pi = kind == SequenceKind::cpmg ? a.n_pi : 1;
    seq.detuning_mhz = io::parse_frequency_mhz(a.detuning);
    seq.rabi_frequency_mhz = io::parse_frequency_mhz(a.rabi_frequency);
    seq.pulse_length_ns = io::parse_time_ns(a.pulse_length);
    seq.rabi_axis = a.axis == "power" ? RabiAxis::power : RabiAxis::field_amplitude;
    seq.sweep = sweep;
    seq.validate();

    io::ReportWriter rep(out);
    std::vector<double> signal;
    if (a.mc) {
        MonteCarloOptions mc;
        mc.noise_sigma_mhz = io::parse_frequency_mhz(a.noise_sigma);
        mc.samples = a.samples;
        mc.seed = a.seed_opt->count() > 0 ? a.seed : cfg.mc_seed;
        mc.channels.t2_white_ns = value_or(a.t2_white_opt, a.t2_white, io::parse_time_ns, kInf);
        mc.channels.t1_ns = value_or(a.t1_opt, a.t1, io::parse_time_ns, kInf);
        signal = simulate_sequence_mc(seq, mc);
        rep.add("mode", "montecarlo").add("samples", mc.samples).add("seed", static_cast<long long>(mc.seed));
        if (mc.noise_sigma_mhz > 0.0) rep.add("t2star_quasi_static_ns", quasi_static_t2star_ns(mc.noise_sigma_mhz));
    } else {
        if (a.seed_opt->count() > 0) err << "warning: --seed has no effect without --mc\n";
        DecayEnvelope env;
        env.amplitude = a.amplitude;
        env.offset = a.offset;
        env.stretch = a.stretch;
        env.time = value_or(a.decay_opt, a.decay, rabi ? io::parse_number : io::parse_time_ns, kInf);
        env.validate();
        switch (kind) {
            case SequenceKind::rabi:
                signal = rabi_signal(seq.rabi_frequency_mhz, sweep, seq.pulse_length_ns, env, seq.rabi_axis);
                break;
            case SequenceKind::ramsey:
                signal = ramsey_signal(seq.detuning_mhz, sweep, env, a.phase);
                break;
            case SequenceKind::hahn:
            case SequenceKind::cpmg: {
                std::optional<SinSquaredModulation> mod;
                if (a.mod_opt && a.mod_opt->count() > 0)
                    mod = SinSquaredModulation{io::parse_frequency_mhz(a.mod_frequency), a.mod_phase};
                signal = cpmg_signal(seq.refocusing_pulses(), sweep, env, mod);
                break;
            }
        }
        rep.add("mode", "analytic");
    }

    // Long sequences are reported against µs.
    std::string x_name = "time_ns";
    std::vector<double> x = sweep;
    if (rabi) {
        x_name = seq.rabi_axis == RabiAxis::power ? "power" : "amplitude";
    } else if (kind == SequenceKind::hahn || kind == SequenceKind::cpmg) {
        x_name = "time_us";
        for (double& v : x) v *= 1e-3;
    }
    rep.add("sequence", kind == SequenceKind::rabi     ? "rabi"
                        : kind == SequenceKind::ramsey ? "ramsey"
                        : kind == SequenceKind::hahn   ? "hahn"
                                                       : "cpmg");
    if (!rabi) rep.add("refocusing_pulses", seq.refocusing_pulses());
    rep.add("points", x.size()).add("x_column", x_name);
    const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
    rep.add("signal_min", *lo).add("signal_max", *hi);
    if (!a.out.empty()) {
        io::write_csv(a.out, {x_name, "signal"}, {x, signal});
        rep.add("out", a.out);
    }
    return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cavity-coupled spin-defect emitter modeling and fitting", "cavspin"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    auto* config_opt = app.add_option("--config", config_path, "config file (default: $CAVSPIN_CONFIG)");

    std::function<int(const io::RunConfig&)> action;

    // fit
    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "fit a model to CSV data");
    fit_cmd->add_option("--model", fit_args.model, "model id")->required()->check(CLI::IsMember(fit::model_ids()));
    fit_cmd->add_option("--peaks", fit_args.peaks, "peak count for lorentzian/gaussian")->check(CLI::PositiveNumber);
    add_fit_options(fit_cmd, fit_args);
    fit_cmd->callback([&] { action = [&](const io::RunConfig& cfg) { return run_fit(fit_args, cfg, out, err); }; });

    // purcell
    auto* purcell = app.add_subcommand("purcell", "Purcell factor estimates");
    purcell->require_subcommand(1);
    std::string tau_on, tau_off, tau_dark, alpha_text, beta_text, i_on, i_off, external, threshold_text;

    auto* lifetimes = purcell->add_subcommand("lifetimes", "F from on/off resonance lifetimes");
    lifetimes->add_option("--tau-on", tau_on, "on-resonance lifetime")->required();
    lifetimes->add_option("--tau-off", tau_off, "off-resonance lifetime")->required();
    auto* tau_dark_opt = lifetimes->add_option("--tau-dark", tau_dark, "nonradiative lifetime (default: none)");
    auto* alpha_lifetimes = lifetimes->add_option("--alpha", alpha_text, "intrinsic Debye-Waller factor");
    lifetimes->callback([&] {
        action = [&](const io::RunConfig& cfg) {
            const double alpha = value_or(alpha_lifetimes, alpha_text, io::parse_number, cfg.purcell_alpha);
            const double f = purcell_from_lifetimes(io::parse_time_ns(tau_on), io::parse_time_ns(tau_off),
                                                    value_or(tau_dark_opt, tau_dark, io::parse_time_ns, kInf), alpha);
            io::ReportWriter(out).add("F", f);
            return kExitOk;
        };
    });

    auto* intensity = purcell->add_subcommand("intensity", "F from on/off resonance ZPL intensity");
    intensity->add_option("--on", i_on, "on-resonance intensity")->required();
    intensity->add_option("--off", i_off, "off-resonance intensity")->required();
    intensity->callback([&] {
        action = [&](const io::RunConfig&) {
            io::ReportWriter(out).add("F", purcell_from_intensity(io::parse_number(i_on), io::parse_number(i_off)));
            return kExitOk;
        };
    });

    CavityParamsd cavity;
    std::string volume_unit = "reduced", wavelength = "1um";
    auto* cavity_cmd = purcell->add_subcommand("cavity", "F from quality factor and mode volume");
    cavity_cmd->add_option("--q", cavity.quality_factor, "quality factor")->required();
    cavity_cmd->add_option("--volume", cavity.mode_volume, "mode volume")->required();
    cavity_cmd->add_option("--volume-unit", volume_unit, "reduced ((lambda/n)^3) or um3")
        ->check(CLI::IsMember({"reduced", "um3"}));
    cavity_cmd->add_option("--wavelength", wavelength, "free-space wavelength (um unless suffixed)");
    cavity_cmd->add_option("--index", cavity.index, "refractive index");
    cavity_cmd->add_option("--overlap", cavity.spatial_overlap, "spatial overlap factor");
    cavity_cmd->add_option("--spectral-match", cavity.spectral_match, "spectral match factor");
    cavity_cmd->callback([&] {
        action = [&](const io::RunConfig&) {
            cavity.volume_unit = volume_unit == "um3" ? ModeVolumeUnit::cubic_microns : ModeVolumeUnit::reduced_wavelength3;
            cavity.wavelength_um = io::parse_length_um(wavelength);
            io::ReportWriter(out).add("F", purcell_from_cavity(cavity));
            return kExitOk;
        };
    });

    auto* dw = purcell->add_subcommand("dw", "F from off/on resonance Debye-Waller factors");
    auto* alpha_dw = dw->add_option("--alpha", alpha_text, "intrinsic Debye-Waller factor");
    dw->add_option("--beta", beta_text, "on-resonance Debye-Waller factor")->required();
    dw->callback([&] {
        action = [&](const io::RunConfig& cfg) {
            const double alpha = value_or(alpha_dw, alpha_text, io::parse_number, cfg.purcell_alpha);
            io::ReportWriter(out).add("F", purcell_from_dw(alpha, io::parse_number(beta_text)));
            return kExitOk;
        };
    });

    auto* consistency = purcell->add_subcommand("consistency", "cross-check the available F routes");
    auto* alpha_c = consistency->add_option("--alpha", alpha_text, "intrinsic Debye-Waller factor");
    auto* beta_c = consistency->add_option("--beta", beta_text, "on-resonance Debye-Waller factor");
    auto* i_on_c = consistency->add_option("--intensity-on", i_on, "on-resonance intensity");
    auto* i_off_c = consistency->add_option("--intensity-off", i_off, "off-resonance intensity");
    auto* tau_on_c = consistency->add_option("--tau-on", tau_on, "on-resonance lifetime");
    auto* tau_off_c = consistency->add_option("--tau-off", tau_off, "off-resonance lifetime");
    auto* tau_dark_c = consistency->add_option("--tau-dark", tau_dark, "nonradiative lifetime");
    auto* external_c = consistency->add_option("--external", external, "externally supplied F");
    auto* threshold_c = consistency->add_option("--threshold", threshold_text, "relative spread threshold");
    consistency->callback([&] {
        action = [&](const io::RunConfig& cfg) {
            EmissionBudget b;
            b.alpha = value_or(alpha_c, alpha_text, io::parse_number, cfg.purcell_alpha);
            b.beta = optional_value(beta_c, beta_text, io::parse_number);
            b.intensity_on = optional_value(i_on_c, i_on, io::parse_number);
            b.intensity_off = optional_value(i_off_c, i_off, io::parse_number);
            b.tau_on = optional_value(tau_on_c, tau_on, io::parse_time_ns);
            b.tau_off = optional_value(tau_off_c, tau_off, io::parse_time_ns);
            b.tau_dark = optional_value(tau_dark_c, tau_dark, io::parse_time_ns);
            b.external_purcell = optional_value(external_c, external, io::parse_number);
            const double threshold =
                value_or(threshold_c, threshold_text, io::parse_number, cfg.purcell_consistency_threshold);
            write_report(out, consistency_report(b, threshold));
            return kExitOk;
        };
    });

    // dw-invert, entanglement-gain
    std::string f_text;
    auto* dw_invert = app.add_subcommand("dw-invert", "on-resonance Debye-Waller factor for a given F");
    dw_invert->add_option("--f", f_text, "Purcell factor")->required();
    auto* alpha_inv = dw_invert->add_option("--alpha", alpha_text, "intrinsic Debye-Waller factor");
    dw_invert->callback([&] {
        action = [&](const io::RunConfig& cfg) {
            const double alpha = value_or(alpha_inv, alpha_text, io::parse_number, cfg.purcell_alpha);
            io::ReportWriter(out).add("beta", dw_on_resonance(io::parse_number(f_text), alpha));
            return kExitOk;
        };
    });

    auto* gain = app.add_subcommand("entanglement-gain", "two-photon interference rate gain (beta/alpha)^2");
    gain->add_option("--beta", beta_text, "on-resonance Debye-Waller factor")->required();
    auto* alpha_gain = gain->add_option("--alpha", alpha_text, "intrinsic Debye-Waller factor");
    gain->callback([&] {
        action = [&](const io::RunConfig& cfg) {
            const double alpha = value_or(alpha_gain, alpha_text, io::parse_number, cfg.purcell_alpha);
            io::ReportWriter(out).add("gain", entanglement_rate_gain(io::parse_number(beta_text), alpha));
            return kExitOk;
        };
    });

    // odmr
    std::string preset = "nanobeam-hh", d_text, e_text = "0", gamma_text, b_sweep, linewidth = "5", grid, odmr_out;
    double bx = 0.0, by = 0.0, bz = 0.0, contrast = 0.1;
    int contrast_sign = 1;
    auto* odmr = app.add_subcommand("odmr", "spin-1 transition frequencies and ODMR spectra");
    odmr->add_option("--preset", preset, "nanobeam-hh or bulk-hh")->check(CLI::IsMember({"nanobeam-hh", "bulk-hh"}));
    auto* d_opt = odmr->add_option("--d", d_text, "override D (MHz unless suffixed)");
    odmr->add_option("--e", e_text, "transverse splitting E (MHz unless suffixed)");
    auto* gamma_opt = odmr->add_option("--gamma", gamma_text, "gyromagnetic ratio, MHz/G");
    odmr->add_option("--bz", bz, "axial field, G");
    odmr->add_option("--bx", bx, "transverse field x, G");
    odmr->add_option("--by", by, "transverse field y, G");
    odmr->add_option("--b-sweep", b_sweep, "sweep Bz as min,max,step in G");
    odmr->add_option("--linewidth", linewidth, "Lorentzian FWHM (MHz unless suffixed)");
    odmr->add_option("--grid", grid, "frequency grid min,max,step (MHz unless suffixed)");
    odmr->add_option("--contrast", contrast, "peak contrast");
    odmr->add_option("--contrast-sign", contrast_sign, "+1 or -1")->check(CLI::IsMember({1, -1}));
    odmr->add_option("--out", odmr_out, "write the spectrum (or sweep) CSV here");
    odmr->callback([&] {
        action = [&](const io::RunConfig& cfg) {
            SpinSystemd s = spin_preset(preset);
            s.D = preset == "bulk-hh" ? cfg.spin_d_bulk_hh : cfg.spin_d_nanobeam_hh;
            s.D = value_or(d_opt, d_text, io::parse_frequency_mhz, s.D);
            s.E = io::parse_frequency_mhz(e_text);
            s.gamma = value_or(gamma_opt, gamma_text, io::parse_number, cfg.spin_gamma);
            s.field = Eigen::Vector3d(bx, by, bz);
            for (const auto& w : s.warnings()) err << "warning: " << w << '\n';
            io::ReportWriter rep(out);
            rep.add("D", s.D).add("E", s.E).add("gamma", s.gamma);

            if (!b_sweep.empty()) {
                const auto fields = parse_range(b_sweep, io::parse_number);
                std::vector<double> f_minus, f_plus;
                for (double b : fields) {
                    s.field.z() = b;
                    const auto t = transition_frequencies(s);
                    if (t.ambiguous) err << "warning: Bz=" << io::format_number(b) << ": " << t.warning << '\n';
                    f_minus.push_back(t.to_minus);
                    f_plus.push_back(t.to_plus);
                }
                rep.add("points", fields.size());
                if (fields.size() >= 2) {
                    rep.add("slope_minus", slope(fields, f_minus)).add("slope_plus", slope(fields, f_plus));
                }
                if (!odmr_out.empty()) {
                    io::write_csv(odmr_out, {"bz_G", "f_minus_MHz", "f_plus_MHz"}, {fields, f_minus, f_plus});
                    rep.add("out", odmr_out);
                }
                return kExitOk;
            }

            const auto t = transition_frequencies(s);
            if (t.ambiguous) err << "warning: " << t.warning << '\n';
            rep.add("bz", bz).add("f_minus", t.to_minus).add("f_plus", t.to_plus);
            const double lw = io::parse_frequency_mhz(linewidth);
            std::vector<double> freqs;
            if (!grid.empty()) {
                freqs = parse_range(grid, io::parse_frequency_mhz);
            } else {
                const double lo = std::min(std::abs(t.to_minus), std::abs(t.to_plus)) - 10.0 * lw;
                const double hi = std::max(std::abs(t.to_minus), std::abs(t.to_plus)) + 10.0 * lw;
                freqs = linear_range(lo, hi, lw / 20.0);
            }
            const auto spec = odmr_spectrum(s, freqs, lw, contrast, contrast_sign);
            std::vector<double> distinct;
            for (double c : spec.peak_centers)
                if (distinct.empty() || c - distinct.back() > 1e-9 * std::max(1.0, std::abs(c))) distinct.push_back(c);
            rep.add("peaks", distinct.size());
            for (std::size_t i = 0; i < distinct.size(); ++i) rep.add("peak." + std::to_string(i + 1), distinct[i]);
            if (!odmr_out.empty()) {
                io::write_csv(odmr_out, {"frequency_MHz", "contrast"}, {spec.frequencies, spec.contrast});
                rep.add("out", odmr_out);
            }
            return kExitOk;
        };
    });

    // g2
    auto* g2 = app.add_subcommand("g2", "photon correlation: analytic, simulated, fitted");
    g2->require_subcommand(1);
    RateArgs rate_args;
    std::string tau_max = "300", tau_step = "1", g2_out;

    auto* g2_analytic_cmd = g2->add_subcommand("analytic", "closed-form g2 of the three-level model");
    add_rate_options(g2_analytic_cmd, rate_args);
    g2_analytic_cmd->add_option("--tau-max", tau_max, "largest delay (ns unless suffixed)");
    g2_analytic_cmd->add_option("--step", tau_step, "delay step (ns unless suffixed)");
    g2_analytic_cmd->add_option("--out", g2_out, "write tau_ns,g2 CSV here");
    g2_analytic_cmd->callback([&] {
        action = [&](const io::RunConfig&) {
            const auto r = to_rates(rate_args);
            io::ReportWriter rep(out);
            rep.add("excited_ss", steady_state(r).excited).add("g2_zero", g2_analytic(r, 0.0));
            report_rate_mapping(rep, r, err);
            const auto taus = linear_range(0.0, io::parse_time_ns(tau_max), io::parse_time_ns(tau_step));
            if (!g2_out.empty()) {
                std::vector<double> values;
                for (double t : taus) values.push_back(g2_analytic(r, t));
                io::write_csv(g2_out, {"tau_ns", "g2"}, {taus, values});
                rep.add("out", g2_out);
            }
            return kExitOk;
        };
    });

    std::string duration = "10ms", bin_width = "1", timestamps_in, timestamps_out;
    double efficiency = 1.0;
    std::size_t trajectories = 1;
    unsigned long long g2_seed = 0;
    int threads = 0;
    auto* mc_cmd = g2->add_subcommand("montecarlo", "Gillespie trajectories and their correlation histogram");
    add_rate_options(mc_cmd, rate_args);
    mc_cmd->add_option("--duration", duration, "trajectory length (ns unless suffixed)");
    mc_cmd->add_option("--efficiency", efficiency, "detection efficiency in (0, 1]");
    mc_cmd->add_option("--trajectories", trajectories, "independent trajectories")->check(CLI::PositiveNumber);
    auto* seed_opt = mc_cmd->add_option("--seed", g2_seed, "RNG seed");
    auto* threads_opt = mc_cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    mc_cmd->add_option("--bin-width", bin_width, "histogram bin width (ns unless suffixed)");
    mc_cmd->add_option("--tau-max", tau_max, "largest delay (ns unless suffixed)");
    mc_cmd->add_option("--timestamps-in", timestamps_in, "correlate this timestamp file instead of simulating");
    mc_cmd->add_option("--timestamps-out", timestamps_out, "write the first trajectory's timestamps here");
    mc_cmd->add_option("--out", g2_out, "write tau_ns,g2,stderr CSV here");
    mc_cmd->callback([&] {
        action = [&](const io::RunConfig& cfg) {
            const double w = io::parse_time_ns(bin_width);
            const double max_tau = io::parse_time_ns(tau_max);
            std::vector<PhotonRecord> records;
            std::optional<ThreeLevelRatesd> rates;
            io::ReportWriter rep(out);
            if (!timestamps_in.empty()) {
                records.push_back(read_timestamps(timestamps_in));
            } else {
                rates = to_rates(rate_args);
                const std::uint64_t seed = seed_opt->count() > 0 ? g2_seed : cfg.mc_seed;
                const unsigned n_threads = static_cast<unsigned>(threads_opt->count() > 0 ? threads : cfg.mc_threads);
                records = simulate_trajectories(*rates, io::parse_time_ns(duration), efficiency, seed, trajectories,
                                                n_threads);
                rep.add("seed", static_cast<long long>(seed)).add("threads", static_cast<long long>(n_threads));
                rep.add("trajectories", records.size());
                if (!timestamps_out.empty()) write_timestamps(timestamps_out, records.front());
            }
            std::size_t photons = 0;
            double total_time = 0.0;
            for (const auto& r : records) {
                photons += r.timestamps.size();
                total_time += r.duration;
            }
            if (photons < 2) throw NoSignal("fewer than two photons; nothing to correlate");
            const auto hist = correlate(records, w, max_tau);
            const auto g = hist.normalized();
            const auto se = hist.standard_errors();
            rep.add("photons", photons).add("mean_rate_per_ns", static_cast<double>(photons) / total_time);
            rep.add("bins", hist.size());
            if (rates) {
                std::size_t agree = 0;
                for (std::size_t k = 0; k < hist.size(); ++k) {
                    const double expected = g2_analytic(*rates, hist.bin_center(k));
                    if (std::abs(g[k] - expected) <= 5.0 * std::max(se[k], 1e-300)) ++agree;
                }
                rep.add("fraction_within_5se", static_cast<double>(agree) / static_cast<double>(hist.size()));
            }
            if (!g2_out.empty()) {
                std::vector<double> centers;
                for (std::size_t k = 0; k < hist.size(); ++k) centers.push_back(hist.bin_center(k));
                io::write_csv(g2_out, {"tau_ns", "g2", "stderr"}, {centers, g, se});
                rep.add("out", g2_out);
            }
            if (!timestamps_out.empty()) rep.add("timestamps_out", timestamps_out);
            return kExitOk;
        };
    });

    FitArgs g2_fit_args;
    g2_fit_args.model = "g2_three_level";
    auto* g2_fit = g2->add_subcommand("fit", "fit the bi-exponential g2 model to a tau,g2 CSV");
    add_fit_options(g2_fit, g2_fit_args);
    g2_fit->callback([&] { action = [&](const io::RunConfig& cfg) { return run_fit(g2_fit_args, cfg, out, err); }; });

    // pulse
    auto* pulse = app.add_subcommand("pulse", "spin control sequences");
    pulse->require_subcommand(1);
    PulseArgs pa;
    auto* rabi = pulse->add_subcommand("rabi", "fixed-length pulse, swept drive");
    add_pulse_common(rabi, pa, "--decay", "drive values min,max,step");
    rabi->add_option("--rabi-frequency", pa.rabi_frequency, "Rabi frequency at unit drive (MHz unless suffixed)");
    rabi->add_option("--pulse-length", pa.pulse_length, "pulse length (ns unless suffixed)");
    rabi->add_option("--axis", pa.axis, "amplitude or power")->check(CLI::IsMember({"amplitude", "power"}));

    auto* ramsey = pulse->add_subcommand("ramsey", "free-induction decay");
    add_pulse_common(ramsey, pa, "--t2star", "free times min,max,step (ns unless suffixed)");
    ramsey->add_option("--detuning", pa.detuning, "detuning (MHz unless suffixed)");
    ramsey->add_option("--phase", pa.phase, "fringe phase, rad (analytic)");

    auto* hahn = pulse->add_subcommand("hahn", "spin echo");
    add_pulse_common(hahn, pa, "--t2", "total free times min,max,step (ns unless suffixed)");
    auto* cpmg = pulse->add_subcommand("cpmg", "CPMG-N dynamical decoupling");
    add_pulse_common(cpmg, pa, "--t2", "total free times min,max,step (ns unless suffixed)");
    cpmg->add_option("--n-pi", pa.n_pi, "number of pi pulses")->check(CLI::PositiveNumber);
    for (auto* cmd : {hahn, cpmg}) {
        cmd->add_option("--detuning", pa.detuning, "static detuning (MHz unless suffixed)");
        pa.mod_opt = cmd->add_option("--mod-frequency", pa.mod_frequency, "sin^2 modulation frequency (analytic)");
        cmd->add_option("--mod-phase", pa.mod_phase, "sin^2 modulation phase, rad (analytic)");
    }
    // Each subcommand owns its own --mod-frequency option; pick the parsed one.
    auto* hahn_mod = hahn->get_option("--mod-frequency");
    auto* cpmg_mod = cpmg->get_option("--mod-frequency");
    const std::pair<CLI::App*, SequenceKind> pulse_kinds[] = {
        {rabi, SequenceKind::rabi}, {ramsey, SequenceKind::ramsey}, {hahn, SequenceKind::hahn}, {cpmg, SequenceKind::cpmg}};
    for (const auto& [cmd, kind] : pulse_kinds) {
        cmd->callback([&, cmd = cmd, kind = kind] {
            pa.seed_opt = cmd->get_option("--seed");
            pa.t2_white_opt = cmd->get_option("--t2-white");
            pa.t1_opt = cmd->get_option("--t1");
            pa.decay_opt = cmd->get_option(kind == SequenceKind::rabi     ? "--decay"
                                           : kind == SequenceKind::ramsey ? "--t2star"
                                                                          : "--t2");
            pa.mod_opt = kind == SequenceKind::hahn ? hahn_mod : kind == SequenceKind::cpmg ? cpmg_mod : nullptr;
            action = [&, kind](const io::RunConfig& cfg) { return run_pulse(kind, pa, cfg, out, err); };
        });
    }

    app.failure_message(CLI::FailureMessage::help);
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const auto cfg = io::resolve_config(config_opt->count() > 0 ? std::optional(config_path) : std::nullopt);
        if (!action) {
            err << app.help();
            return kExitUsage;
        }
        return action(cfg);
    } catch (const NoSignal& e) {
        err << "error: no signal: " << e.what() << '\n';
        return kExitFit;
    } catch (const RankDeficient& e) {
        err << "error: rank deficient: " << e.what() << '\n';
        return kExitFit;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace cavspin::cli
