#include "cavspin/spin.hpp"

#include <algorithm>
#include <array>

namespace cavspin {

namespace {
constexpr double kOverlapTieTolerance = 1e-9;
}

TransitionFrequencies transition_frequencies(const SpinSystemd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(hamiltonian(s));
    const Eigen::Vector3d energies = solver.eigenvalues();
    const Eigen::Matrix3cd& vectors = solver.eigenvectors();

    // |⟨m|ψ_k⟩|² with m in basis order (+1, 0, −1).
    Eigen::Matrix3d weight = vectors.cwiseAbs2();

    TransitionFrequencies out;
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return weight(1, a) > weight(1, b); });
    const int zero = order[0];
    if (weight(1, order[0]) - weight(1, order[1]) < kOverlapTieTolerance) {
        out.ambiguous = true;
        out.warning = "|0> character shared between eigenstates";
    }

    int a = order[1];
    int b = order[2];
    if (a > b) std::swap(a, b);  // eigenvalue order
    int plus = b;
    int minus = a;
    const double wa = weight(0, a);
    const double wb = weight(0, b);
    if (std::abs(wa - wb) < kOverlapTieTolerance) {
        out.ambiguous = true;
        if (out.warning.empty()) out.warning = "|+1>/|-1> labeling is ambiguous";
    } else if (wa > wb) {
        plus = a;
        minus = b;
    }
    out.to_minus = energies(minus) - energies(zero);
    out.to_plus = energies(plus) - energies(zero);
    if (out.ambiguous && out.to_minus > out.to_plus) std::swap(out.to_minus, out.to_plus);
    return out;
}

OdmrSpectrum odmr_spectrum(const SpinSystemd& s, const std::vector<double>& frequencies,
                           double linewidth, double contrast_amp, int contrast_sign) {
    if (!(linewidth > 0.0)) throw InvalidParameter("ODMR linewidth must be > 0");
    if (contrast_sign != 1 && contrast_sign != -1)
        throw InvalidParameter("contrast sign must be +1 or -1");
    if (!std::is_sorted(frequencies.begin(), frequencies.end()))
        throw InvalidParameter("frequency grid must be ordered");

    const auto lines = transition_frequencies(s);
    OdmrSpectrum spec;
    spec.contrast_sign = contrast_sign;
    spec.peak_centers = {std::abs(lines.to_minus), std::abs(lines.to_plus)};
    std::sort(spec.peak_centers.begin(), spec.peak_centers.end());
    spec.frequencies = frequencies;
    spec.contrast.resize(frequencies.size());

    const double half = 0.5 * linewidth;
    const double scale = contrast_amp * contrast_sign;
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        double sum = 0.0;
        for (double center : spec.peak_centers) {
            const double d = frequencies[i] - center;
            sum += half * half / (d * d + half * half);
        }
        spec.contrast[i] = scale * sum;
    }
    return spec;
}

SpinSystemd spin_preset(std::string_view name) {
    SpinSystemd s;
    s.gamma = kElectronGyromagneticRatio;
    if (name == "nanobeam-hh") {
        s.D = kNanobeamZeroFieldSplitting;
    } else if (name == "bulk-hh") {
        s.D = kBulkZeroFieldSplitting;
    } else {
        throw InvalidParameter("unknown spin preset '" + std::string(name) +
                               "' (expected nanobeam-hh or bulk-hh)");
    }
    return s;
}

std::vector<double> linear_range(double min, double max, double step) {
    if (!(step > 0.0)) throw InvalidParameter("range step must be > 0");
    if (!(max >= min)) throw InvalidParameter("range max must be >= min");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9));
    out.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) out.push_back(min + static_cast<double>(k) * step);
    return out;
}

}  // namespace cavspin
