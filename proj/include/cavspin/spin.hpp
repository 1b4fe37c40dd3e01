#pragma once

// Spin-1 ground-state Hamiltonian with zero-field splitting and Zeeman
// coupling. Energies in MHz, fields in Gauss, basis ordered
// (|+1⟩, |0⟩, |−1⟩) along the defect axis z.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "cavspin/errors.hpp"

namespace cavspin {

template <typename Scalar>
struct SpinSystem {
    Scalar D{0};      ///< axial zero-field splitting
    Scalar E{0};      ///< transverse zero-field splitting
    Scalar gamma{2.8};  ///< gyromagnetic ratio, MHz/G
    Eigen::Matrix<Scalar, 3, 1> field = Eigen::Matrix<Scalar, 3, 1>::Zero();

    void validate() const {
        if (!(gamma > Scalar(0))) throw InvalidParameter("gyromagnetic ratio must be > 0");
    }

    /// Non-fatal notes about unusual parameters (|E| > |D|/3).
    [[nodiscard]] std::vector<std::string> warnings() const {
        using std::abs;
        std::vector<std::string> out;
        if (abs(E) > abs(D) / Scalar(3))
            out.emplace_back("|E| exceeds |D|/3; consider relabeling the principal axes");
        return out;
    }
};

using SpinSystemd = SpinSystem<double>;

template <typename Scalar>
struct SpinOneOperators {
    using Complex = std::complex<Scalar>;
    using Matrix = Eigen::Matrix<Complex, 3, 3>;

    static Matrix sx() {
        const Scalar h = Scalar(1) / std::sqrt(Scalar(2));
        Matrix m = Matrix::Zero();
        m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = Complex(h, 0);
        return m;
    }
    static Matrix sy() {
        const Scalar h = Scalar(1) / std::sqrt(Scalar(2));
        Matrix m = Matrix::Zero();
        m(0, 1) = m(1, 2) = Complex(0, -h);
        m(1, 0) = m(2, 1) = Complex(0, h);
        return m;
    }
    static Matrix sz() {
        Matrix m = Matrix::Zero();
        m(0, 0) = Complex(1, 0);
        m(2, 2) = Complex(-1, 0);
        return m;
    }
};

/// H = D·Sz² + E·(Sx² − Sy²) + γ·B·S.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 3, 3> hamiltonian(const SpinSystem<Scalar>& s) {
    s.validate();
    using Ops = SpinOneOperators<Scalar>;
    const auto sx = Ops::sx();
    const auto sy = Ops::sy();
    const auto sz = Ops::sz();
    typename Ops::Matrix h = s.D * (sz * sz) + s.E * (sx * sx - sy * sy) +
                             s.gamma * (s.field(0) * sx + s.field(1) * sy + s.field(2) * sz);
    // Enforce exact Hermiticity against rounding in the products.
    return ((h + h.adjoint()) / Scalar(2)).eval();
}

/// Eigenvalues in ascending order.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> energy_levels(const SpinSystem<Scalar>& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<std::complex<Scalar>, 3, 3>> solver(
        hamiltonian(s), Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

/// Frequencies of the two allowed transitions out of the state with most
/// |0⟩ character. Values are E_target − E_0 and may be negative once a
/// level crosses below |0⟩.
struct TransitionFrequencies {
    double to_minus = 0.0;  ///< |0⟩ → |−1⟩-like
    double to_plus = 0.0;   ///< |0⟩ → |+1⟩-like
    bool ambiguous = false; ///< labeling fell back to eigenvalue order
    std::string warning;
};

TransitionFrequencies transition_frequencies(const SpinSystemd& s);

struct OdmrSpectrum {
    std::vector<double> frequencies;  ///< MHz
    std::vector<double> contrast;     ///< fractional PL change
    std::vector<double> peak_centers; ///< MHz, ascending
    int contrast_sign = +1;           ///< +1 resonant readout, −1 off-resonant
};

/// Sum of unit-height Lorentzians (FWHM `linewidth`) centered on |f| for both
/// transitions, scaled by contrast_amp·contrast_sign.
OdmrSpectrum odmr_spectrum(const SpinSystemd& s, const std::vector<double>& frequencies,
                           double linewidth, double contrast_amp, int contrast_sign);

/// Named parameter sets: "nanobeam-hh" (D = 1328 MHz) and "bulk-hh"
/// (D = 1336 MHz), with E = 0 and γ = 2.8 MHz/G.
SpinSystemd spin_preset(std::string_view name);

inline constexpr double kNanobeamZeroFieldSplitting = 1328.0;
inline constexpr double kBulkZeroFieldSplitting = 1336.0;
inline constexpr double kElectronGyromagneticRatio = 2.8;

/// min, min+step, ... up to max (inclusive within step·1e-9).
std::vector<double> linear_range(double min, double max, double step);

}  // namespace cavspin
