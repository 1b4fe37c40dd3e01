#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "cavspin/errors.hpp"
#include "cavspin/fit/fit.hpp"

namespace cavspin::fit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

/// Median of the outer 10% of samples (5% on each side, at least one each).
double outer_baseline(const std::vector<double>& y) {
    const std::size_t k = std::max<std::size_t>(1, y.size() / 20);
    std::vector<double> edge(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(k));
    edge.insert(edge.end(), y.end() - static_cast<std::ptrdiff_t>(k), y.end());
    return median(edge);
}

/// Median of the last 10% of samples.
double tail_baseline(const std::vector<double>& y) {
    const std::size_t k = std::max<std::size_t>(1, y.size() / 10);
    return median(std::vector<double>(y.end() - static_cast<std::ptrdiff_t>(k), y.end()));
}

void require_signal(const DataSeries& d) {
    const auto [lo, hi] = std::minmax_element(d.y.begin(), d.y.end());
    const double scale = std::max({1.0, std::abs(*lo), std::abs(*hi)});
    if (!(*hi - *lo > 1e-12 * scale)) throw NoSignal("data are constant; no signal to fit");
}

struct PeakGuess {
    double center, fwhm, amplitude;
};

// Largest excursion from zero in `residual`, width from the interpolated
// half-maximum crossings.
PeakGuess guess_peak(const std::vector<double>& x, const std::vector<double>& residual) {
    std::size_t peak = 0;
    for (std::size_t i = 1; i < residual.size(); ++i)
        if (std::abs(residual[i]) > std::abs(residual[peak])) peak = i;
    const double amp = residual[peak];
    const double half = 0.5 * amp;
    auto above = [&](std::size_t i) { return amp > 0 ? residual[i] >= half : residual[i] <= half; };

    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double y0 = residual[inside], y1 = residual[outside];
        if (y0 == y1) return x[outside];
        return x[inside] + (half - y0) * (x[outside] - x[inside]) / (y1 - y0);
    };

    std::size_t lo = peak;
    while (lo > 0 && above(lo - 1)) --lo;
    std::size_t hi = peak;
    while (hi + 1 < residual.size() && above(hi + 1)) ++hi;
    const double left = lo > 0 ? crossing(lo, lo - 1) : x.front();
    const double right = hi + 1 < residual.size() ? crossing(hi, hi + 1) : x.back();
    double fwhm = right - left;
    const double spacing = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    if (!(fwhm > 0.0)) fwhm = spacing;
    return {x[peak], std::max(fwhm, 0.5 * spacing), amp};
}

// Least-squares slope and intercept of log(v) against x.
std::pair<double, double> log_linear(const std::vector<double>& x, const std::vector<double>& v) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ly = std::log(v[i]);
        sx += x[i];
        sy += ly;
        sxx += x[i] * x[i];
        sxy += x[i] * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return {0.0, sy / n};
    const double slope = (n * sxy - sx * sy) / denom;
    return {slope, (sy - slope * sx) / n};
}

struct DecayGuess {
    double amplitude, time, offset;
};

DecayGuess guess_decay(const DataSeries& d) {
    const double offset = tail_baseline(d.y);
    const double first = d.y.front() - offset;
    const double sign = first >= 0 ? 1.0 : -1.0;
    std::vector<double> xs, vs;
    const double floor = 0.1 * std::abs(first);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double v = sign * (d.y[i] - offset);
        if (v <= floor) break;
        xs.push_back(d.x[i]);
        vs.push_back(v);
    }
    const double span = d.x.back() - d.x.front();
    double time = span / 3.0;
    double amplitude = first;
    if (xs.size() >= 2) {
        const auto [slope, intercept] = log_linear(xs, vs);
        if (slope < 0.0) {
            time = -1.0 / slope;
            amplitude = sign * std::exp(intercept);
        }
    }
    if (!(time > 0.0) || !std::isfinite(time)) time = span / 3.0;
    return {amplitude, time, offset};
}

struct ToneGuess {
    double frequency, phase, amplitude;
};

// Dominant bin of the discrete spectrum of detrended y, evaluated at the
// frequencies k/(N·dx), refined by parabolic interpolation of |X|.
ToneGuess dominant_tone(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = y.size();
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    const double dx = (x.back() - x.front()) / static_cast<double>(n - 1);
    const double df = 1.0 / (static_cast<double>(n) * dx);

    auto transform = [&](double f) {
        std::complex<double> acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += (y[i] - mean) * std::exp(std::complex<double>(0.0, -kTwoPi * f * (x[i] - x.front())));
        return acc;
    };

    const std::size_t bins = std::max<std::size_t>(2, n / 2);
    std::vector<double> mag(bins + 1, 0.0);
    std::size_t best = 1;
    for (std::size_t k = 1; k <= bins; ++k) {
        mag[k] = std::abs(transform(static_cast<double>(k) * df));
        if (mag[k] > mag[best]) best = k;
    }
    double shift = 0.0;
    if (best > 1 && best < bins) {
        const double a = mag[best - 1], b = mag[best], c = mag[best + 1];
        const double denom = a - 2.0 * b + c;
        if (denom != 0.0) shift = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    }
    const double f = (static_cast<double>(best) + shift) * df;
    const auto coeff = transform(f);
    // y ≈ A cos(2πf(x − x0) + φ0); φ measured from x = 0.
    const double phase0 = std::arg(coeff);
    double phase = phase0 - kTwoPi * f * x.front();
    phase = std::remainder(phase, kTwoPi);
    double amp = 0.0;
    for (double v : y) amp = std::max(amp, std::abs(v - mean));
    return {f, phase, amp};
}

}  // namespace

Eigen::VectorXd initial_guess(const ModelSpec& model, const DataSeries& data) {
    data.validate(2);
    require_signal(data);
    const std::string id = model.id();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size()));

    if (id == "lorentzian" || id == "gaussian") {
        const int peaks = static_cast<int>((model.size() - 1) / 3);
        const double baseline = outer_baseline(data.y);
        std::vector<double> residual(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) residual[i] = data.y[i] - baseline;
        for (int k = 0; k < peaks; ++k) {
            const auto g = guess_peak(data.x, residual);
            p(3 * k) = g.center;
            p(3 * k + 1) = g.fwhm;
            p(3 * k + 2) = g.amplitude;
            Eigen::VectorXd single = Eigen::VectorXd::Zero(p.size());
            single(3 * k) = g.center;
            single(3 * k + 1) = g.fwhm;
            single(3 * k + 2) = g.amplitude;
            for (std::size_t i = 0; i < data.size(); ++i)
                residual[i] -= model.evaluate(single, data.x[i]);
        }
        // Order peaks by center so parameter labels follow x.
        std::vector<int> order(static_cast<std::size_t>(peaks));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return p(3 * a) < p(3 * b); });
        Eigen::VectorXd sorted = p;
        for (int k = 0; k < peaks; ++k) sorted.segment(3 * k, 3) = p.segment(3 * order[static_cast<std::size_t>(k)], 3);
        p = sorted;
        p(3 * peaks) = baseline;
        return p;
    }

    if (id == "exp_decay") {
        const auto g = guess_decay(data);
        p << g.amplitude, g.time, g.offset;
        return p;
    }
    if (id == "stretched_exp") {
        const auto g = guess_decay(data);
        p << g.amplitude, g.time, 1.0, g.offset;
        return p;
    }

    if (id == "damped_sinusoid" || id == "sin2_stretched") {
        const auto tone = dominant_tone(data.x, data.y);
        const double span = data.x.back() - data.x.front();
        const double mean = std::accumulate(data.y.begin(), data.y.end(), 0.0) /
                            static_cast<double>(data.size());
        if (id == "damped_sinusoid") {
            p << tone.amplitude, tone.frequency, tone.phase, span / 2.0, 1.5, mean;
        } else {
            // sin²(ψ) = (1 − cos 2ψ)/2: the spectral line sits at twice f and
            // the cosine phase is 2φ + π.
            const double phase = std::remainder(0.5 * (tone.phase - std::numbers::pi), std::numbers::pi);
            p << 2.0 * tone.amplitude, 0.5 * tone.frequency, phase, span / 2.0, 1.5,
                mean - tone.amplitude;
        }
        return p;
    }

    if (id == "g2_three_level") {
        // Smallest |τ| region gives the dip, the maximum above 1 the bunching.
        std::size_t zero = 0;
        for (std::size_t i = 1; i < data.size(); ++i)
            if (std::abs(data.x[i]) < std::abs(data.x[zero])) zero = i;
        const double dip = data.y[zero];
        std::size_t peak = 0;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (data.y[i] > data.y[peak]) peak = i;
        const double bunch = std::max(data.y[peak] - 1.0, 0.0);

        // Antibunching rise time: first |τ| at which y climbs halfway from
        // the dip to its maximum.
        const double halfway = 0.5 * (dip + data.y[peak]);
        double t1 = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data.y[i] >= halfway && std::abs(data.x[i]) > std::abs(data.x[zero])) {
                t1 = std::abs(data.x[i]) / std::log(2.0);
                break;
            }
        }
        const double span = std::abs(data.x.back() - data.x.front());
        if (!(t1 > 0.0)) t1 = span / 20.0;

        // Bunching decay: log-linear regression of y − 1 beyond the peak.
        double t2 = span / 4.0;
        std::vector<double> xs, vs;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double ax = std::abs(data.x[i]);
            if (ax <= std::abs(data.x[peak])) continue;
            const double v = data.y[i] - 1.0;
            if (v > 0.1 * bunch && bunch > 0.0) {
                xs.push_back(ax);
                vs.push_back(v);
            }
        }
        if (xs.size() >= 2) {
            const auto [slope, intercept] = log_linear(xs, vs);
            (void)intercept;
            if (slope < 0.0) t2 = -1.0 / slope;
        }
        if (t2 <= t1) t2 = 5.0 * t1;
        // Peak of the bi-exponential sits below amp_bunch; scale up modestly.
        const double amp_bunch = 1.2 * bunch;
        const double amp_anti = 1.0 + amp_bunch - dip;
        if (model.size() == 3) {
            p << amp_bunch, t1, t2;
        } else {
            p << amp_anti, amp_bunch, t1, t2;
        }
        return p;
    }

    throw InvalidParameter("no initial-guess heuristic for model '" + id + "'");
}

}  // namespace cavspin::fit
