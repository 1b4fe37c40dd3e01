#include "cavspin/purcell.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace cavspin {

std::optional<double> ConsistencyReport::route(const std::string& name) const {
    for (const auto& r : routes)
        if (r.name == name) return r.value;
    return std::nullopt;
}

namespace {

template <typename Fn>
PurcellRoute attempt(std::string name, bool available, Fn&& compute) {
    PurcellRoute route{std::move(name), std::nullopt, {}};
    if (!available) return route;
    try {
        route.value = compute();
    } catch (const std::exception& e) {
        route.error = e.what();
    }
    return route;
}

}  // namespace

ConsistencyReport consistency_report(const EmissionBudget& b, double threshold) {
    if (!(threshold > 0.0)) throw InvalidParameter("consistency threshold must be > 0");
    ConsistencyReport report;
    report.threshold = threshold;

    report.routes.push_back(attempt("intensity", b.intensity_on && b.intensity_off, [&] {
        return purcell_from_intensity(*b.intensity_on, *b.intensity_off);
    }));
    report.routes.push_back(attempt("lifetime", b.tau_on && b.tau_off && b.tau_dark, [&] {
        return purcell_from_lifetimes(*b.tau_on, *b.tau_off, *b.tau_dark, b.alpha);
    }));
    report.routes.push_back(
        attempt("dw", b.beta.has_value(), [&] { return purcell_from_dw(b.alpha, *b.beta); }));
    report.routes.push_back(
        attempt("external", b.external_purcell.has_value(), [&] { return *b.external_purcell; }));

    std::vector<double> values;
    for (const auto& r : report.routes)
        if (r.value) values.push_back(*r.value);
    if (values.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        report.max_relative_spread = (*hi - *lo) / *lo;
    }
    report.flagged = report.max_relative_spread > threshold;
    return report;
}

void write_report(std::ostream& out, const ConsistencyReport& report) {
    const auto precision = out.precision(17);
    for (const auto& r : report.routes) {
        if (r.value) out << "F_" << r.name << '=' << *r.value << '\n';
        if (!r.error.empty()) out << "error_" << r.name << '=' << r.error << '\n';
    }
    out << "spread=" << report.max_relative_spread << '\n';
    out << "threshold=" << report.threshold << '\n';
    out << "flagged=" << (report.flagged ? "true" : "false") << '\n';
    out.precision(precision);
}

EmissionBudget synthesize_budget(double purcell, double alpha, double tau_off, double tau_dark) {
    if (!(purcell >= 1.0)) throw InvalidParameter("Purcell factor must be >= 1");
    if (!(tau_off > 0.0 && tau_off < tau_dark))
        throw DomainError("need 0 < tau_off < tau_dark");
    const double total_off = 1.0 / tau_off;
    const double radiative = total_off - 1.0 / tau_dark;
    const double total_on = total_off + (purcell - 1.0) * alpha * radiative;

    EmissionBudget b;
    b.alpha = alpha;
    b.beta = dw_on_resonance(purcell, alpha);
    b.intensity_off = 1.0;
    b.intensity_on = purcell;
    b.tau_off = tau_off;
    b.tau_on = 1.0 / total_on;
    b.tau_dark = tau_dark;
    return b;
}

}  // namespace cavspin
