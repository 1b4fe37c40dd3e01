#pragma once

// Kinetic Monte Carlo of the three-level emitter and a pair-counting
// correlator for the resulting detection streams. Times in ns.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cavspin/kinetics.hpp"

namespace cavspin {

struct PhotonRecord {
    std::vector<double> timestamps;  ///< strictly increasing, within [0, duration]
    double duration = 0.0;
    double detection_efficiency = 1.0;
    std::uint64_t seed = 0;

    [[nodiscard]] double mean_rate() const {
        return duration > 0.0 ? static_cast<double>(timestamps.size()) / duration : 0.0;
    }
};

struct CorrelationHistogram {
    std::vector<double> bin_edges;       ///< size = counts.size() + 1
    std::vector<std::uint64_t> counts;
    std::vector<double> normalization;   ///< expected uncorrelated counts per bin

    [[nodiscard]] std::size_t size() const { return counts.size(); }
    [[nodiscard]] double bin_center(std::size_t i) const { return 0.5 * (bin_edges[i] + bin_edges[i + 1]); }
    /// counts / normalization; 0 where the normalization vanishes.
    [[nodiscard]] std::vector<double> normalized() const;
    /// Poisson standard error of the normalized value, sqrt(counts)/normalization.
    [[nodiscard]] std::vector<double> standard_errors() const;
};

/// Exact stochastic trajectory by competing exponential waiting times, starting
/// in `initial` at t = 0. Every excited -> ground jump emits a photon that is
/// kept with probability `detection_efficiency`. The RNG substream is
/// (seed, stream).
PhotonRecord simulate_trajectory(const ThreeLevelRatesd& rates, double duration,
                                 double detection_efficiency, std::uint64_t seed,
                                 std::uint64_t stream = 0,
                                 PopulationStated::Vector initial = {1.0, 0.0, 0.0});

/// `count` independent trajectories on substreams 0..count-1 of `seed`,
/// spread over up to `threads` workers (0 = hardware concurrency). The result
/// does not depend on the thread count.
std::vector<PhotonRecord> simulate_trajectories(const ThreeLevelRatesd& rates, double duration,
                                                double detection_efficiency, std::uint64_t seed,
                                                std::size_t count, unsigned threads = 0);

/// Start-multistop histogram of positive delays up to max_tau. Bins are
/// [k w, (k+1) w) for k < floor(max_tau / w). Normalization per bin is
/// rate² · duration · w using the record's own mean rate.
CorrelationHistogram correlate(const PhotonRecord& record, double bin_width, double max_tau);

/// Sum of per-record histograms (counts and normalizations add).
CorrelationHistogram correlate(std::span<const PhotonRecord> records, double bin_width,
                               double max_tau);

/// Single-column CSV, first line `# timestamps_ns`, 17 significant digits.
/// Duration, efficiency and seed are carried as `# key=value` comments.
void write_timestamps(std::ostream& out, const PhotonRecord& record);
void write_timestamps(const std::string& path, const PhotonRecord& record);
PhotonRecord read_timestamps(std::istream& in);
PhotonRecord read_timestamps(const std::string& path);

}  // namespace cavspin
