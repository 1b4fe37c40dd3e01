#include "cavspin/photon_stream.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>
#include <thread>

#include "cavspin/random.hpp"

namespace cavspin {

namespace {

enum class Level { ground, excited, dark };

Level draw_initial_level(const PopulationStated::Vector& initial, RandomStream& rng) {
    const double total = initial.sum();
    if (!(total > 0.0) || (initial.array() < 0.0).any())
        throw InvalidParameter("initial population must be nonnegative and nonzero");
    const double u = rng.uniform() * total;
    if (u < initial(0)) return Level::ground;
    if (u < initial(0) + initial(1)) return Level::excited;
    return Level::dark;
}

}  // namespace

std::vector<double> CorrelationHistogram::normalized() const {
    std::vector<double> out(counts.size(), 0.0);
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (normalization[i] > 0.0) out[i] = static_cast<double>(counts[i]) / normalization[i];
    return out;
}

std::vector<double> CorrelationHistogram::standard_errors() const {
    std::vector<double> out(counts.size(), 0.0);
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (normalization[i] > 0.0)
            out[i] = std::sqrt(static_cast<double>(counts[i])) / normalization[i];
    return out;
}

PhotonRecord simulate_trajectory(const ThreeLevelRatesd& rates, double duration,
                                 double detection_efficiency, std::uint64_t seed,
                                 std::uint64_t stream, PopulationStated::Vector initial) {
    rates.validate();
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw InvalidParameter("duration must be finite and > 0");
    if (!(detection_efficiency >= 0.0 && detection_efficiency <= 1.0))
        throw InvalidParameter("detection efficiency must lie in [0, 1]");

    RandomStream rng(seed, stream);
    PhotonRecord record;
    record.duration = duration;
    record.detection_efficiency = detection_efficiency;
    record.seed = seed;
    record.timestamps.reserve(static_cast<std::size_t>(
        std::min(duration * rates.radiative * detection_efficiency * 0.5, 5.0e7)));

    Level level = draw_initial_level(initial, rng);
    double t = 0.0;
    while (true) {
        switch (level) {
            case Level::ground: {
                t += rng.exponential(rates.pump);
                if (t > duration) return record;
                level = Level::excited;
                break;
            }
            case Level::excited: {
                // Competing exponentials: the earliest transition wins.
                const double to_ground = rng.exponential(rates.radiative);
                const double to_dark = rng.exponential(rates.shelve);
                if (to_ground <= to_dark) {
                    t += to_ground;
                    if (t > duration) return record;
                    level = Level::ground;
                    if (rng.bernoulli(detection_efficiency)) {
                        // Strictly increasing timestamps; a zero waiting time
                        // within rounding cannot produce a duplicate.
                        if (record.timestamps.empty() || t > record.timestamps.back())
                            record.timestamps.push_back(t);
                    }
                } else {
                    t += to_dark;
                    if (t > duration) return record;
                    level = Level::dark;
                }
                break;
            }
            case Level::dark: {
                t += rng.exponential(rates.deshelve);
                if (t > duration) return record;
                level = Level::ground;
                break;
            }
        }
    }
}

std::vector<PhotonRecord> simulate_trajectories(const ThreeLevelRatesd& rates, double duration,
                                                double detection_efficiency, std::uint64_t seed,
                                                std::size_t count, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<PhotonRecord> out(count);
    const std::size_t workers = std::min<std::size_t>(threads, std::max<std::size_t>(count, 1));
    std::vector<std::future<void>> jobs;
    jobs.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < count; i += workers)
                out[i] = simulate_trajectory(rates, duration, detection_efficiency, seed, i);
        }));
    }
    for (auto& job : jobs) job.get();
    return out;
}

CorrelationHistogram correlate(const PhotonRecord& record, double bin_width, double max_tau) {
    if (!(bin_width > 0.0)) throw InvalidParameter("bin width must be > 0");
    if (!(max_tau >= bin_width)) throw InvalidParameter("max_tau must be >= bin width");

    const auto n_bins = static_cast<std::size_t>(std::floor(max_tau / bin_width * (1.0 + 1e-12)));
    CorrelationHistogram h;
    h.bin_edges.resize(n_bins + 1);
    for (std::size_t k = 0; k <= n_bins; ++k) h.bin_edges[k] = static_cast<double>(k) * bin_width;
    h.counts.assign(n_bins, 0);
    h.normalization.assign(n_bins, 0.0);

    const auto& ts = record.timestamps;
    if (ts.empty() || record.duration <= 0.0) return h;

    const double upper = static_cast<double>(n_bins) * bin_width;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        for (std::size_t j = i + 1; j < ts.size(); ++j) {
            const double tau = ts[j] - ts[i];
            if (tau >= upper) break;
            const auto k = static_cast<std::size_t>(tau / bin_width);
            if (k < n_bins) ++h.counts[k];
        }
    }

    const double rate = record.mean_rate();
    std::fill(h.normalization.begin(), h.normalization.end(),
              rate * rate * record.duration * bin_width);
    return h;
}

CorrelationHistogram correlate(std::span<const PhotonRecord> records, double bin_width,
                               double max_tau) {
    CorrelationHistogram total;
    bool first = true;
    for (const auto& record : records) {
        auto h = correlate(record, bin_width, max_tau);
        if (first) {
            total = std::move(h);
            first = false;
            continue;
        }
        for (std::size_t k = 0; k < total.size(); ++k) {
            total.counts[k] += h.counts[k];
            total.normalization[k] += h.normalization[k];
        }
    }
    if (first) {
        PhotonRecord empty;
        total = correlate(empty, bin_width, max_tau);
    }
    return total;
}

void write_timestamps(std::ostream& out, const PhotonRecord& record) {
    out << "# timestamps_ns\n";
    out << std::setprecision(17);
    out << "# duration_ns=" << record.duration << '\n';
    out << "# detection_efficiency=" << record.detection_efficiency << '\n';
    out << "# seed=" << record.seed << '\n';
    for (double t : record.timestamps) out << t << '\n';
}

void write_timestamps(const std::string& path, const PhotonRecord& record) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot open '" + path + "' for writing");
    write_timestamps(out, record);
}

PhotonRecord read_timestamps(std::istream& in) {
    PhotonRecord record;
    bool header = false;
    bool have_duration = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            body.erase(0, body.find_first_not_of(" \t"));
            if (body == "timestamps_ns") {
                header = true;
            } else if (auto eq = body.find('='); eq != std::string::npos) {
                const std::string key = body.substr(0, eq);
                const std::string value = body.substr(eq + 1);
                try {
                    if (key == "duration_ns") {
                        record.duration = std::stod(value);
                        have_duration = true;
                    } else if (key == "detection_efficiency") {
                        record.detection_efficiency = std::stod(value);
                    } else if (key == "seed") {
                        record.seed = std::stoull(value);
                    }
                } catch (const std::exception&) {
                    throw IngestionError("line " + std::to_string(line_no) + ": bad value for '" +
                                         key + "'");
                }
            }
            continue;
        }
        if (!header) throw IngestionError("timestamp file must start with '# timestamps_ns'");
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        char* end = nullptr;
        const double t = std::strtod(line.c_str(), &end);
        if (line.empty() || end != line.c_str() + line.size() || !std::isfinite(t))
            throw IngestionError("line " + std::to_string(line_no) + ": not a number: '" + line + "'");
        if (!record.timestamps.empty() && !(t > record.timestamps.back()))
            throw IngestionError("line " + std::to_string(line_no) +
                                 ": timestamps must be strictly increasing");
        if (t < 0.0) throw IngestionError("line " + std::to_string(line_no) + ": negative timestamp");
        record.timestamps.push_back(t);
    }
    if (!header) throw IngestionError("timestamp file must start with '# timestamps_ns'");
    if (!have_duration) record.duration = record.timestamps.empty() ? 0.0 : record.timestamps.back();
    if (!record.timestamps.empty() && record.timestamps.back() > record.duration)
        throw IngestionError("timestamp beyond the recorded duration");
    return record;
}

PhotonRecord read_timestamps(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open '" + path + "'");
    return read_timestamps(in);
}

}  // namespace cavspin
