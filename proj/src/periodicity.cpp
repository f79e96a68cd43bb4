#include "discort/periodicity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "discort/common.hpp"

namespace discort {

namespace {

// All permutation thresholds draw from this stream so repeated runs agree.
constexpr std::uint64_t kPermutationSeed = 0x706572696f64ULL;

std::size_t nyquist_index(std::size_t n) { return (n - 1 + 1) / 2; }  // ceil((n-1)/2)

// cos/sin lookup for e^{-j 2 pi m / n}, indexed by m = (k*i) mod n.
struct TwiddleTable {
    std::vector<double> cos_t;
    std::vector<double> sin_t;

    explicit TwiddleTable(std::size_t n) : cos_t(n), sin_t(n) {
        for (std::size_t m = 0; m < n; ++m) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) /
                                 static_cast<double>(n);
            cos_t[m] = std::cos(angle);
            sin_t[m] = std::sin(angle);
        }
    }
};

// Max non-DC power of a sequence given as (slot, value) pairs; skips the
// zero slots, which dominate activity sequences.
double max_nondc_power(const std::vector<std::pair<std::size_t, double>>& nonzero,
                       std::size_t n, const TwiddleTable& tw) {
    const std::size_t k_max = nyquist_index(n);
    double best = 0.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        double re = 0.0, im = 0.0;
        for (const auto& [slot, v] : nonzero) {
            const std::size_t m = (k * slot) % n;
            re += v * tw.cos_t[m];
            im += v * tw.sin_t[m];
        }
        best = std::max(best, (re * re + im * im) / static_cast<double>(n));
    }
    return best;
}

std::vector<std::pair<std::size_t, double>> nonzero_slots(const std::vector<double>& values) {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] != 0.0) out.emplace_back(i, values[i]);
    }
    return out;
}

}  // namespace

std::vector<std::complex<double>> dft(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) throw Error("dft requires a sequence of length >= 2");
    const TwiddleTable tw(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (values[i] == 0.0) continue;
            const std::size_t m = (k * i) % n;
            re += values[i] * tw.cos_t[m];
            im += values[i] * tw.sin_t[m];
        }
        out[k] = {re * scale, im * scale};
    }
    return out;
}

Periodogram periodogram(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) throw Error("periodogram requires a sequence of length >= 2");
    const TwiddleTable tw(n);
    const auto nonzero = nonzero_slots(values);
    const std::size_t k_max = nyquist_index(n);
    Periodogram p;
    p.n = n;
    p.power.resize(k_max + 1, 0.0);
    for (std::size_t k = 0; k <= k_max; ++k) {
        double re = 0.0, im = 0.0;
        for (const auto& [slot, v] : nonzero) {
            const std::size_t m = (k * slot) % n;
            re += v * tw.cos_t[m];
            im += v * tw.sin_t[m];
        }
        p.power[k] = (re * re + im * im) / static_cast<double>(n);
    }
    return p;
}

double power_threshold(const std::vector<double>& values, const Periodogram& pgram,
                       const ThresholdPolicy& policy) {
    if (pgram.power.size() < 2) throw Error("periodogram has no non-DC entries");

    if (policy.kind == ThresholdPolicy::Kind::MeanStd) {
        const std::size_t count = pgram.power.size() - 1;
        double mean = 0.0;
        for (std::size_t k = 1; k < pgram.power.size(); ++k) mean += pgram.power[k];
        mean /= static_cast<double>(count);
        double var = 0.0;
        for (std::size_t k = 1; k < pgram.power.size(); ++k) {
            const double d = pgram.power[k] - mean;
            var += d * d;
        }
        var /= static_cast<double>(count);
        return mean + policy.z * std::sqrt(var);
    }

    if (policy.permutations < 1) throw Error("permutation threshold needs >= 1 permutations");
    if (values.size() != pgram.n) throw Error("sequence/periodogram length mismatch");
    const TwiddleTable tw(pgram.n);
    Rng rng(kPermutationSeed);
    std::vector<double> shuffled = values;
    std::vector<double> maxima;
    maxima.reserve(static_cast<std::size_t>(policy.permutations));
    for (int p = 0; p < policy.permutations; ++p) {
        rng.shuffle(shuffled);
        maxima.push_back(max_nondc_power(nonzero_slots(shuffled), pgram.n, tw));
    }
    std::sort(maxima.begin(), maxima.end());
    const double q = std::clamp(policy.quantile, 0.0, 1.0);
    // Nearest-rank quantile.
    std::size_t idx = 0;
    if (q > 0.0) {
        idx = static_cast<std::size_t>(
                  std::ceil(q * static_cast<double>(maxima.size()))) - 1;
    }
    idx = std::min(idx, maxima.size() - 1);
    return maxima[idx];
}

std::vector<int> dominant_periods(const Periodogram& pgram, double threshold) {
    if (pgram.power.empty()) throw Error("empty periodogram");
    // Entries within numerical noise of zero, relative to the spectrum peak,
    // never qualify; an analytically flat spectrum must yield no periods.
    const double peak = *std::max_element(pgram.power.begin(), pgram.power.end());
    const double floor = 1e-12 * peak;
    std::set<int> periods;
    for (std::size_t k = 1; k < pgram.power.size(); ++k) {
        if (pgram.power[k] <= threshold || pgram.power[k] <= floor) continue;
        const int period = static_cast<int>(
            std::llround(static_cast<double>(pgram.n) / static_cast<double>(k)));
        if (period >= 2) periods.insert(period);
    }
    return {periods.begin(), periods.end()};
}

ActivitySequence activity_sequence(const EventLog& log,
                                   const std::vector<DiscretizedEvent>& events,
                                   std::size_t location, const SequenceOptions& options) {
    if (events.empty()) throw Error("no events to build an activity sequence from");
    ActivitySequence seq;
    seq.location = log.locations.id(location);

    if (options.fold_daily) {
        seq.values.assign(static_cast<std::size_t>(log.time_bins), 0.0);
        for (const auto& e : events) {
            if (e.location != location) continue;
            auto& slot = seq.values[static_cast<std::size_t>(e.bin)];
            slot = options.binary ? 1.0 : slot + 1.0;
        }
        return seq;
    }

    // Full observation span, shared by all locations so slot indices align.
    std::int64_t day_min = events.front().day;
    std::int64_t day_max = events.front().day;
    for (const auto& e : events) {
        day_min = std::min(day_min, e.day);
        day_max = std::max(day_max, e.day);
    }
    const std::size_t slots =
        static_cast<std::size_t>(day_max - day_min + 1) * static_cast<std::size_t>(log.time_bins);
    seq.values.assign(slots, 0.0);
    for (const auto& e : events) {
        if (e.location != location) continue;
        const std::size_t slot = static_cast<std::size_t>(e.day - day_min) *
                                     static_cast<std::size_t>(log.time_bins) +
                                 static_cast<std::size_t>(e.bin);
        auto& value = seq.values[slot];
        value = options.binary ? 1.0 : value + 1.0;
    }
    return seq;
}

PeriodicRelation periodic_relation(const EventLog& log,
                                   const std::vector<DiscretizedEvent>& events,
                                   const PeriodicityOptions& options) {
    const std::size_t n_loc = log.locations.size();
    std::vector<std::vector<int>> bins_per_loc(n_loc);
    std::vector<std::uint8_t> skipped(n_loc, 0);

    parallel_for(n_loc, options.jobs, [&](std::size_t loc) {
        const auto seq = activity_sequence(log, events, loc, options.sequence);
        std::size_t observed = 0;
        for (double v : seq.values) observed += v != 0.0 ? 1 : 0;
        if (observed < 2) {
            skipped[loc] = 1;
            return;
        }
        const auto pgram = periodogram(seq.values);
        const double threshold = power_threshold(seq.values, pgram, options.threshold);
        if (dominant_periods(pgram, threshold).empty()) return;

        // Periodic location: its high-activity bins enter the relation.
        std::vector<double> per_bin(static_cast<std::size_t>(log.time_bins), 0.0);
        for (const auto& e : events) {
            if (e.location == loc) per_bin[static_cast<std::size_t>(e.bin)] += 1.0;
        }
        const double peak = *std::max_element(per_bin.begin(), per_bin.end());
        for (int b = 0; b < log.time_bins; ++b) {
            if (per_bin[static_cast<std::size_t>(b)] >= options.theta * peak)
                bins_per_loc[loc].push_back(b);
        }
    });

    PeriodicRelation rel;
    for (std::size_t loc = 0; loc < n_loc; ++loc) {
        if (skipped[loc]) {
            warn("location '" + log.locations.id(loc) +
                 "' has fewer than 2 observed slots; periodicity skipped");
            continue;
        }
        for (int b : bins_per_loc[loc]) rel.pairs.insert({loc, b});
    }
    return rel;
}

}  // namespace discort
