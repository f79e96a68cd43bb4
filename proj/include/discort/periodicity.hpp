#pragma once

#include <complex>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "discort/event_log.hpp"

namespace discort {

// Per-slot usage of one location over the observation span.
struct ActivitySequence {
    std::string location;
    std::vector<double> values;
};

// Squared magnitudes of the unitary DFT up to the Nyquist index:
// power[k] for k = 0 .. ceil((n-1)/2).
struct Periodogram {
    std::vector<double> power;
    std::size_t n = 0;
};

// How the "dominant period" power cutoff is chosen.
//   PermMax: quantile of the max non-DC power across value-shuffled copies
//            of the sequence (its own fixed RNG stream, so results are
//            reproducible).
//   MeanStd: mean + z * std of the non-DC power entries.
struct ThresholdPolicy {
    enum class Kind { PermMax, MeanStd };
    Kind kind = Kind::PermMax;
    int permutations = 100;
    double quantile = 0.99;
    double z = 2.0;
};

struct SequenceOptions {
    bool fold_daily = false;  // collapse the span to one day of time_bins slots
    bool binary = false;      // 0/1 occupancy instead of counts
};

// Full unitary DFT, all n coefficients. Defined for n >= 2.
std::vector<std::complex<double>> dft(const std::vector<double>& values);

Periodogram periodogram(const std::vector<double>& values);

double power_threshold(const std::vector<double>& values, const Periodogram& pgram,
                       const ThresholdPolicy& policy);

// Periods round(n/k) for every non-DC index whose power strictly exceeds the
// threshold; deduplicated, ascending, always within [2, n].
std::vector<int> dominant_periods(const Periodogram& pgram, double threshold);

ActivitySequence activity_sequence(const EventLog& log,
                                   const std::vector<DiscretizedEvent>& events,
                                   std::size_t location, const SequenceOptions& options = {});

// The set of (location, time-bin) pairs judged periodically active.
struct PeriodicRelation {
    std::set<std::pair<std::size_t, int>> pairs;

    bool contains(std::size_t location, int bin) const {
        return pairs.count({location, bin}) != 0;
    }
};

struct PeriodicityOptions {
    ThresholdPolicy threshold;
    double theta = 0.5;  // high-activity cutoff as a fraction of the peak bin count
    SequenceOptions sequence;
    int jobs = 1;
};

// For each location: build its activity sequence, detect dominant periods,
// and if any exist mark the location's high-activity bins as periodic.
// Locations with fewer than two observed slots are skipped with a warning.
PeriodicRelation periodic_relation(const EventLog& log,
                                   const std::vector<DiscretizedEvent>& events,
                                   const PeriodicityOptions& options = {});

}  // namespace discort
