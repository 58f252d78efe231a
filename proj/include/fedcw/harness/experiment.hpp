#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedcw/harness/config.hpp"
#include "fedcw/harness/summary.hpp"

namespace fedcw::harness {

/// Aggregation-round inputs and outputs captured for auditing (weights are
/// omitted to keep the trace small). Only filled when the config asks.
struct RoundProbe {
    struct Client {
        int station_id = 0;
        std::int64_t sample_count = 0;
        double distance_m = 0.0;
        double plr_mean10 = 0.0;
    };
    int round = 0;
    bool skipped = true;
    std::vector<Client> clients;
    std::vector<int> participants;
    std::vector<double> betas;
};

struct ExperimentResult {
    std::string run_id;
    std::string metrics_csv;
    std::string rounds_csv;
    std::string summary_json;
    RunSummary summary;
    int windows = 0;
    int rounds = 0;
    double wall_seconds = 0.0;

    // Post-warmup per-window global delay means (windows with completions).
    std::vector<double> window_delay_means_us;

    // Lifetime ledger for conservation checks.
    std::int64_t frames_enqueued = 0;
    std::int64_t frames_acked = 0;
    std::int64_t frames_dropped = 0;
    std::int64_t frames_queued_end = 0;

    // Medium accounting for access-scheme comparisons.
    std::int64_t successes_total = 0;
    std::int64_t success_airtime_us = 0;
    std::int64_t lifetime_busy_us = 0;
    std::int64_t collision_busy_us = 0;

    std::vector<RoundProbe> probes;
};

/// Run one full experiment: simulate, learn, aggregate, and emit CSV text.
/// When cfg.out_dir is set the CSVs, the summary, and (optionally) weight
/// checkpoints are also written to disk.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Sample variance (n-1 denominator) of the per-window delay means; the
/// stability measure used when comparing control schemes.
double delay_variance(const std::vector<double>& window_delay_means);

}  // namespace fedcw::harness
