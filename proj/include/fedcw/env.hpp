#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedcw::env {

/// MDP observation: per-station packet loss rate and the channel idle ratio,
/// both in [0, 1].
struct StateVector {
    double plr = 0.0;
    double idle = 1.0;
};

struct RewardSpec {
    double delay_limit_us = 20000.0;
};

/// Raw counters of one observation window (the 20 ms interaction step).
struct ObservationWindow {
    std::int64_t duration_us = 20000;
    int n_tx = 0;
    int n_ack = 0;
    std::int64_t busy_us = 0;
    std::vector<double> completed_frame_delays_us;
};

/// One output row; station_id == kGlobalStation marks the per-window global row.
struct MetricsRecord {
    static constexpr int kGlobalStation = -1;
    int window_index = 0;
    int station_id = kGlobalStation;
    double plr = 0.0;
    double idle = 0.0;
    int cw = -1;
    int action = -1;
    double reward = 0.0;
    double mean_delay_us = 0.0;
    double throughput_mbps = 0.0;
    int frames_success = 0;
    int frames_lost = 0;
    bool flagged = false;  // no transmissions or no completions this window
};

/// Loss rate (n_tx - n_ack)/n_tx; 0 for an idle window. Throws on
/// n_ack > n_tx (counter corruption).
double compute_plr(int n_tx, int n_ack);

/// Idle ratio (t_obs - t_busy)/t_obs. Throws when busy exceeds the window.
double compute_idle(std::int64_t t_obs_us, std::int64_t t_busy_us);

/// Action index {0..6} -> contention window 2^(a+4) - 1, i.e. 15..1023.
int map_action_to_cw(int a);

/// Continuous actor output in [0,1] -> round(6u), half away from zero.
/// Out-of-range u is clamped; *clamp_count (optional) tracks occurrences.
int discretize_action(double u, std::uint64_t* clamp_count = nullptr);

/// Normalized delay reward (limit - delay)/limit; may be negative.
double compute_reward(double mean_delay_us, double delay_limit_us);

/// Mean of the completed-frame delays, 0 when none completed.
double mean_delay_us(const ObservationWindow& w);

/// Assembles the per-station record for one window. The window is flagged
/// when it carries no transmissions or no completed frames; flagged windows
/// report the conventional PLR = 0 / reward = 0 values.
MetricsRecord make_record(int window_index, int station_id, const ObservationWindow& w,
                          int cw, int action, int frames_lost, int payload_bytes,
                          const RewardSpec& spec);

}  // namespace fedcw::env
