#include "fedcw/env.hpp"

#include <cmath>
#include <stdexcept>

namespace fedcw::env {

double compute_plr(int n_tx, int n_ack) {
    if (n_ack > n_tx) {
        throw std::logic_error("compute_plr: n_ack exceeds n_tx (counter corruption)");
    }
    if (n_tx == 0) {
        return 0.0;
    }
    return static_cast<double>(n_tx - n_ack) / static_cast<double>(n_tx);
}

double compute_idle(std::int64_t t_obs_us, std::int64_t t_busy_us) {
    if (t_busy_us < 0 || t_busy_us > t_obs_us) {
        throw std::logic_error("compute_idle: busy time outside [0, window] (accounting fault)");
    }
    return static_cast<double>(t_obs_us - t_busy_us) / static_cast<double>(t_obs_us);
}

int map_action_to_cw(int a) {
    if (a < 0 || a > 6) {
        throw std::invalid_argument("map_action_to_cw: action outside {0..6}");
    }
    return (1 << (a + 4)) - 1;
}

int discretize_action(double u, std::uint64_t* clamp_count) {
    if (u < 0.0 || u > 1.0 || std::isnan(u)) {
        if (clamp_count) {
            ++*clamp_count;
        }
        u = std::isnan(u) ? 0.0 : (u < 0.0 ? 0.0 : 1.0);
    }
    return static_cast<int>(std::lround(6.0 * u));  // lround: half away from zero
}

double compute_reward(double mean_delay_us, double delay_limit_us) {
    return (delay_limit_us - mean_delay_us) / delay_limit_us;
}

double mean_delay_us(const ObservationWindow& w) {
    if (w.completed_frame_delays_us.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double d : w.completed_frame_delays_us) {
        sum += d;
    }
    return sum / static_cast<double>(w.completed_frame_delays_us.size());
}

MetricsRecord make_record(int window_index, int station_id, const ObservationWindow& w,
                          int cw, int action, int frames_lost, int payload_bytes,
                          const RewardSpec& spec) {
    MetricsRecord rec;
    rec.window_index = window_index;
    rec.station_id = station_id;
    rec.plr = compute_plr(w.n_tx, w.n_ack);
    rec.idle = compute_idle(w.duration_us, w.busy_us);
    rec.cw = cw;
    rec.action = action;
    rec.frames_success = w.n_ack;
    rec.frames_lost = frames_lost;
    rec.flagged = (w.n_tx == 0) || w.completed_frame_delays_us.empty();
    rec.mean_delay_us = mean_delay_us(w);
    rec.reward = w.completed_frame_delays_us.empty()
                     ? 0.0
                     : compute_reward(rec.mean_delay_us, spec.delay_limit_us);
    const double payload_bits = 8.0 * static_cast<double>(payload_bytes);
    rec.throughput_mbps =
        static_cast<double>(w.n_ack) * payload_bits / static_cast<double>(w.duration_us);
    return rec;
}

}  // namespace fedcw::env
