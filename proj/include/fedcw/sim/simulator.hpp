#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fedcw/rng.hpp"
#include "fedcw/sim/channel_model.hpp"
#include "fedcw/sim/clock.hpp"
#include "fedcw/sim/timing.hpp"
#include "fedcw/sim/traffic.hpp"

namespace fedcw::sim {

enum class AccessMode { kBasic, kRtsCts };

/// Who owns the contention window.
///   kExternal: an outside controller sets it via set_cw(); collisions and
///              losses never change it, retries redraw from the same range.
///   kBinaryExponential: double on failure up to cw_max, reset to cw_min on
///              success or drop.
enum class CwPolicy { kExternal, kBinaryExponential };

struct SimParams {
    MacTiming timing{};
    ChannelErrorModel error_model{};
    AccessMode access = AccessMode::kBasic;
    CwPolicy cw_policy = CwPolicy::kExternal;
    int payload_bytes = 1472;
    int retry_cap = 7;
    int cw_min = 15;
    int cw_max = 1023;
    bool saturate = false;
};

struct StationSetup {
    double distance_m = 5.0;
    std::optional<TrafficSpec> traffic;  // ignored when saturating
};

struct Frame {
    std::int64_t id = -1;
    int payload_bytes = 0;
    std::int64_t enqueue_us = 0;
    std::int64_t first_tx_us = -1;
    int retry_count = 0;
};

/// Per-window MAC counters; the harness snapshots and clears them.
struct WindowCounters {
    int n_tx = 0;
    int n_ack = 0;
    int frames_lost = 0;
    std::vector<double> completed_delays_us;

    void clear() {
        n_tx = 0;
        n_ack = 0;
        frames_lost = 0;
        completed_delays_us.clear();
    }
};

struct Station {
    int id = 0;
    double distance_m = 5.0;
    int cw_current = 15;
    int backoff_slots = -1;        // pending residual draw, -1 = none
    std::int64_t tx_slot = -1;     // slot index in the live contention, -1 = not joined
    std::deque<Frame> queue;
    WindowCounters window;

    // Lifetime bookkeeping.
    std::int64_t enqueued_total = 0;
    std::int64_t acked_total = 0;
    std::int64_t dropped_total = 0;

    bool backlogged() const { return !queue.empty(); }
};

/// Shared-medium occupancy and lifetime airtime accounting.
class Channel {
  public:
    /// Register a busy interval [start, end); intervals never overlap.
    void add_busy(std::int64_t start_us, std::int64_t end_us);

    /// Busy time inside [w_start, w_end), consuming fully elapsed intervals
    /// and keeping the tail of one that spans the boundary.
    std::int64_t take_window_busy_us(std::int64_t w_start_us, std::int64_t w_end_us);

    std::int64_t busy_until_us() const { return busy_until_; }
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pending_intervals() const {
        return intervals_;
    }

    // Lifetime tallies.
    std::int64_t lifetime_busy_us = 0;       // all medium-occupied time
    std::int64_t collision_busy_us = 0;      // subset spent on collided frames
    std::int64_t attempts_total = 0;         // transmission attempts (per station)
    std::int64_t attempts_collided = 0;      // attempts that overlapped another
    std::int64_t successes_total = 0;        // acked exchanges
    std::int64_t success_airtime_us = 0;     // summed duration of successful exchanges
    std::int64_t success_payload_us = 0;     // payload airtime inside those exchanges

  private:
    std::vector<std::pair<std::int64_t, std::int64_t>> intervals_;
    std::int64_t busy_until_ = 0;
};

/// Event-driven single-cell CSMA/CA simulator.
///
/// Contention is not ticked slot by slot: each contention phase has an
/// origin on the slot grid, every backlogged station holds the slot index
/// where its backoff expires, and the clock jumps straight to the earliest
/// one. Stations that lose the race keep the leftover count frozen for the
/// next phase, which reproduces the classic decrement-and-freeze rule.
class DcfSimulator {
  public:
    DcfSimulator(SimParams params, std::vector<StationSetup> setups, std::uint64_t master_seed);

    /// Schedule initial arrivals (or saturation frames) and open contention.
    void prime();

    /// Dispatch events until the clock passes end_us or the queue drains.
    void run_until(std::int64_t end_us);

    SimClock& clock() { return clock_; }
    Channel& channel() { return channel_; }
    const Channel& channel() const { return channel_; }
    Station& station(int id) { return stations_.at(static_cast<std::size_t>(id)); }
    const Station& station(int id) const { return stations_.at(static_cast<std::size_t>(id)); }
    int station_count() const { return static_cast<int>(stations_.size()); }
    const SimParams& params() const { return params_; }

    /// Replace a station's contention window (external policy). A pending
    /// residual larger than the new window is discarded and redrawn.
    void set_cw(int station_id, int cw);

    /// Observation hook: fired when a transmission attempt starts, with the
    /// ids of every station transmitting in that slot.
    std::function<void(std::int64_t start_us, const std::vector<int>& transmitters)>
        on_transmission;

    /// Test seam: pre-load backoff draws for one station; consumed before
    /// the RNG is consulted again.
    void force_backoff(int station_id, std::vector<int> draws);

  private:
    void begin_contention(std::int64_t origin_us);
    void join_contention(Station& s);
    void schedule_tx_event();
    void on_tx_event(std::uint64_t version);
    void start_exchange(std::vector<int> transmitters);
    void resolve_rts_stage(std::vector<int> transmitters, std::int64_t exchange_start_us);
    void resolve_data_end(std::vector<int> transmitters, std::int64_t exchange_start_us);
    void finish_success(int station_id, std::int64_t exchange_start_us, std::int64_t ack_end_us);
    void fail_frame(Station& s);
    void refill_if_saturating(Station& s, std::int64_t now_us);
    void handle_arrival(int station_id);
    void schedule_next_arrival(int station_id);
    int draw_backoff(Station& s);
    std::int64_t slot_base_for(std::int64_t t_us) const;

    SimParams params_;
    std::int64_t data_airtime_us_;
    SimClock clock_;
    Channel channel_;
    std::vector<Station> stations_;
    std::vector<RngStream> backoff_rng_;
    std::vector<RngStream> error_rng_;
    std::vector<std::optional<TrafficSource>> sources_;
    std::vector<std::deque<int>> forced_backoff_;

    bool in_contention_ = false;
    std::int64_t contention_origin_us_ = 0;
    std::uint64_t tx_event_version_ = 0;
    std::int64_t next_frame_id_ = 0;
};

}  // namespace fedcw::sim
