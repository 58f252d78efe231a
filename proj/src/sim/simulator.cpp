#include "fedcw/sim/simulator.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fedcw::sim {

void Channel::add_busy(std::int64_t start_us, std::int64_t end_us) {
    if (start_us < busy_until_ || end_us <= start_us)
        throw std::logic_error("Channel: overlapping or empty busy interval");
    intervals_.emplace_back(start_us, end_us);
    busy_until_ = end_us;
}

std::int64_t Channel::take_window_busy_us(std::int64_t w_start_us, std::int64_t w_end_us) {
    if (w_end_us <= w_start_us) throw std::logic_error("Channel: empty window");
    std::int64_t busy = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> keep;
    for (const auto& [a, b] : intervals_) {
        const std::int64_t lo = std::max(a, w_start_us);
        const std::int64_t hi = std::min(b, w_end_us);
        if (hi > lo) busy += hi - lo;
        if (b > w_end_us) keep.emplace_back(std::max(a, w_end_us), b);
    }
    intervals_ = std::move(keep);
    return busy;
}

DcfSimulator::DcfSimulator(SimParams params, std::vector<StationSetup> setups,
                           std::uint64_t master_seed)
    : params_(params), data_airtime_us_(params.timing.data_airtime_us(params.payload_bytes)) {
    params_.timing.validate();
    params_.error_model.validate();
    if (setups.empty()) throw std::invalid_argument("DcfSimulator: no stations");
    if (params_.retry_cap < 0) throw std::invalid_argument("DcfSimulator: negative retry cap");
    if (params_.cw_min < 1 || params_.cw_max < params_.cw_min)
        throw std::invalid_argument("DcfSimulator: bad cw bounds");

    const int n = static_cast<int>(setups.size());
    stations_.resize(static_cast<std::size_t>(n));
    forced_backoff_.resize(static_cast<std::size_t>(n));
    backoff_rng_.reserve(static_cast<std::size_t>(n));
    error_rng_.reserve(static_cast<std::size_t>(n));
    sources_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& s = stations_[static_cast<std::size_t>(i)];
        s.id = i;
        s.distance_m = setups[static_cast<std::size_t>(i)].distance_m;
        s.cw_current = params_.cw_min;
        params_.error_model.frame_error_prob(s.distance_m);  // range check up front
        backoff_rng_.emplace_back(derive_seed(master_seed, "backoff", static_cast<std::uint64_t>(i)));
        error_rng_.emplace_back(derive_seed(master_seed, "chanerr", static_cast<std::uint64_t>(i)));
        if (!params_.saturate && setups[static_cast<std::size_t>(i)].traffic) {
            sources_[static_cast<std::size_t>(i)].emplace(
                *setups[static_cast<std::size_t>(i)].traffic, params_.payload_bytes,
                derive_seed(master_seed, "traffic", static_cast<std::uint64_t>(i)));
        }
    }
}

void DcfSimulator::prime() {
    for (auto& s : stations_) {
        if (params_.saturate) {
            refill_if_saturating(s, 0);
        } else {
            schedule_next_arrival(s.id);
        }
    }
    begin_contention(params_.timing.difs_us);
}

void DcfSimulator::run_until(std::int64_t end_us) {
    while (auto t = clock_.next_time()) {
        if (*t > end_us) break;
        clock_.dispatch_next();
    }
}

void DcfSimulator::set_cw(int station_id, int cw) {
    if (cw < 1) throw std::invalid_argument("set_cw: window must be at least 1");
    auto& s = station(station_id);
    s.cw_current = cw;
    if (s.backoff_slots > cw) {
        // The pending draw is no longer representable; discard and redraw.
        s.backoff_slots = -1;
        if (s.tx_slot >= 0) {
            s.tx_slot = -1;
            join_contention(s);
            schedule_tx_event();
        }
    }
}

void DcfSimulator::force_backoff(int station_id, std::vector<int> draws) {
    auto& q = forced_backoff_.at(static_cast<std::size_t>(station_id));
    q.insert(q.end(), draws.begin(), draws.end());
}

std::int64_t DcfSimulator::slot_base_for(std::int64_t t_us) const {
    if (t_us <= contention_origin_us_) return 0;
    const std::int64_t d = t_us - contention_origin_us_;
    return (d + params_.timing.slot_us - 1) / params_.timing.slot_us;
}

int DcfSimulator::draw_backoff(Station& s) {
    auto& forced = forced_backoff_[static_cast<std::size_t>(s.id)];
    if (!forced.empty()) {
        const int v = forced.front();
        forced.pop_front();
        if (v < 0 || v > s.cw_current)
            throw std::logic_error("forced backoff " + std::to_string(v) + " outside [0, " +
                                   std::to_string(s.cw_current) + "]");
        return v;
    }
    return static_cast<int>(
        backoff_rng_[static_cast<std::size_t>(s.id)].below(static_cast<std::uint64_t>(s.cw_current) + 1));
}

void DcfSimulator::begin_contention(std::int64_t origin_us) {
    in_contention_ = true;
    contention_origin_us_ = origin_us;
    for (auto& s : stations_) {
        s.tx_slot = -1;
        if (s.backlogged()) join_contention(s);
    }
    schedule_tx_event();
}

void DcfSimulator::join_contention(Station& s) {
    if (!in_contention_ || s.tx_slot >= 0 || !s.backlogged()) return;
    if (s.backoff_slots < 0) s.backoff_slots = draw_backoff(s);
    s.tx_slot = slot_base_for(clock_.now()) + s.backoff_slots;
}

void DcfSimulator::schedule_tx_event() {
    if (!in_contention_) return;
    std::int64_t min_slot = -1;
    for (const auto& s : stations_) {
        if (s.tx_slot >= 0 && (min_slot < 0 || s.tx_slot < min_slot)) min_slot = s.tx_slot;
    }
    if (min_slot < 0) return;
    const std::int64_t at = contention_origin_us_ + min_slot * params_.timing.slot_us;
    const std::uint64_t version = ++tx_event_version_;
    clock_.schedule(at, [this, version] { on_tx_event(version); });
}

void DcfSimulator::on_tx_event(std::uint64_t version) {
    if (!in_contention_ || version != tx_event_version_) return;
    std::int64_t min_slot = -1;
    for (const auto& s : stations_) {
        if (s.tx_slot >= 0 && (min_slot < 0 || s.tx_slot < min_slot)) min_slot = s.tx_slot;
    }
    if (min_slot < 0) return;

    std::vector<int> transmitters;
    for (auto& s : stations_) {
        if (s.tx_slot < 0) continue;
        if (s.tx_slot == min_slot) {
            transmitters.push_back(s.id);
            s.backoff_slots = -1;  // draw consumed
        } else {
            s.backoff_slots = static_cast<int>(s.tx_slot - min_slot);  // freeze leftover
        }
        s.tx_slot = -1;
    }
    in_contention_ = false;
    start_exchange(std::move(transmitters));
}

void DcfSimulator::start_exchange(std::vector<int> transmitters) {
    const std::int64_t now = clock_.now();
    const auto& t = params_.timing;
    for (int id : transmitters) {
        auto& s = station(id);
        auto& f = s.queue.front();
        if (f.first_tx_us < 0) f.first_tx_us = now;
    }
    if (on_transmission) on_transmission(now, transmitters);

    if (params_.access == AccessMode::kBasic) {
        const std::int64_t data_end = now + data_airtime_us_;
        channel_.add_busy(now, data_end);
        channel_.lifetime_busy_us += data_airtime_us_;
        clock_.schedule(data_end, [this, tx = std::move(transmitters), now]() mutable {
            resolve_data_end(std::move(tx), now);
        });
    } else {
        const std::int64_t rts_end = now + t.rts_us;
        channel_.add_busy(now, rts_end);
        channel_.lifetime_busy_us += t.rts_us;
        clock_.schedule(rts_end, [this, tx = std::move(transmitters), now]() mutable {
            resolve_rts_stage(std::move(tx), now);
        });
    }
}

void DcfSimulator::resolve_rts_stage(std::vector<int> transmitters, std::int64_t exchange_start_us) {
    const std::int64_t rts_end = clock_.now();
    const auto& t = params_.timing;
    if (transmitters.size() >= 2) {
        channel_.attempts_collided += static_cast<std::int64_t>(transmitters.size());
        channel_.collision_busy_us += t.rts_us;
        for (int id : transmitters) fail_frame(station(id));
        // Colliders' peers time out waiting for a CTS that never comes.
        const std::int64_t resume = rts_end + t.sifs_us + t.cts_us + t.difs_us;
        clock_.schedule(resume, [this] { begin_contention(clock_.now()); });
        return;
    }
    const std::int64_t cts_start = rts_end + t.sifs_us;
    const std::int64_t cts_end = cts_start + t.cts_us;
    channel_.add_busy(cts_start, cts_end);
    channel_.lifetime_busy_us += t.cts_us;
    const std::int64_t data_start = cts_end + t.sifs_us;
    const std::int64_t data_end = data_start + data_airtime_us_;
    clock_.schedule(data_start, [this, data_end] {
        channel_.add_busy(clock_.now(), data_end);
        channel_.lifetime_busy_us += data_airtime_us_;
    });
    clock_.schedule(data_end, [this, tx = std::move(transmitters), exchange_start_us]() mutable {
        resolve_data_end(std::move(tx), exchange_start_us);
    });
}

void DcfSimulator::resolve_data_end(std::vector<int> transmitters, std::int64_t exchange_start_us) {
    const std::int64_t data_end = clock_.now();
    const auto& t = params_.timing;
    if (transmitters.size() >= 2) {
        channel_.attempts_collided += static_cast<std::int64_t>(transmitters.size());
        channel_.collision_busy_us += data_airtime_us_;
        for (int id : transmitters) fail_frame(station(id));
        const std::int64_t resume = data_end + t.ack_timeout_us + t.difs_us;
        clock_.schedule(resume, [this] { begin_contention(clock_.now()); });
        return;
    }

    const int id = transmitters.front();
    auto& s = station(id);
    const double p = params_.error_model.frame_error_prob(s.distance_m);
    const bool corrupted = error_rng_[static_cast<std::size_t>(id)].uniform01() < p;
    if (corrupted) {
        fail_frame(s);
        const std::int64_t resume = data_end + t.ack_timeout_us + t.difs_us;
        clock_.schedule(resume, [this] { begin_contention(clock_.now()); });
        return;
    }

    const std::int64_t ack_start = data_end + t.sifs_us;
    const std::int64_t ack_end = ack_start + t.ack_us;
    channel_.add_busy(ack_start, ack_end);
    channel_.lifetime_busy_us += t.ack_us;
    clock_.schedule(ack_end, [this, id, exchange_start_us] {
        finish_success(id, exchange_start_us, clock_.now());
    });
}

void DcfSimulator::finish_success(int station_id, std::int64_t exchange_start_us,
                                  std::int64_t ack_end_us) {
    auto& s = station(station_id);
    auto& f = s.queue.front();
    // Attempts are attributed to the window where they resolve, so a window
    // can never see an ack without its transmission.
    ++channel_.attempts_total;
    ++s.window.n_tx;
    ++s.window.n_ack;
    s.window.completed_delays_us.push_back(static_cast<double>(ack_end_us - f.enqueue_us));
    ++s.acked_total;
    s.queue.pop_front();
    if (params_.cw_policy == CwPolicy::kBinaryExponential) s.cw_current = params_.cw_min;

    ++channel_.successes_total;
    channel_.success_airtime_us += ack_end_us - exchange_start_us;
    channel_.success_payload_us += data_airtime_us_;

    refill_if_saturating(s, ack_end_us);
    clock_.schedule(ack_end_us + params_.timing.difs_us, [this] { begin_contention(clock_.now()); });
}

void DcfSimulator::fail_frame(Station& s) {
    auto& f = s.queue.front();
    ++channel_.attempts_total;
    ++s.window.n_tx;
    ++f.retry_count;
    if (params_.cw_policy == CwPolicy::kBinaryExponential) {
        s.cw_current = std::min(2 * (s.cw_current + 1) - 1, params_.cw_max);
    }
    s.backoff_slots = -1;
    if (f.retry_count > params_.retry_cap) {
        ++s.window.frames_lost;
        ++s.dropped_total;
        s.queue.pop_front();
        if (params_.cw_policy == CwPolicy::kBinaryExponential) s.cw_current = params_.cw_min;
        refill_if_saturating(s, clock_.now());
    }
}

void DcfSimulator::refill_if_saturating(Station& s, std::int64_t now_us) {
    if (!params_.saturate) return;
    while (s.queue.empty()) {
        s.queue.push_back(Frame{next_frame_id_++, params_.payload_bytes, now_us, -1, 0});
        ++s.enqueued_total;
    }
}

void DcfSimulator::handle_arrival(int station_id) {
    auto& s = station(station_id);
    s.queue.push_back(Frame{next_frame_id_++, params_.payload_bytes, clock_.now(), -1, 0});
    ++s.enqueued_total;
    if (in_contention_ && s.tx_slot < 0) {
        join_contention(s);
        schedule_tx_event();
    }
    schedule_next_arrival(station_id);
}

void DcfSimulator::schedule_next_arrival(int station_id) {
    auto& src = sources_[static_cast<std::size_t>(station_id)];
    if (!src) return;
    const auto t = src->next_arrival_us();
    if (!t) return;
    clock_.schedule(std::max(*t, clock_.now()), [this, station_id] { handle_arrival(station_id); });
}

}  // namespace fedcw::sim
