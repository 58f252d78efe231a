#include "fedcw/sim/traffic.hpp"

#include <cmath>
#include <stdexcept>

namespace fedcw::sim {

void TrafficSpec::validate() const {
    if (kind == Kind::kConstant) {
        if (rate_mbps < 0.0) throw std::invalid_argument("TrafficSpec: negative rate");
    } else {
        if (rate_min_mbps < 0.0 || rate_max_mbps < rate_min_mbps)
            throw std::invalid_argument("TrafficSpec: need 0 <= rate_min <= rate_max");
        if (redraw_period_us <= 0)
            throw std::invalid_argument("TrafficSpec: redraw period must be positive");
    }
}

TrafficSource::TrafficSource(TrafficSpec spec, int payload_bytes, std::uint64_t seed)
    : spec_(spec), payload_bits_(8.0 * payload_bytes), rng_(seed) {
    spec_.validate();
    if (payload_bytes <= 0) throw std::invalid_argument("TrafficSource: payload must be positive");
    if (spec_.kind == TrafficSpec::Kind::kConstant) {
        rate_at_anchor_ = rate_current_ = spec_.rate_mbps;
    } else {
        rate_at_anchor_ = rate_current_ = draw_rate();
    }
}

double TrafficSource::draw_rate() {
    return rng_.uniform(spec_.rate_min_mbps, spec_.rate_max_mbps);
}

std::optional<std::int64_t> TrafficSource::next_arrival_us() {
    for (;;) {
        if (spec_.kind == TrafficSpec::Kind::kConstant) {
            if (rate_at_anchor_ <= 0.0) return std::nullopt;
            anchor_us_ += payload_bits_ / rate_at_anchor_;
        } else if (rate_at_anchor_ > 0.0) {
            const double candidate = anchor_us_ + payload_bits_ / rate_at_anchor_;
            // Consume the redraws at every boundary crossed on the way, so the
            // rate stream stays a function of wall time alone.
            while (static_cast<double>(next_boundary_index_) *
                       static_cast<double>(spec_.redraw_period_us) <=
                   candidate) {
                rate_current_ = draw_rate();
                ++next_boundary_index_;
            }
            anchor_us_ = candidate;
            rate_at_anchor_ = rate_current_;
        } else {
            if (spec_.rate_max_mbps <= 0.0) return std::nullopt;  // redraws can never emit
            // Idle until the next boundary, then re-anchor with a fresh rate.
            const double boundary = static_cast<double>(next_boundary_index_) *
                                    static_cast<double>(spec_.redraw_period_us);
            rate_current_ = draw_rate();
            ++next_boundary_index_;
            anchor_us_ = boundary;
            rate_at_anchor_ = rate_current_;
            continue;
        }
        auto t = static_cast<std::int64_t>(std::floor(anchor_us_));
        if (t <= last_emitted_us_) t = last_emitted_us_ + 1;
        last_emitted_us_ = t;
        return t;
    }
}

std::vector<std::int64_t> generate_arrivals(TrafficSource& source, std::int64_t horizon_us) {
    std::vector<std::int64_t> out;
    for (;;) {
        auto t = source.next_arrival_us();
        if (!t || *t > horizon_us) break;
        out.push_back(*t);
    }
    return out;
}

}  // namespace fedcw::sim
