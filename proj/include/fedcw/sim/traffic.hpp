#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedcw/rng.hpp"

namespace fedcw::sim {

struct TrafficSpec {
    enum class Kind { kConstant, kRandomRate };

    Kind kind = Kind::kConstant;
    double rate_mbps = 10.0;      // constant kind
    double rate_min_mbps = 0.0;   // random kind
    double rate_max_mbps = 20.0;  // random kind
    std::int64_t redraw_period_us = 2'500'000;

    void validate() const;
};

/// Deterministic frame arrival generator.
///
/// Arrival spacing is tracked on a continuous accumulator so that rounding
/// to whole microseconds never drifts: arrival k of a constant 10 Mbps
/// source with 1472 B frames lands at floor(k * 1177.6) us.
///
/// For the random-rate kind the rate is redrawn at every redraw period
/// boundary, and each inter-arrival gap uses the rate that was in force at
/// the previous arrival. A random source with a degenerate [r, r] range
/// therefore produces exactly the same arrival times as a constant source
/// of rate r. While the rate is zero the source idles until the next
/// boundary and re-anchors there.
class TrafficSource {
  public:
    TrafficSource(TrafficSpec spec, int payload_bytes, std::uint64_t seed);

    /// Next arrival time in microseconds, strictly increasing; nullopt when
    /// the source can never emit again (constant rate zero).
    std::optional<std::int64_t> next_arrival_us();

    const TrafficSpec& spec() const { return spec_; }

  private:
    double draw_rate();

    TrafficSpec spec_;
    double payload_bits_;
    RngStream rng_;
    double anchor_us_ = 0.0;   // continuous time of the previous arrival
    double rate_at_anchor_;    // rate in force at the anchor
    double rate_current_;      // rate in force "now" (after consumed redraws)
    std::int64_t next_boundary_index_ = 1;
    std::int64_t last_emitted_us_ = -1;
};

/// Drain every arrival at or before horizon_us into a vector.
std::vector<std::int64_t> generate_arrivals(TrafficSource& source, std::int64_t horizon_us);

}  // namespace fedcw::sim
