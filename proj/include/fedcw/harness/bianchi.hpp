#pragma once

#include <cstdint>
#include <string>

#include "fedcw/sim/timing.hpp"

namespace fedcw::harness {

/// Saturation predictions for n stations contending with a fixed window
/// (no exponential backoff, no channel errors, basic access).
struct BianchiPoint {
    double tau = 0.0;           // per-slot attempt probability, 2/(cw+2)
    double p_collision = 0.0;   // conditional collision probability
    double throughput = 0.0;    // normalized payload airtime share
};

BianchiPoint analytic_fixed_cw(int n, int cw, const sim::MacTiming& timing, int payload_bytes);

struct BianchiComparison {
    BianchiPoint analytic;
    double sim_p_collision = 0.0;
    double sim_throughput = 0.0;
    double rel_err_p = 0.0;
    double rel_err_s = 0.0;
    std::int64_t attempts = 0;
    double wall_seconds = 0.0;
};

/// Run the saturated simulator against the closed form.
BianchiComparison validate_fixed_cw(int n, int cw, double sim_time_s, std::uint64_t seed);

std::string format_comparison(int n, int cw, const BianchiComparison& c);

}  // namespace fedcw::harness
