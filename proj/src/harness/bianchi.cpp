#include "fedcw/harness/bianchi.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fedcw/sim/simulator.hpp"

namespace fedcw::harness {

BianchiPoint analytic_fixed_cw(int n, int cw, const sim::MacTiming& timing, int payload_bytes) {
    if (n < 1) throw std::invalid_argument("analytic_fixed_cw: n must be >= 1");
    if (cw < 1) throw std::invalid_argument("analytic_fixed_cw: cw must be >= 1");
    timing.validate();

    BianchiPoint out;
    // With a fixed window the per-station chain is a uniform residual cycle:
    // mean backoff cw/2, so an attempt occurs every cw/2 + 1 slots.
    out.tau = 2.0 / (static_cast<double>(cw) + 2.0);
    out.p_collision = 1.0 - std::pow(1.0 - out.tau, n - 1);

    const double tau = out.tau;
    const double p_idle = std::pow(1.0 - tau, n);
    const double p_tr = 1.0 - p_idle;
    const double p_s = n * tau * std::pow(1.0 - tau, n - 1);
    const double p_c = p_tr - p_s;

    const auto t_payload = static_cast<double>(timing.data_airtime_us(payload_bytes));
    // A failed exchange occupies the medium exactly as long as a successful
    // one: data, the ack (or the silent timeout of the same length), difs.
    const double t_busy = t_payload + static_cast<double>(timing.sifs_us) +
                          static_cast<double>(timing.ack_us) +
                          static_cast<double>(timing.difs_us);
    const double sigma = static_cast<double>(timing.slot_us);

    out.throughput = (p_s * t_payload) / (p_idle * sigma + (p_s + p_c) * t_busy);
    return out;
}

BianchiComparison validate_fixed_cw(int n, int cw, double sim_time_s, std::uint64_t seed) {
    if (!(sim_time_s > 0.0)) throw std::invalid_argument("validate_fixed_cw: sim time");
    const auto t0 = std::chrono::steady_clock::now();

    sim::SimParams params;
    params.access = sim::AccessMode::kBasic;
    params.cw_policy = sim::CwPolicy::kExternal;
    params.saturate = true;
    params.error_model.p_min = 0.0;
    params.error_model.p_max = 0.0;
    params.payload_bytes = 1472;
    params.cw_min = 1;
    params.cw_max = cw;

    std::vector<sim::StationSetup> setups(static_cast<std::size_t>(n), sim::StationSetup{5.0, {}});
    sim::DcfSimulator engine(params, setups, seed);
    for (int i = 0; i < n; ++i) engine.set_cw(i, cw);
    engine.prime();
    const auto end_us = static_cast<std::int64_t>(std::llround(sim_time_s * 1e6));
    engine.run_until(end_us);

    BianchiComparison c;
    c.analytic = analytic_fixed_cw(n, cw, params.timing, params.payload_bytes);
    const auto& ch = engine.channel();
    c.attempts = ch.attempts_total;
    if (ch.attempts_total > 0)
        c.sim_p_collision =
            static_cast<double>(ch.attempts_collided) / static_cast<double>(ch.attempts_total);
    c.sim_throughput = static_cast<double>(ch.success_payload_us) / static_cast<double>(end_us);
    c.rel_err_p = c.analytic.p_collision > 0.0
                      ? std::abs(c.sim_p_collision - c.analytic.p_collision) / c.analytic.p_collision
                      : std::abs(c.sim_p_collision);
    c.rel_err_s = std::abs(c.sim_throughput - c.analytic.throughput) / c.analytic.throughput;

    c.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c;
}

std::string format_comparison(int n, int cw, const BianchiComparison& c) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "n=%d cw=%d attempts=%lld\n"
                  "  p_collision  analytic=%.6f  sim=%.6f  rel_err=%.4f\n"
                  "  throughput   analytic=%.6f  sim=%.6f  rel_err=%.4f\n"
                  "  wall=%.2fs\n",
                  n, cw, static_cast<long long>(c.attempts), c.analytic.p_collision,
                  c.sim_p_collision, c.rel_err_p, c.analytic.throughput, c.sim_throughput,
                  c.rel_err_s, c.wall_seconds);
    return buf;
}

}  // namespace fedcw::harness
