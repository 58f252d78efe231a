#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedcw/ddpg.hpp"
#include "fedcw/sim/channel_model.hpp"
#include "fedcw/sim/timing.hpp"

namespace fedcw::harness {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Mode { kEfrl, kAfrl, kDrl, kBeb, kRtsCts, kFixed };
enum class Scenario { kStatic, kDynamic };

const char* to_string(Mode m);
const char* to_string(Scenario s);
Mode parse_mode(const std::string& s);
Scenario parse_scenario(const std::string& s);

/// Fully resolved run description. Times are integral microseconds; the
/// window step must divide both the aggregation period and the run length.
struct ExperimentConfig {
    Scenario scenario = Scenario::kStatic;
    Mode mode = Mode::kEfrl;
    std::uint64_t seed = 1;
    int n_stations = 0;

    std::int64_t sim_time_us = 20'000'000;
    std::int64_t step_us = 20'000;
    std::int64_t fl_period_us = 2'500'000;

    // traffic
    double traffic_rate_mbps = 10.0;
    int n_fixed_traffic = -1;   // dynamic scenario only
    int n_random_traffic = -1;  // dynamic scenario only
    double traffic_rate_min_mbps = 0.0;
    double traffic_rate_max_mbps = -1.0;  // resolved to 2*traffic_rate_mbps
    std::int64_t rate_redraw_period_us = -1;  // resolved to fl_period_us
    bool saturate = false;

    // geometry and channel
    std::vector<double> distances_m;  // empty: drawn uniformly in [0.5, 30]
    double p_err_min = 0.01;
    double p_err_max = 0.15;
    double p_err_shape = 2.0;

    // MAC
    int payload_bytes = 1472;
    double data_rate_mbps = 120.0;
    int retry_cap = 7;
    int cw_min = 15;
    int cw_max = 1023;
    int fixed_cw = 15;  // kFixed mode

    // reward
    double delay_limit_us = 20'000.0;

    // learner
    rl::DdpgHyper hyper{};

    // federation
    double w1 = 0.5;
    double w2 = 0.5;
    double fed_d_max = 30.0;
    std::int64_t min_samples = 64;
    int top_k = -2;  // -2 auto (ceil(n/2)), -1 all passing, else explicit
    double lambda = 1.0;
    bool normalize_betas = true;

    // output
    double warmup_frac = 0.25;
    std::string out_dir;
    bool dump_weights = false;

    // not file keys; set programmatically
    bool capture_round_probes = false;

    int windows() const { return static_cast<int>(sim_time_us / step_us); }
    int windows_per_round() const { return static_cast<int>(fl_period_us / step_us); }
    int resolved_top_k() const;
    std::string run_id() const;

    /// Cross-field checks; throws ConfigError. Called by the parser and again
    /// by run_experiment so programmatic configs get the same scrutiny.
    void validate() const;
};

/// Parse the flat key=value format ('#' comments, blank lines ignored).
/// Unknown and duplicate keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// CLI-level overrides applied after parsing.
void apply_overrides(ExperimentConfig& cfg, const std::optional<std::uint64_t>& seed,
                     const std::optional<std::string>& mode, const std::optional<std::string>& out_dir);

sim::MacTiming make_timing(const ExperimentConfig& cfg);
sim::ChannelErrorModel make_error_model(const ExperimentConfig& cfg);

}  // namespace fedcw::harness
