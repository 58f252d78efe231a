#include "fedcw/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "fedcw/env.hpp"
#include "fedcw/fed.hpp"
#include "fedcw/harness/checkpoint.hpp"
#include "fedcw/rng.hpp"
#include "fedcw/sim/simulator.hpp"

namespace fedcw::harness {

namespace {

constexpr const char* kMetricsHeader =
    "run_id,mode,seed,window,station,plr,idle,cw,action,reward,mean_delay_us,throughput_mbps,"
    "frames_success,frames_lost\n";
constexpr const char* kRoundsHeader = "run_id,round,mode,skipped,participants,betas\n";

bool is_agent_mode(Mode m) { return m == Mode::kEfrl || m == Mode::kAfrl || m == Mode::kDrl; }

/// Mean PLR over the most recent ten windows.
class PlrRing {
  public:
    void push(double v) {
        if (count_ < 10) {
            vals_[count_++] = v;
        } else {
            vals_[next_] = v;
        }
        next_ = (next_ + 1) % 10;
    }
    double mean() const {
        if (count_ == 0) return 0.0;
        double s = 0.0;
        for (int i = 0; i < count_; ++i) s += vals_[i];
        return s / count_;
    }

  private:
    double vals_[10] = {};
    int count_ = 0;
    int next_ = 0;
};

void append_metrics_row(std::string& out, const std::string& run_id, const char* mode,
                        std::uint64_t seed, const env::MetricsRecord& r) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%d,%d,%.6f,%.6f,%d,%d,%.6f,%.3f,%.6f,%d,%d\n",
                  run_id.c_str(), mode, static_cast<unsigned long long>(seed), r.window_index,
                  r.station_id, r.plr, r.idle, r.cw, r.action, r.reward, r.mean_delay_us,
                  r.throughput_mbps, r.frames_success, r.frames_lost);
    out += buf;
}

template <typename T, typename F>
std::string join_semicolon(const std::vector<T>& v, F fmt_one) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += fmt_one(v[i]);
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw std::runtime_error("short write to '" + path.string() + "'");
}

}  // namespace

double delay_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size() - 1);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    if (cfg.rate_redraw_period_us < 0) cfg.rate_redraw_period_us = cfg.fl_period_us;
    if (cfg.traffic_rate_max_mbps < 0.0) cfg.traffic_rate_max_mbps = 2.0 * cfg.traffic_rate_mbps;
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const int n = cfg.n_stations;
    const bool agents_on = is_agent_mode(cfg.mode);
    const bool federated = cfg.mode == Mode::kEfrl || cfg.mode == Mode::kAfrl;
    const char* mode_str = to_string(cfg.mode);

    sim::SimParams params;
    params.timing = make_timing(cfg);
    params.error_model = make_error_model(cfg);
    params.access = cfg.mode == Mode::kRtsCts ? sim::AccessMode::kRtsCts : sim::AccessMode::kBasic;
    params.cw_policy = (cfg.mode == Mode::kBeb || cfg.mode == Mode::kRtsCts)
                           ? sim::CwPolicy::kBinaryExponential
                           : sim::CwPolicy::kExternal;
    params.payload_bytes = cfg.payload_bytes;
    params.retry_cap = cfg.retry_cap;
    params.cw_min = cfg.cw_min;
    params.cw_max = cfg.cw_max;
    params.saturate = cfg.saturate;

    std::vector<double> distances = cfg.distances_m;
    if (distances.empty()) {
        RngStream r(derive_seed(cfg.seed, "distance", 0));
        distances.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) distances.push_back(r.uniform(0.5, 30.0));
    }

    std::vector<sim::StationSetup> setups(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& su = setups[static_cast<std::size_t>(i)];
        su.distance_m = distances[static_cast<std::size_t>(i)];
        if (cfg.saturate) continue;
        sim::TrafficSpec spec;
        if (cfg.scenario == Scenario::kDynamic && i >= cfg.n_fixed_traffic) {
            spec.kind = sim::TrafficSpec::Kind::kRandomRate;
            spec.rate_min_mbps = cfg.traffic_rate_min_mbps;
            spec.rate_max_mbps = cfg.traffic_rate_max_mbps;
            spec.redraw_period_us = cfg.rate_redraw_period_us;
        } else {
            spec.kind = sim::TrafficSpec::Kind::kConstant;
            spec.rate_mbps = cfg.traffic_rate_mbps;
        }
        su.traffic = spec;
    }

    sim::DcfSimulator engine(params, setups, cfg.seed);

    std::vector<std::unique_ptr<rl::DdpgAgent>> agents;
    std::vector<env::StateVector> prev_state(static_cast<std::size_t>(n));
    std::vector<double> prev_u(static_cast<std::size_t>(n), 0.0);
    std::vector<bool> have_prev(static_cast<std::size_t>(n), false);
    std::vector<int> action_in_effect(static_cast<std::size_t>(n), -1);
    std::vector<std::int64_t> sample_count(static_cast<std::size_t>(n), 0);
    std::vector<PlrRing> plr_hist(static_cast<std::size_t>(n));

    if (agents_on) {
        const env::StateVector boot{0.0, 1.0};
        for (int i = 0; i < n; ++i) {
            agents.push_back(std::make_unique<rl::DdpgAgent>(
                cfg.hyper, derive_seed(cfg.seed, "agent-init", static_cast<std::uint64_t>(i)),
                derive_seed(cfg.seed, "agent-noise", static_cast<std::uint64_t>(i)),
                derive_seed(cfg.seed, "agent-sample", static_cast<std::uint64_t>(i))));
            const auto choice = agents.back()->select_action(boot, true);
            action_in_effect[static_cast<std::size_t>(i)] = choice.a_discrete;
            engine.set_cw(i, env::map_action_to_cw(choice.a_discrete));
        }
    } else if (cfg.mode == Mode::kFixed) {
        for (int i = 0; i < n; ++i) engine.set_cw(i, cfg.fixed_cw);
    }

    fed::SelectionConfig sel;
    sel.w1 = cfg.w1;
    sel.w2 = cfg.w2;
    sel.d_max = cfg.fed_d_max;
    sel.min_samples = cfg.min_samples;
    sel.top_k = cfg.mode == Mode::kAfrl ? fed::SelectionConfig::kAllPassing : cfg.resolved_top_k();
    fed::AggregationConfig agg;
    agg.lambda = cfg.lambda;
    agg.normalize = cfg.normalize_betas;
    agg.mode = cfg.mode == Mode::kAfrl ? fed::AggregationMode::kAverage
                                       : fed::AggregationMode::kExponential;

    ExperimentResult result;
    result.run_id = cfg.run_id();
    result.metrics_csv = kMetricsHeader;
    result.rounds_csv = kRoundsHeader;

    const env::RewardSpec reward_spec{cfg.delay_limit_us};
    const int windows = cfg.windows();
    const int wpr = cfg.windows_per_round();
    const auto warmup_windows =
        static_cast<int>(std::floor(cfg.warmup_frac * static_cast<double>(windows)));
    std::vector<WindowGlobal> window_globals;
    window_globals.reserve(static_cast<std::size_t>(windows));
    std::vector<double> global_delays;

    engine.prime();

    for (int w = 0; w < windows; ++w) {
        const std::int64_t w_start = static_cast<std::int64_t>(w) * cfg.step_us;
        const std::int64_t w_end = w_start + cfg.step_us;
        engine.clock().schedule(w_end, [] {});  // pin the clock to the boundary
        engine.run_until(w_end);

        const std::int64_t busy = engine.channel().take_window_busy_us(w_start, w_end);

        int g_tx = 0, g_ack = 0, g_lost = 0;
        global_delays.clear();

        for (int i = 0; i < n; ++i) {
            auto& st = engine.station(i);
            const int lost = st.window.frames_lost;
            env::ObservationWindow win;
            win.duration_us = cfg.step_us;
            win.n_tx = st.window.n_tx;
            win.n_ack = st.window.n_ack;
            win.busy_us = busy;
            win.completed_frame_delays_us = std::move(st.window.completed_delays_us);
            st.window.clear();

            g_tx += win.n_tx;
            g_ack += win.n_ack;
            g_lost += lost;
            global_delays.insert(global_delays.end(), win.completed_frame_delays_us.begin(),
                                 win.completed_frame_delays_us.end());

            const int act = agents_on ? action_in_effect[static_cast<std::size_t>(i)] : -1;
            const auto rec = env::make_record(w, i, win, st.cw_current, act, lost,
                                              cfg.payload_bytes, reward_spec);
            append_metrics_row(result.metrics_csv, result.run_id, mode_str, cfg.seed, rec);
            plr_hist[static_cast<std::size_t>(i)].push(rec.plr);

            if (agents_on) {
                auto& agent = *agents[static_cast<std::size_t>(i)];
                const env::StateVector s_now{rec.plr, rec.idle};
                if (have_prev[static_cast<std::size_t>(i)] && !rec.flagged) {
                    agent.observe(rl::Transition{prev_state[static_cast<std::size_t>(i)],
                                                 prev_u[static_cast<std::size_t>(i)], rec.reward,
                                                 s_now});
                    ++sample_count[static_cast<std::size_t>(i)];
                }
                agent.train_step();
                const auto choice = agent.select_action(s_now, true);
                prev_state[static_cast<std::size_t>(i)] = s_now;
                prev_u[static_cast<std::size_t>(i)] = choice.u;
                have_prev[static_cast<std::size_t>(i)] = true;
                action_in_effect[static_cast<std::size_t>(i)] = choice.a_discrete;
                engine.set_cw(i, env::map_action_to_cw(choice.a_discrete));
            }
        }

        env::ObservationWindow gwin;
        gwin.duration_us = cfg.step_us;
        gwin.n_tx = g_tx;
        gwin.n_ack = g_ack;
        gwin.busy_us = busy;
        gwin.completed_frame_delays_us = std::move(global_delays);
        const auto grec = env::make_record(w, env::MetricsRecord::kGlobalStation, gwin, -1, -1,
                                           g_lost, cfg.payload_bytes, reward_spec);
        global_delays = std::move(gwin.completed_frame_delays_us);  // reuse capacity
        append_metrics_row(result.metrics_csv, result.run_id, mode_str, cfg.seed, grec);

        window_globals.push_back(WindowGlobal{w, grec.mean_delay_us, grec.throughput_mbps,
                                              grec.frames_success, grec.frames_lost});
        if (w >= warmup_windows && grec.frames_success > 0)
            result.window_delay_means_us.push_back(grec.mean_delay_us);

        if ((w + 1) % wpr == 0 && agents_on) {
            const int round = (w + 1) / wpr;
            if (federated) {
                std::vector<fed::ClientReport> reports;
                reports.reserve(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) {
                    auto snap = agents[static_cast<std::size_t>(i)]->export_weights();
                    fed::ClientReport rep;
                    rep.station_id = i;
                    rep.actor_flat = std::move(snap.actor_flat);
                    rep.critic_flat = std::move(snap.critic_flat);
                    rep.layout_id = snap.layout_id;
                    rep.sample_count = sample_count[static_cast<std::size_t>(i)];
                    rep.distance_m = distances[static_cast<std::size_t>(i)];
                    rep.plr_mean10 = plr_hist[static_cast<std::size_t>(i)].mean();
                    reports.push_back(std::move(rep));
                }
                const auto outcome = fed::run_round(reports, sel, agg);

                char head[160];
                std::snprintf(head, sizeof(head), "%s,%d,%s,%d,", result.run_id.c_str(), round,
                              mode_str, outcome.skipped ? 1 : 0);
                result.rounds_csv += head;
                result.rounds_csv += join_semicolon(
                    outcome.participants, [](int id) { return std::to_string(id); });
                result.rounds_csv += ',';
                result.rounds_csv += join_semicolon(outcome.betas, [](double b) {
                    char bb[32];
                    std::snprintf(bb, sizeof(bb), "%.6f", b);
                    return std::string(bb);
                });
                result.rounds_csv += '\n';
                ++result.rounds;

                if (cfg.capture_round_probes) {
                    RoundProbe probe;
                    probe.round = round;
                    probe.skipped = outcome.skipped;
                    for (const auto& rep : reports)
                        probe.clients.push_back(RoundProbe::Client{
                            rep.station_id, rep.sample_count, rep.distance_m, rep.plr_mean10});
                    probe.participants = outcome.participants;
                    probe.betas = outcome.betas;
                    result.probes.push_back(std::move(probe));
                }

                if (!outcome.skipped) {
                    rl::WeightSnapshot global;
                    global.actor_flat = outcome.global_actor;
                    global.critic_flat = outcome.global_critic;
                    global.layout_id = agents.front()->layout_id();
                    for (int id : outcome.participants)
                        agents[static_cast<std::size_t>(id)]->import_weights(global);
                }
            }
            for (int i = 0; i < n; ++i) {
                sample_count[static_cast<std::size_t>(i)] = 0;
                agents[static_cast<std::size_t>(i)]->decay_noise();
            }
        }
    }

    result.windows = windows;
    for (int i = 0; i < n; ++i) {
        const auto& st = engine.station(i);
        result.frames_enqueued += st.enqueued_total;
        result.frames_acked += st.acked_total;
        result.frames_dropped += st.dropped_total;
        result.frames_queued_end += static_cast<std::int64_t>(st.queue.size());
    }
    const auto& ch = engine.channel();
    result.successes_total = ch.successes_total;
    result.success_airtime_us = ch.success_airtime_us;
    result.lifetime_busy_us = ch.lifetime_busy_us;
    result.collision_busy_us = ch.collision_busy_us;

    result.summary = summarize_windows(result.run_id, mode_str, window_globals, cfg.warmup_frac);
    result.summary_json = summary_to_json(result.summary);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!cfg.out_dir.empty()) {
        const std::filesystem::path dir(cfg.out_dir);
        std::filesystem::create_directories(dir);
        write_text_file(dir / (result.run_id + "-metrics.csv"), result.metrics_csv);
        write_text_file(dir / (result.run_id + "-rounds.csv"), result.rounds_csv);
        write_text_file(dir / (result.run_id + "-summary.json"), result.summary_json);
        if (cfg.dump_weights && agents_on) {
            for (int i = 0; i < n; ++i) {
                write_checkpoint((dir / (result.run_id + "-weights-sta" + std::to_string(i) +
                                         ".bin")).string(),
                                 agents[static_cast<std::size_t>(i)]->export_weights());
            }
        }
    }
    return result;
}

}  // namespace fedcw::harness
