#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fedcw/fed.hpp"
#include "fedcw/harness/checkpoint.hpp"
#include "fedcw/harness/config.hpp"
#include "fedcw/harness/experiment.hpp"
#include "fedcw/harness/summary.hpp"

using namespace fedcw;
using namespace fedcw::harness;

namespace {

const char* kGoldenConfig =
    "scenario = static\n"
    "mode = beb\n"
    "seed = 7\n"
    "n_stations = 2\n"
    "sim_time_s = 0.2\n"
    "step_ms = 50\n"
    "fl_period_s = 0.2\n"
    "traffic_rate_mbps = 2\n"
    "distances = 5,10\n";

// Frozen output of the config above. Any diff here means the simulation,
// the window accounting, or the CSV formatting changed behaviour.
const char* kGoldenMetrics =
    "run_id,mode,seed,window,station,plr,idle,cw,action,reward,mean_delay_us,throughput_mbps,"
    "frames_success,frames_lost\n"
    "beb-static-n2-s7,beb,7,0,0,0.200000,0.955400,15,-1,0.983500,330.000,1.884160,8,0\n"
    "beb-static-n2-s7,beb,7,0,1,0.200000,0.955400,15,-1,0.977669,446.625,1.884160,8,0\n"
    "beb-static-n2-s7,beb,7,0,-1,0.200000,0.955400,-1,-1,0.980584,388.312,3.768320,16,0\n"
    "beb-static-n2-s7,beb,7,1,0,0.000000,0.957380,15,-1,0.986269,274.625,1.884160,8,0\n"
    "beb-static-n2-s7,beb,7,1,1,0.111111,0.957380,15,-1,0.982387,352.250,1.884160,8,0\n"
    "beb-static-n2-s7,beb,7,1,-1,0.058824,0.957380,-1,-1,0.984328,313.438,3.768320,16,0\n"
    "beb-static-n2-s7,beb,7,2,0,0.181818,0.950320,15,-1,0.983317,333.667,2.119680,9,0\n"
    "beb-static-n2-s7,beb,7,2,1,0.181818,0.950320,15,-1,0.980517,389.667,2.119680,9,0\n"
    "beb-static-n2-s7,beb,7,2,-1,0.181818,0.950320,-1,-1,0.981917,361.667,4.239360,18,0\n"
    "beb-static-n2-s7,beb,7,3,0,0.000000,0.957380,15,-1,0.983225,335.500,1.884160,8,0\n"
    "beb-static-n2-s7,beb,7,3,1,0.111111,0.957380,15,-1,0.982006,359.875,1.884160,8,0\n"
    "beb-static-n2-s7,beb,7,3,-1,0.058824,0.957380,-1,-1,0.982616,347.688,3.768320,16,0\n";

const char* kGoldenSummaryJson =
    "{\n"
    "  \"run_id\": \"beb-static-n2-s7\",\n"
    "  \"mode\": \"beb\",\n"
    "  \"windows_total\": 4,\n"
    "  \"windows_used\": 3,\n"
    "  \"mean_delay_us\": 341.760000,\n"
    "  \"p50_delay_us\": 347.687500,\n"
    "  \"p95_delay_us\": 361.666667,\n"
    "  \"mean_throughput_mbps\": 3.925333,\n"
    "  \"frames_success\": 50,\n"
    "  \"frames_lost\": 0\n"
    "}\n";

ExperimentConfig cheap_agent_config(Mode mode) {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::kStatic;
    cfg.mode = mode;
    cfg.seed = 3;
    cfg.n_stations = 3;
    cfg.sim_time_us = 1'000'000;
    cfg.step_us = 50'000;
    cfg.fl_period_us = 250'000;
    cfg.traffic_rate_mbps = 5.0;
    cfg.distances_m = {5.0, 15.0, 25.0};
    cfg.hyper.hidden = {8, 8};
    cfg.hyper.batch = 4;
    cfg.hyper.buffer_capacity = 64;
    cfg.min_samples = 4;
    return cfg;
}

}  // namespace

TEST_CASE("config text: defaults, derived values, comments") {
    const auto cfg = parse_config_text(
        "# minimal run\n"
        "n_stations = 10\n"
        "\n"
        "traffic_rate_mbps = 10\n");
    CHECK(cfg.scenario == Scenario::kStatic);
    CHECK(cfg.mode == Mode::kEfrl);
    CHECK(cfg.seed == 1);
    CHECK(cfg.sim_time_us == 20'000'000);
    CHECK(cfg.step_us == 20'000);
    CHECK(cfg.fl_period_us == 2'500'000);
    CHECK(cfg.windows() == 1000);
    CHECK(cfg.windows_per_round() == 125);
    CHECK(cfg.resolved_top_k() == 5);  // auto: ceil(10 / 2)
    CHECK(cfg.run_id() == "efrl-static-n10-s1");
    CHECK(cfg.hyper.hidden == std::vector<int>{64, 64});
    CHECK(cfg.delay_limit_us == 20'000.0);
    CHECK(cfg.warmup_frac == 0.25);
}

TEST_CASE("config text: explicit keys and list parsing") {
    const auto cfg = parse_config_text(
        "scenario = dynamic\n"
        "mode = afrl\n"
        "seed = 42\n"
        "n_stations = 8\n"
        "n_fixed_traffic = 3\n"
        "n_random_traffic = 5\n"
        "traffic_rate_min_mbps = 0\n"
        "traffic_rate_max_mbps = 4\n"
        "sim_time_s = 10\n"
        "step_ms = 25\n"
        "fl_period_s = 1\n"
        "hidden = 32,16\n"
        "batch_size = 16\n"
        "min_samples = 20\n"
        "top_k = all\n"
        "lambda = 2.5\n"
        "distances = 1,2,3,4,5,6,7,8\n");
    CHECK(cfg.scenario == Scenario::kDynamic);
    CHECK(cfg.mode == Mode::kAfrl);
    CHECK(cfg.seed == 42);
    CHECK(cfg.step_us == 25'000);
    CHECK(cfg.hyper.hidden == std::vector<int>{32, 16});
    CHECK(cfg.hyper.batch == 16);
    CHECK(cfg.min_samples == 20);
    CHECK(cfg.top_k == fed::SelectionConfig::kAllPassing);
    CHECK(cfg.resolved_top_k() == fed::SelectionConfig::kAllPassing);
    CHECK(cfg.lambda == 2.5);
    CHECK(cfg.distances_m.size() == 8);
    CHECK(cfg.run_id() == "afrl-dynamic-n8-s42");
}

TEST_CASE("config text: rejected inputs") {
    const std::string base = "n_stations = 10\n";
    CHECK_THROWS_AS(parse_config_text(""), ConfigError);  // n_stations required
    CHECK_THROWS_AS(parse_config_text(base + "nonsense_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(base + "seed = 1\nseed = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(base + "just a line\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(base + "mode = turbo\n"), ConfigError);
    // Aggregation period must be a whole number of windows.
    CHECK_THROWS_AS(parse_config_text(base + "fl_period_s = 2.49\n"), ConfigError);
    // Run length must be a whole number of windows.
    CHECK_THROWS_AS(parse_config_text(base + "sim_time_s = 20.01\n"), ConfigError);
    // Dynamic split must cover every station.
    CHECK_THROWS_AS(parse_config_text("scenario = dynamic\nn_stations = 10\n"
                                      "n_fixed_traffic = 3\nn_random_traffic = 5\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text(base + "w1 = 0.6\nw2 = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(base + "top_k = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(base + "warmup_frac = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(base + "fixed_cw = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(base + "min_samples = 32\n"), ConfigError);  // < batch
    CHECK_THROWS_AS(parse_config_text(base + "distances = 1,2,3\n"), ConfigError);  // wrong count
    CHECK_THROWS_AS(parse_config_text(base + "distances = 1,2,3,4,5,6,7,8,9,45\n"),
                    ConfigError);  // outside the channel model's domain
}

TEST_CASE("cli overrides replace seed, mode, and output directory") {
    auto cfg = parse_config_text("n_stations = 4\n");
    apply_overrides(cfg, std::uint64_t{99}, std::string("drl"), std::string("/tmp/somewhere"));
    CHECK(cfg.seed == 99);
    CHECK(cfg.mode == Mode::kDrl);
    CHECK(cfg.out_dir == "/tmp/somewhere");
    CHECK(cfg.run_id() == "drl-static-n4-s99");
    CHECK_THROWS_AS(apply_overrides(cfg, std::nullopt, std::string("turbo"), std::nullopt),
                    ConfigError);
}

TEST_CASE("golden run: frozen bytes for metrics, rounds, and summary") {
    const auto cfg = parse_config_text(kGoldenConfig);
    const auto result = run_experiment(cfg);
    CHECK(result.run_id == "beb-static-n2-s7");
    CHECK(result.windows == 4);
    CHECK(result.rounds == 0);  // no aggregation under plain exponential backoff
    CHECK(result.metrics_csv == kGoldenMetrics);
    CHECK(result.rounds_csv == "run_id,round,mode,skipped,participants,betas\n");
    CHECK(result.summary_json == kGoldenSummaryJson);
    CHECK(result.summary.windows_used == 3);
    CHECK(result.summary.frames_success == 50);
    CHECK(result.frames_enqueued == result.frames_acked + result.frames_dropped +
                                        result.frames_queued_end);
}

TEST_CASE("experiments are deterministic and seed-sensitive") {
    auto cfg = cheap_agent_config(Mode::kEfrl);
    cfg.capture_round_probes = true;
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    CHECK(a.metrics_csv == b.metrics_csv);
    CHECK(a.rounds_csv == b.rounds_csv);
    CHECK(a.summary_json == b.summary_json);
    CHECK(a.window_delay_means_us == b.window_delay_means_us);

    cfg.seed = 4;
    const auto c = run_experiment(cfg);
    CHECK(a.metrics_csv != c.metrics_csv);
}

TEST_CASE("window and round bookkeeping matches the configuration") {
    auto cfg = cheap_agent_config(Mode::kEfrl);
    const auto result = run_experiment(cfg);
    CHECK(result.windows == cfg.windows());
    CHECK(result.windows == 20);
    CHECK(result.rounds == 4);  // one per elapsed aggregation period
    CHECK(result.frames_enqueued == result.frames_acked + result.frames_dropped +
                                        result.frames_queued_end);
    CHECK(result.frames_acked > 0);

    // Delay trace rows are the post-warmup windows that completed frames.
    CHECK(result.window_delay_means_us.size() <= 15);
    CHECK(!result.window_delay_means_us.empty());
}

TEST_CASE("independent learners ignore federation settings") {
    auto base = cheap_agent_config(Mode::kDrl);
    auto tweaked = base;
    tweaked.lambda = 3.0;
    tweaked.top_k = fed::SelectionConfig::kAllPassing;
    tweaked.min_samples = 50;
    tweaked.w1 = 0.3;
    tweaked.w2 = 0.7;
    const auto a = run_experiment(base);
    const auto b = run_experiment(tweaked);
    CHECK(a.metrics_csv == b.metrics_csv);
    CHECK(a.rounds == 0);
    CHECK(b.rounds == 0);
}

TEST_CASE("round probes replay the published selection rule") {
    auto cfg = cheap_agent_config(Mode::kEfrl);
    cfg.capture_round_probes = true;
    const auto result = run_experiment(cfg);
    REQUIRE(result.probes.size() == 4);

    fed::SelectionConfig sel;
    sel.w1 = cfg.w1;
    sel.w2 = cfg.w2;
    sel.d_max = cfg.fed_d_max;
    sel.min_samples = cfg.min_samples;
    sel.top_k = cfg.resolved_top_k();
    CHECK(sel.top_k == 2);

    int aggregated = 0;
    for (const auto& probe : result.probes) {
        REQUIRE(probe.clients.size() == 3);
        std::vector<fed::ClientReport> reports;
        std::vector<std::int64_t> counts_by_id(16, 0);
        for (const auto& c : probe.clients) {
            fed::ClientReport r;
            r.station_id = c.station_id;
            r.sample_count = c.sample_count;
            r.distance_m = c.distance_m;
            r.plr_mean10 = c.plr_mean10;
            reports.push_back(std::move(r));
            counts_by_id[static_cast<std::size_t>(c.station_id)] = c.sample_count;
        }
        CHECK(fed::select_participants(reports, sel) == probe.participants);
        if (probe.skipped) {
            CHECK(probe.participants.empty());
            continue;
        }
        ++aggregated;
        REQUIRE(!probe.participants.empty());
        CHECK(probe.participants.size() <= 2);
        CHECK(probe.betas.size() == probe.participants.size());

        std::vector<std::int64_t> counts;
        double beta_sum = 0.0;
        for (std::size_t i = 0; i < probe.participants.size(); ++i) {
            const auto samples = counts_by_id[static_cast<std::size_t>(probe.participants[i])];
            CHECK(samples >= cfg.min_samples);
            counts.push_back(samples);
            beta_sum += probe.betas[i];
        }
        CHECK(beta_sum == 1.0);
        CHECK(fed::compute_betas(counts, cfg.lambda, cfg.normalize_betas) == probe.betas);
    }
    CHECK(aggregated > 0);
}

TEST_CASE("sample-average mode takes every station above the floor, in id order") {
    auto cfg = cheap_agent_config(Mode::kAfrl);
    cfg.capture_round_probes = true;
    const auto result = run_experiment(cfg);
    REQUIRE(!result.probes.empty());
    int aggregated = 0;
    for (const auto& probe : result.probes) {
        if (probe.skipped) continue;
        ++aggregated;
        for (std::size_t i = 0; i < probe.participants.size(); ++i) {
            if (i > 0) CHECK(probe.participants[i] > probe.participants[i - 1]);
        }
        // No pruning: everyone with enough samples takes part.
        std::size_t eligible = 0;
        for (const auto& c : probe.clients)
            if (c.sample_count >= cfg.min_samples) ++eligible;
        CHECK(probe.participants.size() == eligible);
    }
    CHECK(aggregated > 0);
}

TEST_CASE("weight checkpoints round-trip bitwise") {
    rl::WeightSnapshot snap;
    snap.layout_id = 0x00DEFACED00Full;
    snap.actor_flat = {1.5, -2.25, 1e-300, 0.1, 0.0};
    snap.critic_flat = {3.14159, -1e308, 42.0};

    const auto dir = std::filesystem::temp_directory_path() / "fedcw_ckpt_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "w.bin").string();
    write_checkpoint(path, snap);
    const auto back = read_checkpoint(path);
    CHECK(back.layout_id == snap.layout_id);
    REQUIRE(back.actor_flat.size() == snap.actor_flat.size());
    REQUIRE(back.critic_flat.size() == snap.critic_flat.size());
    CHECK(std::memcmp(back.actor_flat.data(), snap.actor_flat.data(),
                      snap.actor_flat.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(back.critic_flat.data(), snap.critic_flat.data(),
                      snap.critic_flat.size() * sizeof(double)) == 0);

    std::ofstream bad(path, std::ios::binary | std::ios::trunc);
    bad << "NOPE";
    bad.close();
    CHECK_THROWS(read_checkpoint(path));
    std::filesystem::remove_all(dir);
}

TEST_CASE("nearest-rank percentile") {
    CHECK(percentile_nearest_rank({30.0, 10.0, 20.0, 40.0}, 0.5) == 20.0);
    CHECK(percentile_nearest_rank({30.0, 10.0, 20.0, 40.0}, 0.95) == 40.0);
    CHECK(percentile_nearest_rank({30.0, 10.0, 20.0, 40.0}, 1.0) == 40.0);
    CHECK(percentile_nearest_rank({30.0, 10.0, 20.0, 40.0}, 0.25) == 10.0);
    CHECK(percentile_nearest_rank({7.0}, 0.5) == 7.0);
    CHECK(percentile_nearest_rank({}, 0.5) == 0.0);
    CHECK_THROWS_AS(percentile_nearest_rank({1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(percentile_nearest_rank({1.0}, 1.01), std::invalid_argument);
}

TEST_CASE("window summarization: warmup cut, frame weighting, percentiles") {
    std::vector<WindowGlobal> rows = {
        {0, 100.0, 1.0, 1, 0},
        {1, 200.0, 2.0, 1, 0},
        {2, 300.0, 3.0, 3, 1},
        {3, 400.0, 0.0, 0, 2},  // nothing completed: excluded from delay stats
    };
    const auto s = summarize_windows("id", "beb", rows, 0.25);
    CHECK(s.windows_total == 4);
    CHECK(s.windows_used == 3);
    CHECK(s.frames_success == 4);
    CHECK(s.frames_lost == 3);
    CHECK(s.mean_delay_us == doctest::Approx(275.0).epsilon(1e-12));  // (200 + 3*300) / 4
    CHECK(s.mean_throughput_mbps == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(s.p50_delay_us == 200.0);
    CHECK(s.p95_delay_us == 300.0);

    const auto all = summarize_windows("id", "beb", rows, 0.0);
    CHECK(all.windows_used == 4);
    CHECK(all.mean_delay_us == doctest::Approx(240.0).epsilon(1e-12));  // (100 + 200 + 900) / 5

    const auto empty = summarize_windows("id", "beb", {}, 0.25);
    CHECK(empty.windows_used == 0);
    CHECK(empty.mean_delay_us == 0.0);
}

TEST_CASE("metrics csv parsing: global rows only, shard concatenation") {
    std::vector<MetricsRun> runs;
    parse_metrics_csv(kGoldenMetrics, runs);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].run_id == "beb-static-n2-s7");
    CHECK(runs[0].mode == "beb");
    REQUIRE(runs[0].rows.size() == 4);
    CHECK(runs[0].rows[2].window == 2);
    CHECK(runs[0].rows[2].frames_success == 18);
    CHECK(runs[0].rows[2].mean_delay_us == doctest::Approx(361.667).epsilon(1e-12));

    // Summarizing the parsed rows reproduces the frozen summary (CSV rounds
    // the per-window delay to three decimals, hence the loose tolerance).
    const auto s = summarize_windows(runs[0].run_id, runs[0].mode, runs[0].rows, 0.25);
    CHECK(s.mean_delay_us == doctest::Approx(341.76).epsilon(1e-5));
    CHECK(s.frames_success == 50);

    // A second shard with the same run id appends rows.
    parse_metrics_csv(kGoldenMetrics, runs);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].rows.size() == 8);

    std::vector<MetricsRun> bad;
    CHECK_THROWS(parse_metrics_csv("not,a,header\n", bad));
    CHECK_THROWS(parse_metrics_csv(std::string(kGoldenMetrics) + "short,row\n", bad));
}

TEST_CASE("summary table: aligned columns and delta against the first run") {
    RunSummary a;
    a.run_id = "base";
    a.mode = "beb";
    a.windows_used = 10;
    a.mean_delay_us = 200.0;
    RunSummary b = a;
    b.run_id = "cand";
    b.mode = "efrl";
    b.mean_delay_us = 150.0;

    const auto solo = format_summary_table({a});
    CHECK(solo.find("delta_vs_first") == std::string::npos);

    const auto table = format_summary_table({a, b});
    CHECK(table.find("baseline") != std::string::npos);
    CHECK(table.find("+0.2500") != std::string::npos);  // (200 - 150) / 200
}
