// End-to-end acceptance checks. Each check prints exactly one verdict line;
// the process exit code is the number of failed checks.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fedcw/ddpg.hpp"
#include "fedcw/env.hpp"
#include "fedcw/fed.hpp"
#include "fedcw/harness/bianchi.hpp"
#include "fedcw/harness/config.hpp"
#include "fedcw/harness/experiment.hpp"
#include "fedcw/mlp.hpp"
#include "fedcw/rng.hpp"

using namespace fedcw;
using namespace fedcw::harness;

namespace {

int g_failures = 0;

void verdict(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s  %2d  %-28s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::string fmt(const char* spec, double v) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// ---------------------------------------------------------------- check 1

void check_equations() {
    const double tol = 1e-12;
    bool ok = true;
    std::string why;
    auto expect = [&](bool cond, const char* label) {
        if (!cond && ok) {
            ok = false;
            why = label;
        }
    };

    expect(std::abs(env::compute_plr(20, 18) - 0.1) < tol, "loss ratio");
    expect(env::compute_plr(0, 0) == 0.0, "loss ratio 0/0");
    expect(std::abs(env::compute_idle(100000, 25000) - 0.75) < tol, "idle ratio");
    const int cw_map[7] = {15, 31, 63, 127, 255, 511, 1023};
    for (int a = 0; a < 7; ++a) expect(env::map_action_to_cw(a) == cw_map[a], "cw map");
    expect(std::abs(env::compute_reward(5000.0, 20000.0) - 0.75) < tol, "reward");

    fed::ClientReport rep;
    rep.distance_m = 15.0;
    rep.plr_mean10 = 0.2;
    fed::SelectionConfig sel;  // w1 = w2 = 0.5, d_max = 30
    expect(std::abs(fed::score_station(rep, sel) - 0.65) < tol, "selection score");

    const auto betas = fed::compute_betas({3000, 1000}, 1.0, true);
    const double e75 = std::exp(0.75), e25 = std::exp(0.25);
    expect(betas.size() == 2, "beta count");
    expect(std::abs(betas[0] - e75 / (e75 + e25)) < tol, "beta value");
    expect(std::abs(betas[0] + betas[1] - 1.0) < tol, "beta sum");

    const std::vector<double> wa{1.0, 2.0}, wb{3.0, 4.0};
    const auto agg = fed::aggregate({&wa, &wb}, {0.25, 0.75});
    expect(std::abs(agg[0] - 2.5) < tol && std::abs(agg[1] - 3.5) < tol, "weighted sum");

    verdict(1, "equation suite", ok, ok ? "seven closed forms at 1e-12" : "first miss: " + why);
}

// ---------------------------------------------------------------- check 2

void check_bianchi() {
    bool ok = true;
    std::string detail;
    for (int n : {5, 10}) {
        for (int cw : {31, 127}) {
            const auto c = validate_fixed_cw(n, cw, 20.0, 1);
            const bool point_ok = c.rel_err_p <= 0.10 && c.rel_err_s <= 0.10 &&
                                  c.wall_seconds < 60.0;
            if (!point_ok) ok = false;
            detail += "n" + std::to_string(n) + "/cw" + std::to_string(cw) + ":" +
                      fmt("%.3f", c.rel_err_p) + "/" + fmt("%.3f", c.rel_err_s) + " ";
        }
    }
    verdict(2, "saturation closed form", ok, "rel err p/S " + detail + "(limit 0.100)");
}

// ---------------------------------------------------------------- check 3

void check_gradients() {
    const double h = 1e-5;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        rl::DdpgHyper hyper;
        hyper.hidden = {8, 8};
        hyper.batch = 8;
        hyper.buffer_capacity = 64;
        rl::DdpgAgent agent(hyper, seed * 100 + 1, seed * 100 + 2, seed * 100 + 3);

        RngStream rng(seed);
        std::vector<rl::Transition> batch(8);
        std::vector<double> targets;
        for (auto& t : batch) {
            t.s = {rng.uniform01(), rng.uniform01()};
            t.a = rng.uniform01();
            t.r = rng.uniform(-1.0, 1.0);
            t.s_next = {rng.uniform01(), rng.uniform01()};
            targets.push_back(rng.uniform(-1.0, 1.0));
        }

        rl::MlpParams critic = agent.critic();
        std::vector<double> grad(critic.flat.size(), 0.0);
        rl::critic_batch_gradient(critic, batch, targets, grad);
        double scale = 0.0;
        for (double g : grad) scale = std::max(scale, std::abs(g));
        for (std::size_t i = 0; i < critic.flat.size(); ++i) {
            const double keep = critic.flat[i];
            critic.flat[i] = keep + h;
            const double up = rl::critic_batch_loss(critic, batch, targets);
            critic.flat[i] = keep - h;
            const double dn = rl::critic_batch_loss(critic, batch, targets);
            critic.flat[i] = keep;
            worst = std::max(worst, std::abs(grad[i] - (up - dn) / (2.0 * h)) / scale);
        }

        rl::MlpParams actor = agent.actor();
        grad.assign(actor.flat.size(), 0.0);
        rl::actor_batch_gradient(actor, agent.critic(), batch, grad);
        scale = 0.0;
        for (double g : grad) scale = std::max(scale, std::abs(g));
        for (std::size_t i = 0; i < actor.flat.size(); ++i) {
            const double keep = actor.flat[i];
            actor.flat[i] = keep + h;
            const double up = rl::actor_batch_objective(actor, agent.critic(), batch);
            actor.flat[i] = keep - h;
            const double dn = rl::actor_batch_objective(actor, agent.critic(), batch);
            actor.flat[i] = keep;
            worst = std::max(worst, std::abs(grad[i] - (up - dn) / (2.0 * h)) / scale);
        }
    }
    verdict(3, "gradient finite differences", worst < 1e-4,
            "20 seeds, max rel err " + fmt("%.3e", worst) + " (limit 1e-4)");
}

// ---------------------------------------------------------------- check 4

void check_soft_update() {
    const double tau = 0.001;
    bool ok = true;
    std::string detail = "rel err";
    for (auto kind : {rl::OutputKind::kSigmoid, rl::OutputKind::kLinear}) {
        rl::MlpLayout layout;
        layout.sizes = {kind == rl::OutputKind::kSigmoid ? 2 : 3, 8, 8, 1};
        layout.output = kind;
        rl::MlpParams online = rl::make_params(layout);
        rl::MlpParams target = rl::make_params(layout);
        RngStream rng(kind == rl::OutputKind::kSigmoid ? 5 : 6);
        rl::init_uniform(online, rng);
        rl::init_uniform(target, rng);

        double gap0 = 0.0;
        for (std::size_t i = 0; i < online.flat.size(); ++i)
            gap0 = std::max(gap0, std::abs(target.flat[i] - online.flat[i]));

        for (int k = 1; k <= 1000; ++k) {
            rl::soft_update(target, online, tau);
            if (k == 1 || k == 100 || k == 1000) {
                double gap = 0.0;
                for (std::size_t i = 0; i < online.flat.size(); ++i)
                    gap = std::max(gap, std::abs(target.flat[i] - online.flat[i]));
                const double want = std::pow(1.0 - tau, k) * gap0;
                const double rel = std::abs(gap - want) / want;
                if (rel >= 1e-9) ok = false;
                if (k == 1000) detail += fmt(" %.2e", rel);
            }
        }
    }
    verdict(4, "soft-update decay", ok, detail + " at k=1000 (limit 1e-9)");
}

// ---------------------------------------------------------------- check 5

void check_aggregation() {
    bool ok = true;
    std::string why;
    auto expect = [&](bool cond, const char* label) {
        if (!cond && ok) {
            ok = false;
            why = label;
        }
    };

    // Normalized weights sum to 1 across random count vectors and lambdas.
    RngStream rng(500);
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = 1 + rng.below(10);
        std::vector<std::int64_t> counts;
        for (std::uint64_t i = 0; i < n; ++i)
            counts.push_back(static_cast<std::int64_t>(1 + rng.below(1'000'000)));
        const double lambda = rng.uniform(0.0, 4.0);
        const auto betas = fed::compute_betas(counts, lambda, true);
        double sum = 0.0;
        for (double b : betas) sum += b;
        expect(std::abs(sum - 1.0) <= 1e-12, "beta normalization");
    }

    // Aggregating identical models returns them bit for bit.
    for (std::size_t copies : {2, 3, 5, 7}) {
        std::vector<double> v(1000);
        for (auto& x : v) x = rng.uniform(-3.0, 3.0);
        std::vector<const std::vector<double>*> flats(copies, &v);
        const auto betas = fed::compute_betas(
            std::vector<std::int64_t>(copies, 500), 1.0, true);
        expect(bits_equal(fed::aggregate(flats, betas), v), "identity aggregation");
    }

    // With lambda = 0 and equal sample counts the exponential server reduces
    // to the plain sample-share average.
    auto make_reports = [&](const std::vector<double>& distances) {
        std::vector<fed::ClientReport> reports;
        for (std::size_t i = 0; i < distances.size(); ++i) {
            fed::ClientReport r;
            r.station_id = static_cast<int>(i);
            r.sample_count = 500;
            r.distance_m = distances[i];
            r.plr_mean10 = 0.05;
            r.layout_id = 99;
            for (int j = 0; j < 40; ++j) {
                r.actor_flat.push_back(rng.uniform(-2.0, 2.0));
                r.critic_flat.push_back(rng.uniform(-2.0, 2.0));
            }
            reports.push_back(std::move(r));
        }
        return reports;
    };
    fed::SelectionConfig sel;
    sel.top_k = fed::SelectionConfig::kAllPassing;
    sel.min_samples = 64;
    fed::AggregationConfig exp0;
    exp0.lambda = 0.0;
    exp0.mode = fed::AggregationMode::kExponential;
    fed::AggregationConfig avg;
    avg.mode = fed::AggregationMode::kAverage;

    // Scores decreasing in id: both modes visit participants in id order and
    // the outputs must be identical to the last bit.
    const auto aligned = make_reports({2.0, 8.0, 14.0, 20.0});
    const auto out_exp = fed::run_round(aligned, sel, exp0);
    const auto out_avg = fed::run_round(aligned, sel, avg);
    expect(!out_exp.skipped && !out_avg.skipped, "round ran");
    expect(out_exp.participants == out_avg.participants, "participant match");
    expect(bits_equal(out_exp.betas, out_avg.betas), "beta match");
    expect(bits_equal(out_exp.global_actor, out_avg.global_actor), "actor match");
    expect(bits_equal(out_exp.global_critic, out_avg.global_critic), "critic match");

    // Score order different from id order: same participant set, same model,
    // only the summation order differs.
    const auto shuffled = make_reports({20.0, 2.0, 14.0, 8.0});
    const auto s_exp = fed::run_round(shuffled, sel, exp0);
    const auto s_avg = fed::run_round(shuffled, sel, avg);
    auto sorted_ids = [](std::vector<int> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    expect(sorted_ids(s_exp.participants) == sorted_ids(s_avg.participants),
           "participant set match");
    double worst = 0.0;
    for (std::size_t i = 0; i < s_exp.global_actor.size(); ++i)
        worst = std::max(worst, std::abs(s_exp.global_actor[i] - s_avg.global_actor[i]));
    expect(worst <= 1e-12, "order-independent agreement");

    // Larger sample counts earn strictly larger weights when lambda > 0.
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::int64_t> counts;
        const auto n = 2 + rng.below(8);
        for (std::uint64_t i = 0; i < n; ++i)
            counts.push_back(static_cast<std::int64_t>(1 + rng.below(100000)));
        const double lambda = trial % 2 == 0 ? 0.5 : 2.0;
        const auto betas = fed::compute_betas(counts, lambda, true);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            for (std::size_t j = 0; j < counts.size(); ++j) {
                if (counts[i] > counts[j]) expect(betas[i] > betas[j], "beta monotonicity");
            }
        }
    }

    verdict(5, "aggregation properties", ok,
            ok ? "sum, identity, lambda-0 equivalence, monotonicity" : "first miss: " + why);
}

// ---------------------------------------------------------------- check 6

ExperimentConfig cheap_agent_config(Mode mode, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.mode = mode;
    cfg.seed = seed;
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

void check_selection() {
    bool ok = true;
    std::string why;
    auto expect = [&](bool cond, const std::string& label) {
        if (!cond && ok) {
            ok = false;
            why = label;
        }
    };

    // A real run whose first round cannot reach the sample floor: stations
    // gather one transition per window except the very first, so the floor
    // of 5 filters everyone in round one and nobody afterwards.
    auto cfg = cheap_agent_config(Mode::kEfrl, 6);
    cfg.n_stations = 5;
    cfg.distances_m = {4.0, 10.0, 16.0, 22.0, 28.0};
    cfg.sim_time_us = 2'000'000;
    cfg.min_samples = 5;
    cfg.capture_round_probes = true;
    const auto result = run_experiment(cfg);
    expect(result.probes.size() == 8, "round count");
    int skipped = 0, aggregated = 0;
    for (const auto& probe : result.probes) {
        probe.skipped ? ++skipped : ++aggregated;
        for (int id : probe.participants) {
            bool found = false;
            for (const auto& c : probe.clients) {
                if (c.station_id != id) continue;
                found = true;
                expect(c.sample_count >= cfg.min_samples,
                       "round " + std::to_string(probe.round) + " logged station " +
                           std::to_string(id) + " with " + std::to_string(c.sample_count) +
                           " samples");
            }
            expect(found, "participant without a client record");
        }
    }
    expect(skipped >= 1, "no starved round observed");
    expect(aggregated >= 1, "no aggregated round observed");

    // The rounds log agrees with the probes: skipped rounds list nobody.
    std::istringstream rounds(result.rounds_csv);
    std::string line;
    std::getline(rounds, line);  // header
    int row = 0;
    while (std::getline(rounds, line)) {
        std::vector<std::string> fields;
        std::istringstream ls(line);
        for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
        const auto& probe = result.probes.at(static_cast<std::size_t>(row++));
        expect(fields.size() >= 4, "short rounds row");
        expect((fields[3] == "1") == probe.skipped, "log/probe skip mismatch");
        const bool lists_nobody = fields.size() < 5 || fields[4].empty();
        expect(lists_nobody == probe.skipped, "skipped round lists participants");
    }
    expect(row == 8, "rounds log row count");

    // Brute-force replay of the pruning rule on randomized report sets.
    std::mt19937_64 gen(606);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const int n = 1 + static_cast<int>(gen() % 12);
        fed::SelectionConfig sel;
        sel.w1 = unit(gen);
        sel.w2 = 1.0 - sel.w1;
        sel.d_max = 30.0;
        sel.min_samples = 64;
        sel.top_k = (gen() % 4 == 0) ? fed::SelectionConfig::kAllPassing
                                     : 1 + static_cast<int>(gen() % (n + 2));

        std::vector<fed::ClientReport> reports(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            auto& r = reports[static_cast<std::size_t>(i)];
            r.station_id = i;
            r.sample_count = static_cast<std::int64_t>(gen() % 121);
            r.distance_m = 36.0 * unit(gen);  // beyond d_max exercises the clamp
            r.plr_mean10 = unit(gen);
        }
        std::shuffle(reports.begin(), reports.end(), gen);

        struct Scored {
            int id;
            double score;
        };
        std::vector<Scored> want;
        for (const auto& r : reports) {
            if (r.sample_count < sel.min_samples) continue;
            const double dist_term = std::max(0.0, (sel.d_max - r.distance_m) / sel.d_max);
            want.push_back(Scored{r.station_id, sel.w1 * dist_term +
                                                     sel.w2 * (1.0 - r.plr_mean10)});
        }
        std::sort(want.begin(), want.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        if (sel.top_k != fed::SelectionConfig::kAllPassing &&
            want.size() > static_cast<std::size_t>(sel.top_k))
            want.resize(static_cast<std::size_t>(sel.top_k));

        const auto got = fed::select_participants(reports, sel);
        std::vector<int> want_ids;
        for (const auto& s : want) want_ids.push_back(s.id);
        expect(got == want_ids, "brute-force mismatch on trial " + std::to_string(trial));
    }

    verdict(6, "selection properties", ok,
            ok ? "sample floor enforced, 1000 randomized sets match" : why);
}

// ---------------------------------------------------------------- check 7

void check_determinism() {
    bool ok = true;
    std::string why;
    for (Mode mode : {Mode::kEfrl, Mode::kAfrl, Mode::kDrl, Mode::kBeb, Mode::kRtsCts,
                      Mode::kFixed}) {
        const auto cfg = cheap_agent_config(mode, 11);
        const auto a = run_experiment(cfg);
        const auto b = run_experiment(cfg);
        if (a.metrics_csv != b.metrics_csv || a.rounds_csv != b.rounds_csv) {
            ok = false;
            why = std::string("mode ") + to_string(mode) + " diverged";
            break;
        }
    }
    verdict(7, "reproducibility", ok, ok ? "byte-identical CSVs in all six modes" : why);
}

// ---------------------------------------------------------------- checks 8-10

ExperimentConfig static_config(Mode mode, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::kStatic;
    cfg.mode = mode;
    cfg.seed = seed;
    cfg.n_stations = 10;
    cfg.sim_time_us = 10'000'000;
    cfg.traffic_rate_mbps = 10.0;
    return cfg;
}

void check_static_learning() {
    const auto t0 = std::chrono::steady_clock::now();
    int wins = 0;
    double pruned_sum = 0.0, unpruned_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto learned = run_experiment(static_config(Mode::kEfrl, seed));
        const auto fixed = run_experiment(static_config(Mode::kFixed, seed));
        auto all_cfg = static_config(Mode::kEfrl, seed);
        all_cfg.top_k = fed::SelectionConfig::kAllPassing;
        const auto unpruned = run_experiment(all_cfg);

        if (learned.summary.mean_delay_us < fixed.summary.mean_delay_us) ++wins;
        pruned_sum += learned.summary.mean_delay_us;
        unpruned_sum += unpruned.summary.mean_delay_us;
    }
    const double wall = seconds_since(t0);
    const bool ok = wins >= 4 && pruned_sum <= unpruned_sum && wall < 900.0;
    verdict(8, "static delay improvement", ok,
            "beat fixed cw in " + std::to_string(wins) + "/5 seeds, pruned/unpruned mean " +
                fmt("%.0f", pruned_sum / 5.0) + "/" + fmt("%.0f", unpruned_sum / 5.0) + "us, " +
                fmt("%.0f", wall) + "s");
}

ExperimentConfig dynamic_config(Mode mode, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.scenario = Scenario::kDynamic;
    cfg.mode = mode;
    cfg.seed = seed;
    cfg.n_stations = 20;
    cfg.n_fixed_traffic = 5;
    cfg.n_random_traffic = 15;
    cfg.sim_time_us = 10'000'000;
    cfg.traffic_rate_mbps = 2.0;
    cfg.traffic_rate_min_mbps = 0.0;
    cfg.traffic_rate_max_mbps = 4.0;
    return cfg;
}

void check_dynamic_stability() {
    int efrl_wins = 0, afrl_wins = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const double v_efrl =
            delay_variance(run_experiment(dynamic_config(Mode::kEfrl, seed)).window_delay_means_us);
        const double v_afrl =
            delay_variance(run_experiment(dynamic_config(Mode::kAfrl, seed)).window_delay_means_us);
        const double v_drl =
            delay_variance(run_experiment(dynamic_config(Mode::kDrl, seed)).window_delay_means_us);
        if (v_efrl < v_drl) ++efrl_wins;
        if (v_afrl < v_drl) ++afrl_wins;
    }
    const bool ok = efrl_wins >= 4 && afrl_wins >= 4;
    verdict(9, "dynamic delay stability", ok,
            "variance below independent learners in " + std::to_string(efrl_wins) + "/5 and " +
                std::to_string(afrl_wins) + "/5 seeds");
}

void check_access_tradeoff() {
    ExperimentConfig cfg;
    cfg.mode = Mode::kBeb;
    cfg.seed = 1;
    cfg.n_stations = 20;
    cfg.saturate = true;
    cfg.sim_time_us = 5'000'000;
    const auto basic = run_experiment(cfg);
    cfg.mode = Mode::kRtsCts;
    const auto rts = run_experiment(cfg);

    bool ok = basic.successes_total > 0 && rts.successes_total > 0 &&
              basic.lifetime_busy_us > 0 && rts.lifetime_busy_us > 0;
    const double air_basic = static_cast<double>(basic.success_airtime_us) /
                             static_cast<double>(basic.successes_total);
    const double air_rts = static_cast<double>(rts.success_airtime_us) /
                           static_cast<double>(rts.successes_total);
    const double col_basic = static_cast<double>(basic.collision_busy_us) /
                             static_cast<double>(basic.lifetime_busy_us);
    const double col_rts = static_cast<double>(rts.collision_busy_us) /
                           static_cast<double>(rts.lifetime_busy_us);
    ok = ok && air_rts > air_basic && col_rts < col_basic;
    verdict(10, "reservation trade-off", ok,
            "airtime/success " + fmt("%.1f", air_rts) + ">" + fmt("%.1f", air_basic) +
                "us, collision share " + fmt("%.4f", col_rts) + "<" + fmt("%.4f", col_basic));
}

}  // namespace

int main() {
    check_equations();
    check_bianchi();
    check_gradients();
    check_soft_update();
    check_aggregation();
    check_selection();
    check_determinism();
    check_static_learning();
    check_dynamic_stability();
    check_access_tradeoff();
    std::printf("%d/10 checks passed\n", 10 - g_failures);
    return g_failures;
}
