#pragma once

#include <cstdint>
#include <vector>

namespace fedcw::fed {

/// Per-round client upload: model weights plus the selection inputs.
struct ClientReport {
    int station_id = 0;
    std::vector<double> actor_flat;
    std::vector<double> critic_flat;
    std::uint64_t layout_id = 0;
    std::int64_t sample_count = 0;  // transitions gathered since the last round
    double distance_m = 0.0;
    double plr_mean10 = 0.0;        // mean PLR of the last 10 windows
};

struct SelectionConfig {
    double w1 = 0.5;
    double w2 = 0.5;
    double d_max = 30.0;
    std::int64_t min_samples = 64;
    int top_k = kAllPassing;

    static constexpr int kAllPassing = -1;
};

enum class AggregationMode : std::uint8_t {
    kExponential,  // sample-share exponent weighting, pruning selection
    kAverage,      // sample-proportional weighting, sample filter only
    kNone,         // no aggregation (independent learners)
};

struct AggregationConfig {
    double lambda = 1.0;
    bool normalize = true;
    AggregationMode mode = AggregationMode::kExponential;
};

struct RoundOutcome {
    bool skipped = true;
    std::vector<int> participants;       // aggregation order
    std::vector<double> betas;           // aligned with participants
    std::vector<double> global_actor;
    std::vector<double> global_critic;
};

/// Composite selection score w1*(d_max-d)/d_max + w2*(1-PLR), in [0,1].
/// Distances beyond d_max clamp the distance term to 0 (flagged via clamped).
double score_station(const ClientReport& report, const SelectionConfig& cfg,
                     bool* clamped = nullptr);

/// Sample filter, then score; descending score, ties by lower station id,
/// truncated to top_k. Empty result means the round is skipped.
std::vector<int> select_participants(const std::vector<ClientReport>& reports,
                                     const SelectionConfig& cfg);

/// beta_n = exp(lambda * sample_n / sum(sample)); normalized to sum exactly 1
/// when requested. Empty result when the counts sum to zero.
std::vector<double> compute_betas(const std::vector<std::int64_t>& sample_counts, double lambda,
                                  bool normalize);

/// Elementwise weighted sum of equal-length flat vectors. When the weights
/// sum to 1, aggregating identical vectors returns them unchanged.
std::vector<double> aggregate(const std::vector<const std::vector<double>*>& flats,
                              const std::vector<double>& betas);

/// Full aggregation round for the configured mode. kNone returns a skipped
/// outcome; redistribution to participants is the caller's job.
RoundOutcome run_round(const std::vector<ClientReport>& reports, const SelectionConfig& sel,
                       const AggregationConfig& agg);

}  // namespace fedcw::fed
