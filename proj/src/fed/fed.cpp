#include "fedcw/fed.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedcw::fed {

namespace {

/// Adjust the last weight so the left-to-right sum is exactly 1.0 (at most a
/// couple of ulps of correction). aggregate() recomputes the sum in the same
/// order, which is what makes identical-model aggregation an exact identity.
void pin_sum_to_one(std::vector<double>& w) {
    if (w.empty()) {
        return;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        acc += w[i];
    }
    double last = 1.0 - acc;
    for (int guard = 0; guard < 64 && acc + last != 1.0; ++guard) {
        last = std::nextafter(last, acc + last < 1.0 ? 2.0 : -2.0);
    }
    w.back() = last;
}

}  // namespace

double score_station(const ClientReport& report, const SelectionConfig& cfg, bool* clamped) {
    double s_dist = (cfg.d_max - report.distance_m) / cfg.d_max;
    if (s_dist < 0.0) {
        s_dist = 0.0;
        if (clamped) {
            *clamped = true;
        }
    }
    const double s_plr = 1.0 - report.plr_mean10;
    return cfg.w1 * s_dist + cfg.w2 * s_plr;
}

std::vector<int> select_participants(const std::vector<ClientReport>& reports,
                                     const SelectionConfig& cfg) {
    struct Scored {
        double score;
        int id;
    };
    std::vector<Scored> passing;
    for (const ClientReport& r : reports) {
        if (r.sample_count >= cfg.min_samples) {
            passing.push_back({score_station(r, cfg), r.station_id});
        }
    }
    std::sort(passing.begin(), passing.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.id < b.id;
    });
    if (cfg.top_k != SelectionConfig::kAllPassing &&
        passing.size() > static_cast<std::size_t>(cfg.top_k)) {
        passing.resize(static_cast<std::size_t>(cfg.top_k));
    }
    std::vector<int> ids;
    ids.reserve(passing.size());
    for (const Scored& s : passing) {
        ids.push_back(s.id);
    }
    return ids;
}

std::vector<double> compute_betas(const std::vector<std::int64_t>& sample_counts, double lambda,
                                  bool normalize) {
    std::int64_t total = 0;
    for (std::int64_t c : sample_counts) {
        total += c;
    }
    if (total <= 0) {
        return {};
    }
    std::vector<double> betas;
    betas.reserve(sample_counts.size());
    double sum = 0.0;
    for (std::int64_t c : sample_counts) {
        const double share = static_cast<double>(c) / static_cast<double>(total);
        const double b = std::exp(lambda * share);
        betas.push_back(b);
        sum += b;
    }
    if (normalize) {
        for (double& b : betas) {
            b /= sum;
        }
        pin_sum_to_one(betas);
    }
    return betas;
}

std::vector<double> aggregate(const std::vector<const std::vector<double>*>& flats,
                              const std::vector<double>& betas) {
    if (flats.empty() || flats.size() != betas.size()) {
        throw std::logic_error("aggregate: vector/beta count mismatch");
    }
    const std::size_t n = flats.front()->size();
    for (const auto* f : flats) {
        if (f->size() != n) {
            throw std::logic_error("aggregate: flat length mismatch");
        }
    }
    double scale = 0.0;
    for (double b : betas) {
        scale += b;
    }
    // Anchored at the first model: W = scale*w0 + sum_{n>0} beta_n*(w_n - w0),
    // algebraically the plain weighted sum. The anchoring makes aggregation
    // of identical models reproduce them bit for bit whenever the betas sum
    // to exactly 1.
    const std::vector<double>& base = *flats.front();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = scale * base[i];
    }
    for (std::size_t m = 1; m < flats.size(); ++m) {
        const double b = betas[m];
        const double* f = flats[m]->data();
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += b * (f[i] - base[i]);
        }
    }
    return out;
}

RoundOutcome run_round(const std::vector<ClientReport>& reports, const SelectionConfig& sel,
                       const AggregationConfig& agg) {
    RoundOutcome out;
    if (agg.mode == AggregationMode::kNone || reports.empty()) {
        return out;
    }
    for (const ClientReport& r : reports) {
        if (r.layout_id != reports.front().layout_id) {
            throw std::logic_error("run_round: layout mismatch across reports");
        }
    }

    std::vector<int> participants;
    if (agg.mode == AggregationMode::kExponential) {
        participants = select_participants(reports, sel);
    } else {
        // Average mode applies only the sample filter, station-id order.
        for (const ClientReport& r : reports) {
            if (r.sample_count >= sel.min_samples) {
                participants.push_back(r.station_id);
            }
        }
        std::sort(participants.begin(), participants.end());
    }
    if (participants.empty()) {
        return out;
    }

    std::vector<const ClientReport*> selected;
    std::vector<std::int64_t> counts;
    for (int id : participants) {
        const auto it = std::find_if(reports.begin(), reports.end(),
                                     [id](const ClientReport& r) { return r.station_id == id; });
        selected.push_back(&*it);
        counts.push_back(it->sample_count);
    }

    std::vector<double> betas;
    if (agg.mode == AggregationMode::kExponential) {
        betas = compute_betas(counts, agg.lambda, agg.normalize);
    } else {
        std::int64_t total = 0;
        for (std::int64_t c : counts) {
            total += c;
        }
        if (total > 0) {
            for (std::int64_t c : counts) {
                betas.push_back(static_cast<double>(c) / static_cast<double>(total));
            }
            pin_sum_to_one(betas);
        }
    }
    if (betas.empty()) {
        return out;  // zero total samples: round skipped
    }

    std::vector<const std::vector<double>*> actors, critics;
    for (const ClientReport* r : selected) {
        actors.push_back(&r->actor_flat);
        critics.push_back(&r->critic_flat);
    }
    out.global_actor = aggregate(actors, betas);
    out.global_critic = aggregate(critics, betas);
    out.participants = std::move(participants);
    out.betas = std::move(betas);
    out.skipped = false;
    return out;
}

}  // namespace fedcw::fed
