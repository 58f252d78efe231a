#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedcw/env.hpp"
#include "fedcw/mlp.hpp"
#include "fedcw/replay.hpp"
#include "fedcw/rng.hpp"

namespace fedcw::rl {

struct DdpgHyper {
    double lr = 0.002;
    double tau = 0.001;
    int batch = 64;
    double gamma = 0.9;
    double noise_sigma = 0.1;
    double noise_decay = 0.995;
    int buffer_capacity = 2000;
    std::vector<int> hidden = {64, 64};
    bool refresh_targets_on_import = true;
};

/// Flat parameter snapshot exchanged with the federation server and written
/// to checkpoint files.
struct WeightSnapshot {
    std::vector<double> actor_flat;
    std::vector<double> critic_flat;
    std::uint64_t layout_id = 0;
};

struct TrainReport {
    bool skipped = false;
    double critic_loss = 0.0;
    double actor_objective = 0.0;
};

/// target <- tau*online + (1-tau)*target, elementwise. Throws on layout mismatch.
void soft_update(MlpParams& target, const MlpParams& online, double tau);

// Batch losses and gradients of the two training objectives, exposed so the
// finite-difference oracle can evaluate them at perturbed parameters.
// Gradients are d(loss)/d(theta); grad_flat must be zeroed, layout-sized.
double critic_batch_loss(const MlpParams& critic, std::span<const Transition> batch,
                         std::span<const double> targets);
void critic_batch_gradient(const MlpParams& critic, std::span<const Transition> batch,
                           std::span<const double> targets, std::vector<double>& grad_flat);
double actor_batch_objective(const MlpParams& actor, const MlpParams& critic,
                             std::span<const Transition> batch);
void actor_batch_gradient(const MlpParams& actor, const MlpParams& critic,
                          std::span<const Transition> batch, std::vector<double>& grad_flat);

/// One station's learner: actor/critic with target copies, replay, Gaussian
/// exploration, plain SGD updates, and flat weight import/export.
class DdpgAgent {
  public:
    DdpgAgent(const DdpgHyper& hyper, std::uint64_t init_seed, std::uint64_t noise_seed,
              std::uint64_t sample_seed);

    double actor_forward(const env::StateVector& s) const;
    double critic_forward(const env::StateVector& s, double a) const;

    struct ActionChoice {
        double u = 0.0;       // clamped continuous output
        int a_discrete = 0;   // round(6u)
    };
    ActionChoice select_action(const env::StateVector& s, bool explore);

    void observe(const Transition& t) { buffer_.insert(t); }

    TrainReport train_step();

    void decay_noise() { noise_sigma_ *= hyper_.noise_decay; }
    double noise_sigma() const { return noise_sigma_; }

    WeightSnapshot export_weights() const;
    void import_weights(const WeightSnapshot& snap);

    const ReplayBuffer& buffer() const { return buffer_; }
    const DdpgHyper& hyper() const { return hyper_; }
    const MlpParams& actor() const { return actor_; }
    const MlpParams& critic() const { return critic_; }
    const MlpParams& target_actor() const { return target_actor_; }
    const MlpParams& target_critic() const { return target_critic_; }
    std::uint64_t layout_id() const { return layout_id_; }
    std::uint64_t clamp_count() const { return clamp_count_; }

  private:
    DdpgHyper hyper_;
    MlpParams actor_, critic_, target_actor_, target_critic_;
    ReplayBuffer buffer_;
    RngStream noise_rng_, sample_rng_;
    double noise_sigma_;
    std::uint64_t layout_id_;
    std::uint64_t clamp_count_ = 0;

    // per-step scratch, kept to avoid reallocation
    std::vector<Transition> batch_;
    std::vector<double> targets_;
    std::vector<double> grad_;
};

}  // namespace fedcw::rl
