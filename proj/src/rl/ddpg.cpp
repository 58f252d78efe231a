#include "fedcw/ddpg.hpp"

#include <algorithm>
#include <stdexcept>

#include "fedcw/kernels.hpp"

namespace fedcw::rl {

namespace {

MlpLayout actor_layout(const DdpgHyper& h) {
    MlpLayout l;
    l.sizes.push_back(2);
    l.sizes.insert(l.sizes.end(), h.hidden.begin(), h.hidden.end());
    l.sizes.push_back(1);
    l.output = OutputKind::kSigmoid;
    return l;
}

MlpLayout critic_layout(const DdpgHyper& h) {
    MlpLayout l;
    l.sizes.push_back(3);  // state (2) + action (1)
    l.sizes.insert(l.sizes.end(), h.hidden.begin(), h.hidden.end());
    l.sizes.push_back(1);
    l.output = OutputKind::kLinear;
    return l;
}

double clamp01(double u) {
    return std::min(1.0, std::max(0.0, u));
}

}  // namespace

void soft_update(MlpParams& target, const MlpParams& online, double tau) {
    if (target.layout != online.layout) {
        throw std::logic_error("soft_update: layout mismatch");
    }
    kernels::active().lerp(target.flat.data(), online.flat.data(), tau, target.flat.size());
}

double critic_batch_loss(const MlpParams& critic, std::span<const Transition> batch,
                         std::span<const double> targets) {
    MlpWorkspace ws;
    double loss = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const double in[3] = {batch[j].s.plr, batch[j].s.idle, batch[j].a};
        const double q = forward(critic, in, ws);
        const double err = q - targets[j];
        loss += err * err;
    }
    return loss / static_cast<double>(batch.size());
}

void critic_batch_gradient(const MlpParams& critic, std::span<const Transition> batch,
                           std::span<const double> targets, std::vector<double>& grad_flat) {
    MlpWorkspace ws;
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const double in[3] = {batch[j].s.plr, batch[j].s.idle, batch[j].a};
        const double q = forward(critic, in, ws);
        backward(critic, ws, 2.0 * (q - targets[j]) * inv_b, grad_flat.data());
    }
}

double actor_batch_objective(const MlpParams& actor, const MlpParams& critic,
                             std::span<const Transition> batch) {
    MlpWorkspace ws_a, ws_c;
    double total = 0.0;
    for (const Transition& t : batch) {
        const double s[2] = {t.s.plr, t.s.idle};
        const double u = forward(actor, s, ws_a);
        const double in[3] = {t.s.plr, t.s.idle, u};
        total += forward(critic, in, ws_c);
    }
    return total / static_cast<double>(batch.size());
}

void actor_batch_gradient(const MlpParams& actor, const MlpParams& critic,
                          std::span<const Transition> batch, std::vector<double>& grad_flat) {
    MlpWorkspace ws_a, ws_c;
    std::vector<double> d_critic_in(3);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    std::vector<double> critic_grad_sink(critic.layout.flat_size(), 0.0);
    for (const Transition& t : batch) {
        const double s[2] = {t.s.plr, t.s.idle};
        const double u = forward(actor, s, ws_a);
        const double in[3] = {t.s.plr, t.s.idle, u};
        forward(critic, in, ws_c);
        // dQ/da through the critic, then through the actor's output unit.
        backward(critic, ws_c, inv_b, critic_grad_sink.data(), d_critic_in.data());
        backward(actor, ws_a, d_critic_in[2], grad_flat.data());
    }
}

DdpgAgent::DdpgAgent(const DdpgHyper& hyper, std::uint64_t init_seed, std::uint64_t noise_seed,
                     std::uint64_t sample_seed)
    : hyper_(hyper),
      actor_(make_params(actor_layout(hyper))),
      critic_(make_params(critic_layout(hyper))),
      target_actor_(make_params(actor_layout(hyper))),
      target_critic_(make_params(critic_layout(hyper))),
      buffer_(static_cast<std::size_t>(hyper.buffer_capacity)),
      noise_rng_(noise_seed),
      sample_rng_(sample_seed),
      noise_sigma_(hyper.noise_sigma) {
    RngStream init_rng(init_seed);
    init_uniform(actor_, init_rng);
    init_uniform(critic_, init_rng);
    target_actor_.flat = actor_.flat;
    target_critic_.flat = critic_.flat;
    layout_id_ = actor_.layout.id() * 1000003ULL ^ critic_.layout.id();
    batch_.reserve(hyper_.batch);
    targets_.reserve(hyper_.batch);
}

double DdpgAgent::actor_forward(const env::StateVector& s) const {
    MlpWorkspace ws;
    const double in[2] = {s.plr, s.idle};
    return forward(actor_, in, ws);
}

double DdpgAgent::critic_forward(const env::StateVector& s, double a) const {
    MlpWorkspace ws;
    const double in[3] = {s.plr, s.idle, a};
    return forward(critic_, in, ws);
}

DdpgAgent::ActionChoice DdpgAgent::select_action(const env::StateVector& s, bool explore) {
    double u = actor_forward(s);
    if (explore && noise_sigma_ > 0.0) {
        u = clamp01(u + noise_sigma_ * noise_rng_.gaussian());
    }
    ActionChoice choice;
    choice.u = u;
    choice.a_discrete = env::discretize_action(u, &clamp_count_);
    return choice;
}

TrainReport DdpgAgent::train_step() {
    TrainReport report;
    if (buffer_.size() < static_cast<std::size_t>(hyper_.batch)) {
        report.skipped = true;
        return report;
    }

    batch_.clear();
    for (int j = 0; j < hyper_.batch; ++j) {
        batch_.push_back(buffer_.sample(sample_rng_));
    }

    // TD targets from the target networks: y = r + gamma * Q'(s', mu'(s')).
    targets_.clear();
    MlpWorkspace ws_a, ws_c;
    for (const Transition& t : batch_) {
        const double s_next[2] = {t.s_next.plr, t.s_next.idle};
        const double a_next = forward(target_actor_, s_next, ws_a);
        const double in[3] = {t.s_next.plr, t.s_next.idle, a_next};
        targets_.push_back(t.r + hyper_.gamma * forward(target_critic_, in, ws_c));
    }

    const auto& k = kernels::active();

    report.critic_loss = critic_batch_loss(critic_, batch_, targets_);
    grad_.assign(critic_.flat.size(), 0.0);
    critic_batch_gradient(critic_, batch_, targets_, grad_);
    k.axpy(-hyper_.lr, grad_.data(), critic_.flat.data(), critic_.flat.size());

    report.actor_objective = actor_batch_objective(actor_, critic_, batch_);
    grad_.assign(actor_.flat.size(), 0.0);
    actor_batch_gradient(actor_, critic_, batch_, grad_);
    k.axpy(hyper_.lr, grad_.data(), actor_.flat.data(), actor_.flat.size());  // ascent

    soft_update(target_actor_, actor_, hyper_.tau);
    soft_update(target_critic_, critic_, hyper_.tau);
    return report;
}

WeightSnapshot DdpgAgent::export_weights() const {
    WeightSnapshot snap;
    snap.actor_flat = actor_.flat;
    snap.critic_flat = critic_.flat;
    snap.layout_id = layout_id_;
    return snap;
}

void DdpgAgent::import_weights(const WeightSnapshot& snap) {
    if (snap.layout_id != layout_id_ || snap.actor_flat.size() != actor_.flat.size() ||
        snap.critic_flat.size() != critic_.flat.size()) {
        throw std::logic_error("import_weights: layout mismatch");
    }
    actor_.flat = snap.actor_flat;
    critic_.flat = snap.critic_flat;
    if (hyper_.refresh_targets_on_import) {
        target_actor_.flat = snap.actor_flat;
        target_critic_.flat = snap.critic_flat;
    }
}

}  // namespace fedcw::rl
