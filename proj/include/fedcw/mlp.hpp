#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedcw/rng.hpp"

namespace fedcw::rl {

enum class OutputKind : std::uint8_t { kSigmoid, kLinear };

/// Shape descriptor of a fully connected net with tanh hidden units. The
/// parameter vector is flat: per layer, row-major weights (out x in) followed
/// by biases. All agents in a run share one layout; the id guards federation
/// and checkpoint exchanges.
struct MlpLayout {
    std::vector<int> sizes;  // e.g. {2, 64, 64, 1}
    OutputKind output = OutputKind::kLinear;

    int layer_count() const { return static_cast<int>(sizes.size()) - 1; }

    std::size_t flat_size() const {
        std::size_t total = 0;
        for (int l = 0; l < layer_count(); ++l) {
            total += static_cast<std::size_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
        }
        return total;
    }

    std::size_t weight_offset(int layer) const {
        std::size_t off = 0;
        for (int l = 0; l < layer; ++l) {
            off += static_cast<std::size_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
        }
        return off;
    }

    std::size_t bias_offset(int layer) const {
        return weight_offset(layer) + static_cast<std::size_t>(sizes[layer]) * sizes[layer + 1];
    }

    std::uint64_t id() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (int s : sizes) {
            h = (h ^ static_cast<std::uint64_t>(s)) * 0x100000001b3ULL;
        }
        h = (h ^ static_cast<std::uint64_t>(output)) * 0x100000001b3ULL;
        return h;
    }

    bool operator==(const MlpLayout&) const = default;
};

struct MlpParams {
    MlpLayout layout;
    std::vector<double> flat;

    double* weights(int layer) { return flat.data() + layout.weight_offset(layer); }
    const double* weights(int layer) const { return flat.data() + layout.weight_offset(layer); }
    double* biases(int layer) { return flat.data() + layout.bias_offset(layer); }
    const double* biases(int layer) const { return flat.data() + layout.bias_offset(layer); }
};

/// Post-activation values kept from a forward pass for the matching backward.
struct MlpWorkspace {
    std::vector<std::vector<double>> acts;  // acts[0] = input copy, acts[L] = output
};

MlpParams make_params(MlpLayout layout);

/// Uniform init in +-1/sqrt(fan_in) per layer, weights and biases.
void init_uniform(MlpParams& params, RngStream& rng);

/// Scalar-output forward pass; records activations in ws.
double forward(const MlpParams& params, const double* input, MlpWorkspace& ws);

/// Backprop of d_loss/d_output through the pass recorded in ws. Parameter
/// gradients are accumulated (+=) into grad_flat (layout-sized); d_input, when
/// non-null, receives d_loss/d_input (overwritten, size = input width).
void backward(const MlpParams& params, const MlpWorkspace& ws, double d_output,
              double* grad_flat, double* d_input = nullptr);

}  // namespace fedcw::rl
