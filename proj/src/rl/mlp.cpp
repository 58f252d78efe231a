#include "fedcw/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "fedcw/kernels.hpp"

namespace fedcw::rl {

MlpParams make_params(MlpLayout layout) {
    if (layout.sizes.size() < 2 || layout.sizes.back() != 1) {
        throw std::invalid_argument("MlpLayout: need >= 2 sizes and scalar output");
    }
    MlpParams p;
    p.layout = std::move(layout);
    p.flat.assign(p.layout.flat_size(), 0.0);
    return p;
}

void init_uniform(MlpParams& params, RngStream& rng) {
    const auto& sizes = params.layout.sizes;
    for (int l = 0; l < params.layout.layer_count(); ++l) {
        const double limit = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
        double* w = params.weights(l);
        const std::size_t n_w = static_cast<std::size_t>(sizes[l]) * sizes[l + 1];
        for (std::size_t i = 0; i < n_w; ++i) {
            w[i] = rng.uniform(-limit, limit);
        }
        double* b = params.biases(l);
        for (int i = 0; i < sizes[l + 1]; ++i) {
            b[i] = rng.uniform(-limit, limit);
        }
    }
}

double forward(const MlpParams& params, const double* input, MlpWorkspace& ws) {
    const auto& k = kernels::active();
    const auto& sizes = params.layout.sizes;
    const int layers = params.layout.layer_count();

    ws.acts.resize(layers + 1);
    ws.acts[0].assign(input, input + sizes[0]);

    for (int l = 0; l < layers; ++l) {
        auto& out = ws.acts[l + 1];
        out.resize(sizes[l + 1]);
        k.gemv(params.weights(l), sizes[l + 1], sizes[l], ws.acts[l].data(), params.biases(l),
               out.data());
        if (l + 1 < layers) {
            for (double& v : out) {
                v = std::tanh(v);
            }
        } else if (params.layout.output == OutputKind::kSigmoid) {
            out[0] = 1.0 / (1.0 + std::exp(-out[0]));
        }
    }
    return ws.acts[layers][0];
}

void backward(const MlpParams& params, const MlpWorkspace& ws, double d_output,
              double* grad_flat, double* d_input) {
    const auto& k = kernels::active();
    const auto& sizes = params.layout.sizes;
    const int layers = params.layout.layer_count();

    // d(loss)/d(pre-activation) of the output layer.
    double dz_out = d_output;
    if (params.layout.output == OutputKind::kSigmoid) {
        const double y = ws.acts[layers][0];
        dz_out *= y * (1.0 - y);
    }

    std::vector<double> dz(1, dz_out);
    std::vector<double> dh;
    for (int l = layers - 1; l >= 0; --l) {
        const double* h_in = ws.acts[l].data();
        k.ger(grad_flat + params.layout.weight_offset(l), sizes[l + 1], sizes[l], dz.data(), h_in,
              1.0);
        k.axpy(1.0, dz.data(), grad_flat + params.layout.bias_offset(l), sizes[l + 1]);

        if (l == 0) {
            if (d_input) {
                k.gemv_t(params.weights(l), sizes[l + 1], sizes[l], dz.data(), d_input);
            }
            break;
        }
        dh.resize(sizes[l]);
        k.gemv_t(params.weights(l), sizes[l + 1], sizes[l], dz.data(), dh.data());
        // tanh' = 1 - tanh^2, from the stored post-activation.
        dz.resize(sizes[l]);
        const double* h = ws.acts[l].data();
        for (int i = 0; i < sizes[l]; ++i) {
            dz[i] = dh[i] * (1.0 - h[i] * h[i]);
        }
    }
}

}  // namespace fedcw::rl
