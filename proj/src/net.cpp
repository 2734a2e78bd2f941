#include "plantbench/net.hpp"

#include <algorithm>
#include <cmath>

namespace plantbench {

InitSpec InitSpec::default_for(const Architecture& arch, std::uint64_t seed) {
    InitSpec spec;
    spec.seed = seed;
    for (int l = 0; l < arch.depth(); ++l)
        spec.sigma_w.push_back(std::sqrt(6.0 / arch.widths[l]));
    return spec;
}

ParamSet ParamSet::zeros_like(const MaskedMLP& net) {
    ParamSet p;
    for (const Layer& layer : net.layers) {
        p.w.emplace_back(layer.w.size(), 0.0);
        p.b.emplace_back(layer.b.size(), 0.0);
    }
    return p;
}

MaskSet MaskSet::ones_like(const MaskedMLP& net) {
    MaskSet m;
    for (const Layer& layer : net.layers) {
        m.w.emplace_back(layer.w.size(), std::uint8_t{1});
        m.b.emplace_back(layer.b.size(), std::uint8_t{1});
    }
    return m;
}

MaskSet MaskSet::zeros_like(const MaskedMLP& net) {
    MaskSet m;
    for (const Layer& layer : net.layers) {
        m.w.emplace_back(layer.w.size(), std::uint8_t{0});
        m.b.emplace_back(layer.b.size(), std::uint8_t{0});
    }
    return m;
}

MaskedMLP mlp_new(const Architecture& arch, const InitSpec& init) {
    arch.validate();
    std::vector<double> sigma = init.sigma_w;
    if (sigma.empty()) sigma = InitSpec::default_for(arch, init.seed).sigma_w;
    if (static_cast<int>(sigma.size()) != arch.depth())
        throw std::invalid_argument("sigma_w must have one entry per weight layer");
    for (double s : sigma)
        if (!(s > 0.0)) throw std::invalid_argument("sigma_w entries must be > 0");

    MaskedMLP net;
    net.arch = arch;
    Rng rng(init.seed);
    double bias_scale = 1.0;
    for (int l = 0; l < arch.depth(); ++l) {
        Layer layer;
        layer.in = arch.widths[l];
        layer.out = arch.widths[l + 1];
        layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
        layer.b.resize(layer.out);
        layer.w_mask.assign(layer.w.size(), 1);
        layer.b_mask.assign(layer.b.size(), 1);
        bias_scale *= sigma[l];
        for (double& w : layer.w) w = rng.uniform_sym(sigma[l]);
        for (double& b : layer.b) b = rng.uniform_sym(bias_scale);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

void forward_acts(const MaskedMLP& net, const std::vector<double>& x,
                  std::vector<std::vector<double>>& acts) {
    if (static_cast<int>(x.size()) != net.arch.in_dim())
        throw std::invalid_argument("forward: input dimension mismatch");
    int L = net.depth();
    acts.resize(L + 1);
    acts[0] = x;
    for (int l = 0; l < L; ++l) {
        const Layer& layer = net.layers[l];
        std::vector<double>& out = acts[l + 1];
        out.assign(layer.out, 0.0);
        const std::vector<double>& in = acts[l];
        for (int i = 0; i < layer.in; ++i) {
            double xi = in[i];
            if (xi == 0.0) continue;
            const double* wrow = layer.w.data() + static_cast<std::size_t>(i) * layer.out;
            for (int j = 0; j < layer.out; ++j) out[j] += xi * wrow[j];
        }
        for (int j = 0; j < layer.out; ++j) {
            out[j] += layer.b[j];
            if (l + 1 < L && out[j] < 0.0) out[j] = 0.0;
        }
    }
}

std::vector<double> forward(const MaskedMLP& net, const std::vector<double>& x) {
    std::vector<std::vector<double>> acts;
    forward_acts(net, x, acts);
    return acts.back();
}

namespace {

// softmax cross entropy on one sample; returns loss, writes dL/dlogits
double softmax_ce(const std::vector<double>& logits, int label, std::vector<double>& dlogits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    dlogits.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        dlogits[c] = std::exp(logits[c] - mx);
        sum += dlogits[c];
    }
    double loss = -(logits[label] - mx - std::log(sum));
    for (std::size_t c = 0; c < logits.size(); ++c) {
        dlogits[c] = dlogits[c] / sum - (static_cast<int>(c) == label ? 1.0 : 0.0);
    }
    return loss;
}

}  // namespace

double loss_and_grad(const MaskedMLP& net, const std::vector<double>& inputs, int n,
                     const std::vector<double>& targets, const std::vector<int>& labels,
                     LossKind kind, ParamSet& grads) {
    if (n <= 0) throw std::invalid_argument("loss_and_grad: empty batch");
    int in_dim = net.arch.in_dim();
    int out_dim = net.arch.out_dim();
    if (static_cast<int>(inputs.size()) != n * in_dim)
        throw std::invalid_argument("loss_and_grad: input shape mismatch");
    if (kind == LossKind::Mse && static_cast<int>(targets.size()) != n * out_dim)
        throw std::invalid_argument("loss_and_grad: target shape mismatch");
    if (kind == LossKind::SoftmaxCrossEntropy && static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("loss_and_grad: label count mismatch");

    grads = ParamSet::zeros_like(net);
    int L = net.depth();
    double total_loss = 0.0;
    std::vector<std::vector<double>> acts;
    std::vector<double> delta, delta_prev, x(in_dim), dlogits;

    for (int s = 0; s < n; ++s) {
        std::copy(inputs.begin() + static_cast<std::size_t>(s) * in_dim,
                  inputs.begin() + static_cast<std::size_t>(s + 1) * in_dim, x.begin());
        forward_acts(net, x, acts);
        const std::vector<double>& yhat = acts[L];

        if (kind == LossKind::Mse) {
            delta.assign(out_dim, 0.0);
            double denom = static_cast<double>(n) * out_dim;
            for (int j = 0; j < out_dim; ++j) {
                double e = yhat[j] - targets[static_cast<std::size_t>(s) * out_dim + j];
                total_loss += e * e / denom;
                delta[j] = 2.0 * e / denom;
            }
        } else {
            total_loss += softmax_ce(yhat, labels[s], dlogits) / n;
            delta.assign(out_dim, 0.0);
            for (int j = 0; j < out_dim; ++j) delta[j] = dlogits[j] / n;
        }

        for (int l = L - 1; l >= 0; --l) {
            const Layer& layer = net.layers[l];
            std::vector<double>& gw = grads.w[l];
            std::vector<double>& gb = grads.b[l];
            const std::vector<double>& a_in = acts[l];
            for (int j = 0; j < layer.out; ++j) gb[j] += delta[j];
            for (int i = 0; i < layer.in; ++i) {
                double ai = a_in[i];
                if (ai != 0.0) {
                    double* grow = gw.data() + static_cast<std::size_t>(i) * layer.out;
                    for (int j = 0; j < layer.out; ++j) grow[j] += ai * delta[j];
                }
            }
            if (l > 0) {
                delta_prev.assign(layer.in, 0.0);
                for (int i = 0; i < layer.in; ++i) {
                    if (acts[l][i] <= 0.0) continue;  // ReLU gate of the producing layer
                    const double* wrow = layer.w.data() + static_cast<std::size_t>(i) * layer.out;
                    double acc = 0.0;
                    for (int j = 0; j < layer.out; ++j) acc += wrow[j] * delta[j];
                    delta_prev[i] = acc;
                }
                delta.swap(delta_prev);
            }
        }
    }
    return total_loss;
}

double loss_only(const MaskedMLP& net, const std::vector<double>& inputs, int n,
                 const std::vector<double>& targets, const std::vector<int>& labels,
                 LossKind kind) {
    int in_dim = net.arch.in_dim();
    int out_dim = net.arch.out_dim();
    double total = 0.0;
    std::vector<double> x(in_dim), dlogits;
    std::vector<std::vector<double>> acts;
    for (int s = 0; s < n; ++s) {
        std::copy(inputs.begin() + static_cast<std::size_t>(s) * in_dim,
                  inputs.begin() + static_cast<std::size_t>(s + 1) * in_dim, x.begin());
        forward_acts(net, x, acts);
        if (kind == LossKind::Mse) {
            double denom = static_cast<double>(n) * out_dim;
            for (int j = 0; j < out_dim; ++j) {
                double e = acts.back()[j] - targets[static_cast<std::size_t>(s) * out_dim + j];
                total += e * e / denom;
            }
        } else {
            total += softmax_ce(acts.back(), labels[s], dlogits) / n;
        }
    }
    return total;
}

void zero_masked(const MaskedMLP& net, ParamSet& grads) {
    for (int l = 0; l < net.depth(); ++l) {
        const Layer& layer = net.layers[l];
        for (std::size_t k = 0; k < layer.w.size(); ++k)
            if (!layer.w_mask[k]) grads.w[l][k] = 0.0;
        for (std::size_t k = 0; k < layer.b.size(); ++k)
            if (!layer.b_mask[k]) grads.b[l][k] = 0.0;
    }
}

void apply_mask(MaskedMLP& net, const MaskSet& masks) {
    if (masks.w.size() != net.layers.size() || masks.b.size() != net.layers.size())
        throw std::invalid_argument("apply_mask: layer count mismatch");
    for (int l = 0; l < net.depth(); ++l) {
        Layer& layer = net.layers[l];
        if (masks.w[l].size() != layer.w.size() || masks.b[l].size() != layer.b.size())
            throw std::invalid_argument("apply_mask: shape mismatch at layer " + std::to_string(l + 1));
        layer.w_mask = masks.w[l];
        layer.b_mask = masks.b[l];
        for (std::size_t k = 0; k < layer.w.size(); ++k)
            if (!layer.w_mask[k]) layer.w[k] = 0.0;
        for (std::size_t k = 0; k < layer.b.size(); ++k)
            if (!layer.b_mask[k]) layer.b[k] = 0.0;
    }
}

double sparsity(const MaskedMLP& net) {
    std::size_t kept = 0, total = 0;
    for (const Layer& layer : net.layers) {
        total += layer.w_mask.size();
        for (std::uint8_t m : layer.w_mask) kept += m;
    }
    return total == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(total);
}

double sparsity_with_biases(const MaskedMLP& net) {
    std::size_t kept = 0, total = 0;
    for (const Layer& layer : net.layers) {
        total += layer.w_mask.size() + layer.b_mask.size();
        for (std::uint8_t m : layer.w_mask) kept += m;
        for (std::uint8_t m : layer.b_mask) kept += m;
    }
    return total == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(total);
}

std::size_t total_weight_count(const Architecture& arch) {
    std::size_t total = 0;
    for (int l = 0; l < arch.depth(); ++l)
        total += static_cast<std::size_t>(arch.widths[l]) * arch.widths[l + 1];
    return total;
}

}  // namespace plantbench
