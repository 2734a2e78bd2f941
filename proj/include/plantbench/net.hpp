#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "plantbench/rng.hpp"

namespace plantbench {

// Layer widths [n_0, n_1, ..., n_L]. n_0 is the input dimension, n_L the
// output dimension, so a net with architecture of size L+1 has L weight
// layers.
struct Architecture {
    std::vector<int> widths;

    Architecture() = default;
    explicit Architecture(std::vector<int> w) : widths(std::move(w)) { validate(); }

    int depth() const { return static_cast<int>(widths.size()) - 1; }
    int in_dim() const { return widths.front(); }
    int out_dim() const { return widths.back(); }

    void validate() const {
        if (widths.size() < 2) throw std::invalid_argument("architecture needs at least 2 layers");
        for (int w : widths)
            if (w < 1) throw std::invalid_argument("architecture widths must be >= 1");
    }

    bool operator==(const Architecture& o) const { return widths == o.widths; }
};

enum class LossKind { Mse, SoftmaxCrossEntropy };

// Initialization scheme: w^(l) ~ U[-sigma_w^(l), sigma_w^(l)],
// b^(l) ~ U[-prod_{k<=l} sigma_w^(k), +prod].
struct InitSpec {
    std::vector<double> sigma_w;  // per weight layer; empty -> default scale
    std::uint64_t seed = 0;

    // Default per-layer scale sqrt(6 / fan_in). Keeps ReLU activations at
    // O(1) magnitude through depth (uniform He scaling).
    static InitSpec default_for(const Architecture& arch, std::uint64_t seed);
};

struct Layer {
    int in = 0, out = 0;
    std::vector<double> w;        // in*out, row-major: w[i*out + j] connects i -> j
    std::vector<double> b;        // out
    std::vector<std::uint8_t> w_mask, b_mask;

    double& wt(int i, int j) { return w[static_cast<std::size_t>(i) * out + j]; }
    double wt(int i, int j) const { return w[static_cast<std::size_t>(i) * out + j]; }
    std::uint8_t& wm(int i, int j) { return w_mask[static_cast<std::size_t>(i) * out + j]; }
    std::uint8_t wm(int i, int j) const { return w_mask[static_cast<std::size_t>(i) * out + j]; }
};

// Dense ReLU MLP with binary parameter masks. Hidden layers apply ReLU, the
// output layer is linear (softmax lives inside the classification loss).
// Invariant: masked entries hold exactly 0; every mutation path
// (apply_mask, adam_step, plant) preserves this.
struct MaskedMLP {
    Architecture arch;
    std::vector<Layer> layers;

    int depth() const { return arch.depth(); }
};

// Per-parameter values with the same shapes as a net's weights/biases.
// Used for gradients and saliency scores.
struct ParamSet {
    std::vector<std::vector<double>> w, b;

    static ParamSet zeros_like(const MaskedMLP& net);
};

struct MaskSet {
    std::vector<std::vector<std::uint8_t>> w, b;

    static MaskSet ones_like(const MaskedMLP& net);
    static MaskSet zeros_like(const MaskedMLP& net);
};

MaskedMLP mlp_new(const Architecture& arch, const InitSpec& init);

// Single-input forward pass; returns the output vector.
std::vector<double> forward(const MaskedMLP& net, const std::vector<double>& x);

// Forward pass keeping all layer activations (acts[0] = x, acts[L] = output).
void forward_acts(const MaskedMLP& net, const std::vector<double>& x,
                  std::vector<std::vector<double>>& acts);

// Mean loss over the batch plus gradients for every parameter. Gradients of
// masked entries are reported as computed; the optimizer path zeroes them
// (see zero_masked and adam_step).
// For Mse, loss = mean over samples and output dimensions of squared error.
// For SoftmaxCrossEntropy, targets are class labels.
double loss_and_grad(const MaskedMLP& net, const std::vector<double>& inputs, int n,
                     const std::vector<double>& targets, const std::vector<int>& labels,
                     LossKind kind, ParamSet& grads);

double loss_only(const MaskedMLP& net, const std::vector<double>& inputs, int n,
                 const std::vector<double>& targets, const std::vector<int>& labels,
                 LossKind kind);

void zero_masked(const MaskedMLP& net, ParamSet& grads);

// Installs the masks and zeroes masked entries.
void apply_mask(MaskedMLP& net, const MaskSet& masks);

// rho = kept weight entries / total weight entries. Biases excluded.
double sparsity(const MaskedMLP& net);
// Variant including bias entries in both counts, reported for transparency.
double sparsity_with_biases(const MaskedMLP& net);

std::size_t total_weight_count(const Architecture& arch);

}  // namespace plantbench
