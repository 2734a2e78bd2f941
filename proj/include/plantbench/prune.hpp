#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plantbench/data.hpp"
#include "plantbench/net.hpp"

namespace plantbench {

// Per-parameter saliency scores, shape-aligned with a net's parameters.
using ScoreSet = ParamSet;

enum class Method { Magnitude, Random, Snip, Grasp, Synflow };

std::string method_name(Method m);
Method method_from_name(const std::string& name);
bool method_needs_data(Method m);

// |theta|
ScoreSet score_magnitude(const MaskedMLP& net);
// i.i.d. U[0,1), seeded
ScoreSet score_random(const MaskedMLP& net, std::uint64_t seed);
// |theta * dL/dtheta| on one batch (SNIP)
ScoreSet score_snip(const MaskedMLP& net, const Dataset& batch, LossKind kind);
// -theta * (H g) with the Hessian-vector product taken by central finite
// differences of the gradient along the gradient direction (GraSP)
ScoreSet score_grasp(const MaskedMLP& net, const Dataset& batch, LossKind kind);
// data-free |theta| * dR/d|theta| where R is the all-ones-input output sum of
// the absolute-valued network (SynFlow)
ScoreSet score_synflow(const MaskedMLP& net);

ScoreSet compute_scores(Method m, const MaskedMLP& net, const Dataset* batch, LossKind kind,
                        std::uint64_t seed);

enum class Scope { Global, LocalPerLayer };

// Keeps the top-scoring weight entries: round(rho * N) globally or
// round(rho * N_l) per layer, restricted to the currently unmasked entries.
// Ties break by (layer, row, col). Biases are kept exactly when their neuron
// retains at least one incoming weight.
MaskSet select_mask(const ScoreSet& scores, const MaskedMLP& net, double rho, Scope scope);

struct PruneStrategy {
    enum class Kind { Singleshot, Multishot, EdgePopup };
    Kind kind = Kind::Singleshot;
    Scope scope = Scope::Global;
    int rounds = 10;            // multishot
    int epochs_per_round = 5;   // multishot training per round
    int synflow_rounds = 1;     // singleshot SynFlow multi-round option
    bool anneal = false;        // edge-popup sparsity annealing
    int edge_popup_epochs = 10;
    double edge_popup_lr = 0.1;

    static PruneStrategy singleshot(int synflow_rounds = 1);
    static PruneStrategy multishot(int rounds = 10, int epochs = 5);
    static PruneStrategy edge_popup(bool anneal = false, int epochs = 10);
};

std::string strategy_name(const PruneStrategy& s);

// One scoring pass, then prune to rho. SynFlow with synflow_rounds > 1
// re-scores and prunes along the schedule rho^(r/rounds) without training.
MaskSet singleshot(const MaskedMLP& net, Method method, double rho, const Dataset* train_set,
                   LossKind kind, int synflow_rounds, Scope scope, std::uint64_t seed);

// Iterative train -> score -> prune to rho^(r/rounds) -> reset rounds.
// round_sparsities, when given, receives the achieved sparsity after each
// round.
MaskSet multishot(const MaskedMLP& net, Method method, double rho, const Dataset& train_set,
                  LossKind kind, int rounds, int epochs_per_round, Scope scope,
                  std::uint64_t seed, std::vector<double>* round_sparsities = nullptr);

// Trains per-parameter scores with frozen weights (SGD, momentum 0.9, weight
// decay 5e-4, cosine learning rate), straight-through mask gradients. Weight
// masks are per-layer top-fraction by score; a bias is kept when its score
// clears the layer's weight cutoff. anneal lowers the keep fraction by
// rho^(epoch/10).
MaskSet edge_popup(const MaskedMLP& net, double rho, int epochs, bool anneal,
                   const Dataset& train_set, LossKind kind, std::uint64_t seed,
                   double base_lr = 0.1);

struct CollapseReport {
    std::vector<int> collapsed_layers;  // 1-based layers with zero kept weights
    bool flow_interrupted = false;      // no input-to-output path over kept weights
};

CollapseReport detect_layer_collapse(const MaskSet& masks, const Architecture& arch);

}  // namespace plantbench
