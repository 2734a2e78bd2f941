#pragma once

#include <cstdint>
#include <vector>

#include "plantbench/net.hpp"
#include "plantbench/ticket.hpp"

namespace plantbench {

// Per-layer parameter tolerances eps_l guaranteeing ||f - f_eps||_inf <= eps
// when every layer-l parameter is off by at most eps_l.
struct ErrorBudget {
    double eps = 0.0;
    std::vector<double> eps_l;
    std::vector<double> sup_norms;        // sup ||x^(l-1)||_1 per layer, l = 1..L
    std::vector<double> weight_inf_norms; // max |w| per layer
};

// sup ||x^(l-1)||_1 of the target on a dense domain grid (1e4 points in 1-D,
// 200^2 in 2-D), padded by a 1.1 safety factor.
std::vector<double> estimate_sup_norms(const SparseTicket& target);

// eps_l = eps / (L sqrt(n_l k_{l,max}) (1 + sup||x^(l-1)||_1)
//              prod_{k=l+1..L} (||W^(k)||_inf + eps/L)),
// clamped to eps/L from above.
ErrorBudget eps_layer(double eps, const SparseTicket& target,
                      const std::vector<double>& sup_norms = {});

struct PropagationResult {
    double max_deviation = 0.0;  // max over trials and grid of ||f - f_eps||_2
    double eps = 0.0;
    bool within_bound = false;
};

// Monte Carlo check of the budget: every stored parameter of layer l is
// shifted by U[-eps_l, eps_l]; deviations are measured in the output 2-norm
// over a dense domain grid.
PropagationResult verify_error_propagation(const SparseTicket& target, const ErrorBudget& budget,
                                           int trials, int grid_points, std::uint64_t seed);

struct ExistenceBound {
    double probability = 0.0;  // clamped to [0,1]
    double raw_product = 0.0;  // can be negative when the union bound overshoots
    std::vector<double> layer_failure_terms;  // sum_i (1 - eps_l^{k_i})^{n_l0}
    std::vector<double> eps_l;
    double lambda_rescale = 1.0;  // prod_l 1/sigma_w^(l)
    bool degenerate = false;      // some eps_l >= 1
};

// Lower bound on the probability that a rescaled eps-approximation of the
// target is contained in a mother network initialized with sigma_w.
// normal_variant halves every eps_l (normally initialized parameters).
ExistenceBound existence_lower_bound(double eps, const SparseTicket& target,
                                     const Architecture& mother_arch,
                                     const std::vector<double>& sup_norms = {},
                                     const std::vector<double>& sigma_w = {},
                                     bool normal_variant = false);

struct ExistenceMc {
    double frequency = 0.0;    // empirical match frequency
    double bound = 0.0;        // closed-form per-layer bound for this target
    double stderr_binomial = 0.0;
    bool within_3sigma = false;  // frequency >= bound - 3 stderr
};

// Brute-force check for tiny single-layer targets (a handful of parameters):
// fresh U[-1,1] mothers, a neuron matches when all its candidate parameters
// are within eps_l of the target's.
ExistenceMc verify_existence_bound(double eps_l, const std::vector<double>& target_params,
                                   int mother_width, int trials, std::uint64_t seed);

// prod_l (1 - 0.5^{n_l}) over the architecture's layer widths l = 1..L.
double relu_path_prob(const Architecture& arch);

struct PathMc {
    double frequency = 0.0;
    double expected = 0.0;
    double stderr_binomial = 0.0;
    bool within_3sigma = false;
};

// Sequential sign-pattern simulation of the winning-path event.
PathMc relu_path_prob_mc(const Architecture& arch, int trials, std::uint64_t seed);

}  // namespace plantbench
