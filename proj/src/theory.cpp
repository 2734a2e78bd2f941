#include "plantbench/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plantbench/rng.hpp"

namespace plantbench {

namespace {

std::vector<std::vector<double>> domain_grid(int in_dim, int points_1d) {
    std::vector<std::vector<double>> grid;
    if (in_dim == 1) {
        for (int i = 0; i < points_1d; ++i)
            grid.push_back({-1.0 + 2.0 * i / (points_1d - 1)});
    } else if (in_dim == 2) {
        int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(points_1d))));
        side = std::max(side, 2);
        for (int i = 0; i < side; ++i)
            for (int j = 0; j < side; ++j)
                grid.push_back({-1.0 + 2.0 * i / (side - 1), -1.0 + 2.0 * j / (side - 1)});
    } else {
        throw std::invalid_argument("domain grids support 1-D and 2-D inputs");
    }
    return grid;
}

}  // namespace

std::vector<double> estimate_sup_norms(const SparseTicket& target) {
    MaskedMLP net = densify(target);
    int L = net.depth();
    std::vector<double> sup(L, 0.0);
    auto grid = domain_grid(net.arch.in_dim(), net.arch.in_dim() == 1 ? 10000 : 40000);
    std::vector<std::vector<double>> acts;
    for (const auto& x : grid) {
        forward_acts(net, x, acts);
        for (int l = 0; l < L; ++l) {
            double norm1 = 0.0;
            for (double v : acts[l]) norm1 += std::abs(v);
            sup[l] = std::max(sup[l], norm1);
        }
    }
    for (double& s : sup) s *= 1.1;  // safety factor over the finite grid
    return sup;
}

ErrorBudget eps_layer(double eps, const SparseTicket& target,
                      const std::vector<double>& sup_norms) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must be in (0,1)");
    int L = target.arch.depth();
    ErrorBudget budget;
    budget.eps = eps;
    budget.sup_norms = sup_norms.empty() ? estimate_sup_norms(target) : sup_norms;
    if (static_cast<int>(budget.sup_norms.size()) != L)
        throw std::invalid_argument("sup_norms needs one entry per layer");

    budget.weight_inf_norms.assign(L, 0.0);
    std::vector<double> frob(L, 0.0);
    for (const WeightEntry& e : target.weights) {
        budget.weight_inf_norms[e.layer - 1] =
            std::max(budget.weight_inf_norms[e.layer - 1], std::abs(e.value));
        frob[e.layer - 1] += e.value * e.value;
    }
    for (double& f : frob) f = std::sqrt(f);

    // downstream layer gain: ||W_eps||_2 <= ||W||_F + sqrt(m) eps/L. The
    // Frobenius norm is a valid l2-operator bound; the max-entry norm is not
    // (a layer with many entries amplifies an error vector well past
    // max|w_ij|) and the budgets it yields fail the propagation check.
    budget.eps_l.resize(L);
    for (int l = 1; l <= L; ++l) {
        double nk = static_cast<double>(target.arch.widths[l]) * target.max_in_degree(l);
        double tail = 1.0;
        for (int k = l + 1; k <= L; ++k) {
            double mk = std::sqrt(std::max(
                static_cast<double>(target.arch.widths[k]) * target.max_in_degree(k), 1.0));
            tail *= frob[k - 1] + mk * eps / L;
        }
        double denom = L * std::sqrt(std::max(nk, 1.0)) * (1.0 + budget.sup_norms[l - 1]) * tail;
        budget.eps_l[l - 1] = std::min(eps / denom, eps / L);
    }
    return budget;
}

PropagationResult verify_error_propagation(const SparseTicket& target, const ErrorBudget& budget,
                                           int trials, int grid_points, std::uint64_t seed) {
    PropagationResult res;
    res.eps = budget.eps;
    MaskedMLP base = densify(target);
    auto grid = domain_grid(base.arch.in_dim(), grid_points);

    std::vector<std::vector<double>> fx(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) fx[g] = forward(base, grid[g]);

    Rng rng(seed);
    MaskedMLP pert = base;
    for (int t = 0; t < trials; ++t) {
        pert = base;
        for (const WeightEntry& e : target.weights)
            pert.layers[e.layer - 1].wt(e.row, e.col) +=
                rng.uniform_sym(budget.eps_l[e.layer - 1]);
        for (const BiasEntry& e : target.biases)
            pert.layers[e.layer - 1].b[e.idx] += rng.uniform_sym(budget.eps_l[e.layer - 1]);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            std::vector<double> y = forward(pert, grid[g]);
            double d2 = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) {
                double d = y[j] - fx[g][j];
                d2 += d * d;
            }
            res.max_deviation = std::max(res.max_deviation, std::sqrt(d2));
        }
    }
    res.within_bound = res.max_deviation <= budget.eps;
    return res;
}

ExistenceBound existence_lower_bound(double eps, const SparseTicket& target,
                                     const Architecture& mother_arch,
                                     const std::vector<double>& sup_norms,
                                     const std::vector<double>& sigma_w, bool normal_variant) {
    int L = target.arch.depth();
    if (mother_arch.depth() != L)
        throw std::invalid_argument("existence_lower_bound: depth mismatch");
    ErrorBudget budget = eps_layer(eps, target, sup_norms);

    ExistenceBound out;
    out.eps_l = budget.eps_l;
    if (normal_variant)
        for (double& e : out.eps_l) e *= 0.5;
    out.lambda_rescale = 1.0;
    if (!sigma_w.empty()) {
        if (static_cast<int>(sigma_w.size()) != L)
            throw std::invalid_argument("sigma_w needs one entry per layer");
        for (double s : sigma_w) out.lambda_rescale /= s;
    }

    out.raw_product = 1.0;
    double clamped = 1.0;
    for (int l = 1; l <= L; ++l) {
        double el = out.eps_l[l - 1];
        if (el >= 1.0) out.degenerate = true;
        double fail = 0.0;
        double n0 = static_cast<double>(mother_arch.widths[l]);
        for (int i = 0; i < target.arch.widths[l]; ++i) {
            int k = target.in_degree(l, i);
            if (k == 0) continue;  // nothing to match
            double p_match = std::pow(std::min(el, 1.0), k);
            fail += std::pow(1.0 - p_match, n0);
        }
        out.layer_failure_terms.push_back(fail);
        out.raw_product *= (1.0 - fail);
        clamped *= std::max(0.0, 1.0 - fail);
    }
    out.probability = std::clamp(clamped, 0.0, 1.0);
    return out;
}

ExistenceMc verify_existence_bound(double eps_l, const std::vector<double>& target_params,
                                   int mother_width, int trials, std::uint64_t seed) {
    if (target_params.empty()) throw std::invalid_argument("target_params must be nonempty");
    ExistenceMc res;
    int k = static_cast<int>(target_params.size());
    res.bound = 1.0 - std::pow(1.0 - std::pow(std::min(eps_l, 1.0), k),
                               static_cast<double>(mother_width));
    Rng rng(seed);
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
        bool found = false;
        for (int j = 0; j < mother_width && !found; ++j) {
            bool all = true;
            for (int p = 0; p < k; ++p) {
                double cand = rng.uniform(-1.0, 1.0);
                if (std::abs(cand - target_params[p]) > eps_l) all = false;
            }
            found = all;
        }
        if (found) ++hits;
    }
    res.frequency = static_cast<double>(hits) / trials;
    double p = std::clamp(res.bound, 1e-12, 1.0 - 1e-12);
    res.stderr_binomial = std::sqrt(p * (1.0 - p) / trials);
    res.within_3sigma = res.frequency >= res.bound - 3.0 * res.stderr_binomial;
    return res;
}

double relu_path_prob(const Architecture& arch) {
    double p = 1.0;
    for (int l = 1; l <= arch.depth(); ++l)
        p *= 1.0 - std::pow(0.5, static_cast<double>(arch.widths[l]));
    return p;
}

PathMc relu_path_prob_mc(const Architecture& arch, int trials, std::uint64_t seed) {
    PathMc res;
    res.expected = relu_path_prob(arch);
    Rng rng(seed);
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
        bool ok = true;
        for (int l = 1; l <= arch.depth() && ok; ++l) {
            bool any_positive = false;
            for (int j = 0; j < arch.widths[l]; ++j)
                if (rng.uniform() < 0.5) any_positive = true;
            ok = any_positive;
        }
        if (ok) ++hits;
    }
    res.frequency = static_cast<double>(hits) / trials;
    double p = std::clamp(res.expected, 1e-12, 1.0 - 1e-12);
    res.stderr_binomial = std::sqrt(p * (1.0 - p) / trials);
    res.within_3sigma = std::abs(res.frequency - res.expected) <= 3.0 * res.stderr_binomial;
    return res;
}

}  // namespace plantbench
