#include "plantbench/prune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "plantbench/optim.hpp"
#include "plantbench/rng.hpp"

namespace plantbench {

std::string method_name(Method m) {
    switch (m) {
        case Method::Magnitude: return "magnitude";
        case Method::Random: return "random";
        case Method::Snip: return "snip";
        case Method::Grasp: return "grasp";
        case Method::Synflow: return "synflow";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "magnitude") return Method::Magnitude;
    if (name == "random") return Method::Random;
    if (name == "snip") return Method::Snip;
    if (name == "grasp") return Method::Grasp;
    if (name == "synflow") return Method::Synflow;
    throw std::invalid_argument("unknown method: " + name);
}

bool method_needs_data(Method m) { return m == Method::Snip || m == Method::Grasp; }

ScoreSet score_magnitude(const MaskedMLP& net) {
    ScoreSet s = ParamSet::zeros_like(net);
    for (int l = 0; l < net.depth(); ++l) {
        for (std::size_t k = 0; k < net.layers[l].w.size(); ++k)
            s.w[l][k] = std::abs(net.layers[l].w[k]);
        for (std::size_t k = 0; k < net.layers[l].b.size(); ++k)
            s.b[l][k] = std::abs(net.layers[l].b[k]);
    }
    return s;
}

ScoreSet score_random(const MaskedMLP& net, std::uint64_t seed) {
    ScoreSet s = ParamSet::zeros_like(net);
    Rng rng(seed);
    for (int l = 0; l < net.depth(); ++l) {
        for (double& v : s.w[l]) v = rng.uniform();
        for (double& v : s.b[l]) v = rng.uniform();
    }
    return s;
}

ScoreSet score_snip(const MaskedMLP& net, const Dataset& batch, LossKind kind) {
    if (batch.n == 0) throw std::invalid_argument("score_snip: empty batch");
    ParamSet grads;
    loss_and_grad(net, batch.inputs, batch.n, batch.targets, batch.labels, kind, grads);
    ScoreSet s = ParamSet::zeros_like(net);
    for (int l = 0; l < net.depth(); ++l) {
        for (std::size_t k = 0; k < grads.w[l].size(); ++k)
            s.w[l][k] = std::abs(net.layers[l].w[k] * grads.w[l][k]);
        for (std::size_t k = 0; k < grads.b[l].size(); ++k)
            s.b[l][k] = std::abs(net.layers[l].b[k] * grads.b[l][k]);
    }
    return s;
}

ScoreSet score_grasp(const MaskedMLP& net, const Dataset& batch, LossKind kind) {
    if (batch.n == 0) throw std::invalid_argument("score_grasp: empty batch");
    ParamSet g;
    loss_and_grad(net, batch.inputs, batch.n, batch.targets, batch.labels, kind, g);
    zero_masked(net, g);  // pruned parameters are not part of the model

    double gnorm2 = 0.0, pnorm2 = 0.0;
    for (int l = 0; l < net.depth(); ++l) {
        for (double v : g.w[l]) gnorm2 += v * v;
        for (double v : g.b[l]) gnorm2 += v * v;
        for (double v : net.layers[l].w) pnorm2 += v * v;
        for (double v : net.layers[l].b) pnorm2 += v * v;
    }
    ScoreSet s = ParamSet::zeros_like(net);
    double gnorm = std::sqrt(gnorm2);
    if (gnorm == 0.0) return s;  // stationary point: Hg = 0, all scores 0

    // Hg ~ (grad(theta + d u) - grad(theta - d u)) / (2 d) * ||g||, u = g/||g||
    double delta = 1e-4 * (1.0 + std::sqrt(pnorm2));
    auto shifted = [&](double dir) {
        MaskedMLP shifted_net = net;
        for (int l = 0; l < net.depth(); ++l) {
            for (std::size_t k = 0; k < shifted_net.layers[l].w.size(); ++k)
                shifted_net.layers[l].w[k] += dir * delta * g.w[l][k] / gnorm;
            for (std::size_t k = 0; k < shifted_net.layers[l].b.size(); ++k)
                shifted_net.layers[l].b[k] += dir * delta * g.b[l][k] / gnorm;
        }
        ParamSet gs;
        loss_and_grad(shifted_net, batch.inputs, batch.n, batch.targets, batch.labels, kind, gs);
        return gs;
    };
    ParamSet gp = shifted(+1.0);
    ParamSet gm = shifted(-1.0);

    for (int l = 0; l < net.depth(); ++l) {
        for (std::size_t k = 0; k < s.w[l].size(); ++k) {
            double hg = (gp.w[l][k] - gm.w[l][k]) / (2.0 * delta) * gnorm;
            s.w[l][k] = -net.layers[l].w[k] * hg;
        }
        for (std::size_t k = 0; k < s.b[l].size(); ++k) {
            double hg = (gp.b[l][k] - gm.b[l][k]) / (2.0 * delta) * gnorm;
            s.b[l][k] = -net.layers[l].b[k] * hg;
        }
    }
    return s;
}

ScoreSet score_synflow(const MaskedMLP& net) {
    MaskedMLP abs_net = net;
    for (int l = 0; l < net.depth(); ++l) {
        for (double& v : abs_net.layers[l].w) v = std::abs(v);
        for (double& v : abs_net.layers[l].b) v = std::abs(v);
    }
    // R = sum of outputs for the all-ones input; dR/dtheta via a one-sample
    // "mse" trick would distort scaling, so backprop with unit output error
    int in_dim = net.arch.in_dim();
    std::vector<std::vector<double>> acts;
    std::vector<double> ones(in_dim, 1.0);
    forward_acts(abs_net, ones, acts);

    int L = net.depth();
    ScoreSet s = ParamSet::zeros_like(net);
    std::vector<double> delta(net.arch.out_dim(), 1.0), delta_prev;
    for (int l = L - 1; l >= 0; --l) {
        const Layer& layer = abs_net.layers[l];
        for (int j = 0; j < layer.out; ++j) s.b[l][j] = delta[j];
        for (int i = 0; i < layer.in; ++i) {
            double ai = acts[l][i];
            if (ai != 0.0)
                for (int j = 0; j < layer.out; ++j)
                    s.w[l][static_cast<std::size_t>(i) * layer.out + j] = ai * delta[j];
        }
        if (l > 0) {
            delta_prev.assign(layer.in, 0.0);
            for (int i = 0; i < layer.in; ++i) {
                if (acts[l][i] <= 0.0) continue;
                const double* wrow = layer.w.data() + static_cast<std::size_t>(i) * layer.out;
                double acc = 0.0;
                for (int j = 0; j < layer.out; ++j) acc += wrow[j] * delta[j];
                delta_prev[i] = acc;
            }
            delta.swap(delta_prev);
        }
    }
    // score = |theta| * dR/d|theta|
    for (int l = 0; l < L; ++l) {
        for (std::size_t k = 0; k < s.w[l].size(); ++k) s.w[l][k] *= abs_net.layers[l].w[k];
        for (std::size_t k = 0; k < s.b[l].size(); ++k) s.b[l][k] *= abs_net.layers[l].b[k];
    }
    return s;
}

ScoreSet compute_scores(Method m, const MaskedMLP& net, const Dataset* batch, LossKind kind,
                        std::uint64_t seed) {
    switch (m) {
        case Method::Magnitude: return score_magnitude(net);
        case Method::Random: return score_random(net, seed);
        case Method::Snip:
            if (!batch) throw std::invalid_argument("snip needs a data batch");
            return score_snip(net, *batch, kind);
        case Method::Grasp:
            if (!batch) throw std::invalid_argument("grasp needs a data batch");
            return score_grasp(net, *batch, kind);
        case Method::Synflow: return score_synflow(net);
    }
    throw std::invalid_argument("bad method");
}

namespace {

struct Entry {
    double score;
    int layer;
    int row;
    int col;
    std::size_t flat;
};

bool entry_less(const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;  // higher score first
    if (a.layer != b.layer) return a.layer < b.layer;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
}

void derive_bias_masks(const MaskedMLP& net, MaskSet& masks) {
    for (int l = 0; l < net.depth(); ++l) {
        const Layer& layer = net.layers[l];
        for (int j = 0; j < layer.out; ++j) {
            bool any = false;
            for (int i = 0; i < layer.in && !any; ++i)
                any = masks.w[l][static_cast<std::size_t>(i) * layer.out + j] != 0;
            masks.b[l][j] = (any && layer.b_mask[j]) ? 1 : 0;
        }
    }
}

}  // namespace

MaskSet select_mask(const ScoreSet& scores, const MaskedMLP& net, double rho, Scope scope) {
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in (0,1]");
    MaskSet masks = MaskSet::zeros_like(net);

    auto fill_top = [&](std::vector<Entry>& entries, std::size_t keep) {
        keep = std::min(keep, entries.size());
        std::sort(entries.begin(), entries.end(), entry_less);
        for (std::size_t k = 0; k < keep; ++k)
            masks.w[entries[k].layer][entries[k].flat] = 1;
    };

    if (scope == Scope::Global) {
        std::vector<Entry> entries;
        std::size_t total = 0;
        for (int l = 0; l < net.depth(); ++l) {
            const Layer& layer = net.layers[l];
            total += layer.w.size();
            for (int i = 0; i < layer.in; ++i)
                for (int j = 0; j < layer.out; ++j) {
                    std::size_t flat = static_cast<std::size_t>(i) * layer.out + j;
                    if (layer.w_mask[flat])
                        entries.push_back({scores.w[l][flat], l, i, j, flat});
                }
        }
        fill_top(entries, static_cast<std::size_t>(std::llround(rho * total)));
    } else {
        for (int l = 0; l < net.depth(); ++l) {
            const Layer& layer = net.layers[l];
            std::vector<Entry> entries;
            for (int i = 0; i < layer.in; ++i)
                for (int j = 0; j < layer.out; ++j) {
                    std::size_t flat = static_cast<std::size_t>(i) * layer.out + j;
                    if (layer.w_mask[flat])
                        entries.push_back({scores.w[l][flat], l, i, j, flat});
                }
            fill_top(entries, static_cast<std::size_t>(std::llround(rho * layer.w.size())));
        }
    }
    derive_bias_masks(net, masks);
    return masks;
}

PruneStrategy PruneStrategy::singleshot(int synflow_rounds) {
    PruneStrategy s;
    s.kind = Kind::Singleshot;
    s.synflow_rounds = synflow_rounds;
    return s;
}

PruneStrategy PruneStrategy::multishot(int rounds, int epochs) {
    PruneStrategy s;
    s.kind = Kind::Multishot;
    s.rounds = rounds;
    s.epochs_per_round = epochs;
    return s;
}

PruneStrategy PruneStrategy::edge_popup(bool anneal, int epochs) {
    PruneStrategy s;
    s.kind = Kind::EdgePopup;
    s.anneal = anneal;
    s.edge_popup_epochs = epochs;
    return s;
}

std::string strategy_name(const PruneStrategy& s) {
    switch (s.kind) {
        case PruneStrategy::Kind::Singleshot:
            return s.synflow_rounds > 1 ? "singleshot" + std::to_string(s.synflow_rounds)
                                        : "singleshot";
        case PruneStrategy::Kind::Multishot:
            return s.scope == Scope::LocalPerLayer ? "multishot-local" : "multishot";
        case PruneStrategy::Kind::EdgePopup:
            return s.anneal ? "edge-popup-anneal" : "edge-popup";
    }
    return "?";
}

namespace {

Dataset first_batch(const Dataset& train_set, int batch_size, std::uint64_t seed) {
    // deterministic batch of the training data for one-shot scoring
    std::vector<int> idx(train_set.n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);
    Dataset b;
    b.task = train_set.task;
    b.in_dim = train_set.in_dim;
    b.out_dim = train_set.out_dim;
    b.n = std::min(batch_size, train_set.n);
    for (int k = 0; k < b.n; ++k) {
        int i = idx[k];
        for (int j = 0; j < b.in_dim; ++j)
            b.inputs.push_back(train_set.inputs[static_cast<std::size_t>(i) * b.in_dim + j]);
        if (!train_set.targets.empty())
            for (int j = 0; j < b.out_dim; ++j)
                b.targets.push_back(train_set.targets[static_cast<std::size_t>(i) * b.out_dim + j]);
        if (!train_set.labels.empty()) b.labels.push_back(train_set.labels[i]);
    }
    return b;
}

}  // namespace

MaskSet singleshot(const MaskedMLP& net, Method method, double rho, const Dataset* train_set,
                   LossKind kind, int synflow_rounds, Scope scope, std::uint64_t seed) {
    if (method_needs_data(method) && !train_set)
        throw std::invalid_argument(method_name(method) + " needs a dataset");
    MaskedMLP work = net;
    if (method == Method::Synflow && synflow_rounds > 1) {
        MaskSet masks = MaskSet::ones_like(net);
        for (int r = 1; r <= synflow_rounds; ++r) {
            double target = std::pow(rho, static_cast<double>(r) / synflow_rounds);
            ScoreSet scores = score_synflow(work);
            masks = select_mask(scores, work, target, scope);
            apply_mask(work, masks);
        }
        return masks;
    }
    std::optional<Dataset> batch;
    if (method_needs_data(method)) batch = first_batch(*train_set, 32, derive_seed(seed, 11));
    ScoreSet scores =
        compute_scores(method, work, batch ? &*batch : nullptr, kind, derive_seed(seed, 13));
    return select_mask(scores, work, rho, scope);
}

MaskSet multishot(const MaskedMLP& net, Method method, double rho, const Dataset& train_set,
                  LossKind kind, int rounds, int epochs_per_round, Scope scope,
                  std::uint64_t seed, std::vector<double>* round_sparsities) {
    if (rounds < 1) throw std::invalid_argument("multishot needs rounds >= 1");
    if (round_sparsities) round_sparsities->clear();
    MaskedMLP initial = net;  // stored initial parameters for the resets
    MaskedMLP work = net;
    MaskSet masks = MaskSet::ones_like(net);
    for (int r = 1; r <= rounds; ++r) {
        Dataset dummy_test;
        dummy_test.task = train_set.task;
        dummy_test.in_dim = train_set.in_dim;
        dummy_test.out_dim = train_set.out_dim;
        TrainOptions opt;
        opt.epochs = epochs_per_round;
        opt.seed = derive_seed(seed, 101, r);
        train(work, train_set, dummy_test, kind, opt);

        std::optional<Dataset> batch;
        if (method_needs_data(method))
            batch = first_batch(train_set, 32, derive_seed(seed, 102, r));
        ScoreSet scores = compute_scores(method, work, batch ? &*batch : nullptr, kind,
                                         derive_seed(seed, 103, r));
        double target = std::pow(rho, static_cast<double>(r) / rounds);
        masks = select_mask(scores, work, target, scope);

        // reset to initial parameters for the next round
        work = initial;
        apply_mask(work, masks);
        if (round_sparsities) round_sparsities->push_back(sparsity(work));
    }
    return masks;
}

namespace {

// per-layer keep-fraction masks for edge-popup: weights take the top
// round(frac * N_l) scores; biases are kept when their score clears the
// layer's weight cutoff
void edge_popup_masks(const std::vector<std::vector<double>>& sw,
                      const std::vector<std::vector<double>>& sb, double frac, MaskSet& masks) {
    for (std::size_t l = 0; l < sw.size(); ++l) {
        const std::vector<double>& s = sw[l];
        std::size_t keep = static_cast<std::size_t>(std::llround(frac * s.size()));
        keep = std::min(std::max<std::size_t>(keep, 1), s.size());
        std::vector<std::pair<double, std::size_t>> order(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) order[k] = {s[k], k};
        std::nth_element(order.begin(), order.begin() + (keep - 1), order.end(),
                         [](const auto& a, const auto& b) {
                             if (a.first != b.first) return a.first > b.first;
                             return a.second < b.second;
                         });
        auto cutoff = order[keep - 1];
        std::fill(masks.w[l].begin(), masks.w[l].end(), std::uint8_t{0});
        for (std::size_t k = 0; k < keep; ++k) masks.w[l][order[k].second] = 1;
        for (std::size_t k = 0; k < sb[l].size(); ++k)
            masks.b[l][k] = sb[l][k] >= cutoff.first ? 1 : 0;
    }
}

}  // namespace

MaskSet edge_popup(const MaskedMLP& net, double rho, int epochs, bool anneal,
                   const Dataset& train_set, LossKind kind, std::uint64_t seed, double base_lr) {
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in (0,1]");
    Rng rng(derive_seed(seed, 7));
    std::vector<std::vector<double>> sw, sb, vw, vb;
    for (const Layer& layer : net.layers) {
        sw.emplace_back(layer.w.size());
        sb.emplace_back(layer.b.size());
        vw.emplace_back(layer.w.size(), 0.0);
        vb.emplace_back(layer.b.size(), 0.0);
        for (double& v : sw.back()) v = rng.uniform();
        for (double& v : sb.back()) v = rng.uniform();
    }

    const double momentum = 0.9, weight_decay = 5e-4;
    MaskSet masks = MaskSet::ones_like(net);
    MaskedMLP eff = net;
    ParamSet grads;
    std::vector<int> order(train_set.n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(seed, 8));
    std::vector<double> bx, bt;
    std::vector<int> bl;

    auto keep_fraction = [&](int epoch_1based) {
        return anneal ? std::pow(rho, std::min(epoch_1based, 10) / 10.0) : rho;
    };

    for (int epoch = 1; epoch <= epochs; ++epoch) {
        double frac = keep_fraction(epoch);
        double lr = 0.5 * base_lr * (1.0 + std::cos(M_PI * (epoch - 1) / epochs));
        shuffle_rng.shuffle(order);
        for (int start = 0; start < train_set.n; start += 32) {
            int bn = std::min(32, train_set.n - start);
            bx.clear();
            bt.clear();
            bl.clear();
            for (int k = 0; k < bn; ++k) {
                int i = order[start + k];
                for (int j = 0; j < train_set.in_dim; ++j)
                    bx.push_back(train_set.inputs[static_cast<std::size_t>(i) * train_set.in_dim + j]);
                if (!train_set.targets.empty())
                    for (int j = 0; j < train_set.out_dim; ++j)
                        bt.push_back(
                            train_set.targets[static_cast<std::size_t>(i) * train_set.out_dim + j]);
                if (!train_set.labels.empty()) bl.push_back(train_set.labels[i]);
            }
            edge_popup_masks(sw, sb, frac, masks);
            eff = net;
            apply_mask(eff, masks);
            // straight-through: raw gradients of the masked forward pass,
            // multiplied by the frozen parameter values
            loss_and_grad(eff, bx, bn, bt, bl, kind, grads);
            for (int l = 0; l < net.depth(); ++l) {
                for (std::size_t k = 0; k < sw[l].size(); ++k) {
                    double g = grads.w[l][k] * net.layers[l].w[k] + weight_decay * sw[l][k];
                    vw[l][k] = momentum * vw[l][k] - lr * g;
                    sw[l][k] += vw[l][k];
                }
                for (std::size_t k = 0; k < sb[l].size(); ++k) {
                    double g = grads.b[l][k] * net.layers[l].b[k] + weight_decay * sb[l][k];
                    vb[l][k] = momentum * vb[l][k] - lr * g;
                    sb[l][k] += vb[l][k];
                }
            }
        }
    }
    double final_frac = (anneal && epochs > 0) ? keep_fraction(epochs) : rho;
    edge_popup_masks(sw, sb, final_frac, masks);
    return masks;
}

CollapseReport detect_layer_collapse(const MaskSet& masks, const Architecture& arch) {
    CollapseReport rep;
    int L = arch.depth();
    std::vector<char> reach(arch.widths[0], 1);
    for (int l = 0; l < L; ++l) {
        int n_in = arch.widths[l], n_out = arch.widths[l + 1];
        bool any_kept = false;
        std::vector<char> next(n_out, 0);
        for (int i = 0; i < n_in; ++i)
            for (int j = 0; j < n_out; ++j) {
                if (!masks.w[l][static_cast<std::size_t>(i) * n_out + j]) continue;
                any_kept = true;
                if (reach[i]) next[j] = 1;
            }
        if (!any_kept) rep.collapsed_layers.push_back(l + 1);
        reach = std::move(next);
    }
    rep.flow_interrupted = std::none_of(reach.begin(), reach.end(), [](char c) { return c != 0; });
    return rep;
}

}  // namespace plantbench
