#include "plantbench/optim.hpp"

#include <cmath>
#include <numeric>

#include "plantbench/rng.hpp"

namespace plantbench {

AdamState AdamState::init_for(const MaskedMLP& net, const AdamConfig& cfg) {
    AdamState s;
    s.cfg = cfg;
    s.m = ParamSet::zeros_like(net);
    s.v = ParamSet::zeros_like(net);
    return s;
}

void adam_step(AdamState& state, MaskedMLP& net, const ParamSet& grads) {
    state.step += 1;
    const AdamConfig& c = state.cfg;
    double bc1 = 1.0 - std::pow(c.beta1, state.step);
    double bc2 = 1.0 - std::pow(c.beta2, state.step);
    for (int l = 0; l < net.depth(); ++l) {
        Layer& layer = net.layers[l];
        auto update = [&](std::vector<double>& p, const std::vector<std::uint8_t>& mask,
                          std::vector<double>& m, std::vector<double>& v,
                          const std::vector<double>& g) {
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (!mask[k]) continue;
                m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
                v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
                double mhat = m[k] / bc1;
                double vhat = v[k] / bc2;
                p[k] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
            }
        };
        update(layer.w, layer.w_mask, state.m.w[l], state.v.w[l], grads.w[l]);
        update(layer.b, layer.b_mask, state.m.b[l], state.v.b[l], grads.b[l]);
    }
}

LossKind loss_for_task(TaskKind task) {
    return task == TaskKind::Circle ? LossKind::SoftmaxCrossEntropy : LossKind::Mse;
}

double evaluate_metric(const MaskedMLP& net, const Dataset& data, LossKind kind) {
    if (data.n == 0) return 0.0;
    std::vector<double> x(data.in_dim);
    std::vector<std::vector<double>> acts;
    if (kind == LossKind::SoftmaxCrossEntropy) {
        int correct = 0;
        for (int i = 0; i < data.n; ++i) {
            std::copy(data.inputs.begin() + static_cast<std::size_t>(i) * data.in_dim,
                      data.inputs.begin() + static_cast<std::size_t>(i + 1) * data.in_dim,
                      x.begin());
            forward_acts(net, x, acts);
            const std::vector<double>& out = acts.back();
            int arg = 0;
            for (std::size_t c = 1; c < out.size(); ++c)
                if (out[c] > out[arg]) arg = static_cast<int>(c);
            if (arg == data.labels[i]) ++correct;
        }
        return static_cast<double>(correct) / data.n;
    }
    return loss_only(net, data.inputs, data.n, data.targets, data.labels, kind);
}

double train(MaskedMLP& net, const Dataset& train_set, const Dataset& test_set, LossKind kind,
             const TrainOptions& opt) {
    if (train_set.n == 0) throw std::invalid_argument("train: empty dataset");
    AdamState state = AdamState::init_for(net, AdamConfig{opt.lr});
    Rng rng(opt.seed);
    std::vector<int> order(train_set.n);
    std::iota(order.begin(), order.end(), 0);
    ParamSet grads;
    std::vector<double> bx, bt;
    std::vector<int> bl;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        rng.shuffle(order);
        for (int start = 0; start < train_set.n; start += opt.batch_size) {
            int bn = std::min(opt.batch_size, train_set.n - start);
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
            loss_and_grad(net, bx, bn, bt, bl, kind, grads);
            zero_masked(net, grads);
            adam_step(state, net, grads);
        }
    }
    return evaluate_metric(net, test_set, kind);
}

}  // namespace plantbench
