#include "plantbench/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace plantbench {

std::optional<MatchQuality> match_quality(const std::vector<double>& theta,
                                          const std::vector<double>& m) {
    if (theta.size() != m.size())
        throw std::invalid_argument("match_quality: dimension mismatch");
    double mm = 0.0, tm = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        mm += m[k] * m[k];
        tm += theta[k] * m[k];
    }
    if (mm == 0.0) return std::nullopt;
    MatchQuality r;
    r.lambda = tm / mm;
    double q2 = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        double d = theta[k] - r.lambda * m[k];
        q2 += d * d;
    }
    r.q = std::sqrt(q2);
    return r;
}

namespace {

struct NeuronParams {
    bool has_bias = false;
    double bias = 0.0;
    std::vector<int> rows;       // target source indices
    std::vector<double> values;  // target weights, same order as rows
};

NeuronParams collect_neuron(const SparseTicket& t, int layer, int neuron) {
    NeuronParams p;
    for (const BiasEntry& e : t.biases)
        if (e.layer == layer && e.idx == neuron) {
            p.has_bias = true;
            p.bias = e.value;
        }
    for (const WeightEntry& e : t.weights)
        if (e.layer == layer && e.col == neuron) {
            p.rows.push_back(e.row);
            p.values.push_back(e.value);
        }
    return p;
}

}  // namespace

PlantResult plant(const SparseTicket& target, const MaskedMLP& mother) {
    target.validate();
    int L = target.arch.depth();
    if (mother.arch.depth() != L)
        throw std::invalid_argument("plant: depth mismatch (target " + std::to_string(L) +
                                    ", mother " + std::to_string(mother.arch.depth()) + ")");
    if (mother.arch.in_dim() != target.arch.in_dim())
        throw std::invalid_argument("plant: input dimension mismatch");
    if (mother.arch.out_dim() != target.arch.out_dim())
        throw std::invalid_argument("plant: output width must equal target output width");
    for (int l = 1; l < L; ++l)
        if (mother.arch.widths[l] < target.arch.widths[l])
            throw std::invalid_argument("plant: mother width " +
                                        std::to_string(mother.arch.widths[l]) +
                                        " < target width " +
                                        std::to_string(target.arch.widths[l]) + " in layer " +
                                        std::to_string(l));

    PlantResult res;
    res.mother = mother;
    PlantReport& rep = res.report;
    rep.target_arch = target.arch;
    rep.mother_arch = mother.arch;
    rep.placement.resize(L);
    rep.neuron_scales.resize(L);
    rep.lambda_out.assign(target.arch.out_dim(), 1.0);

    // scaling factors for the input are 1
    std::vector<double> lam_old(target.arch.in_dim(), 1.0);
    std::vector<int> place_prev(target.arch.in_dim());
    for (std::size_t i = 0; i < place_prev.size(); ++i) place_prev[i] = static_cast<int>(i);

    for (int l = 1; l <= L; ++l) {
        int n_t = target.arch.widths[l];
        bool last = (l == L);
        Layer& mlayer = res.mother.layers[l - 1];
        rep.placement[l - 1].assign(n_t, -1);
        rep.neuron_scales[l - 1].assign(n_t, 1.0);
        std::vector<char> used(mother.arch.widths[l], 0);

        // hardest neurons first: descending in-degree, ties by index
        std::vector<int> order(n_t);
        for (int i = 0; i < n_t; ++i) order[i] = i;
        std::vector<int> degree(n_t);
        for (int i = 0; i < n_t; ++i) degree[i] = target.in_degree(l, i);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return degree[a] > degree[b]; });

        for (int i : order) {
            NeuronParams p = collect_neuron(target, l, i);
            if (!p.has_bias && p.rows.empty()) {
                // nothing to place; output neurons keep their identity slot
                if (last) rep.placement[l - 1][i] = i;
                continue;
            }
            // theta = (b, w * lam_old) over already matched sources
            std::vector<double> theta;
            std::vector<int> src_mother;
            if (p.has_bias) theta.push_back(p.bias);
            for (std::size_t k = 0; k < p.rows.size(); ++k) {
                int src = place_prev[p.rows[k]];
                if (src < 0)
                    throw std::invalid_argument("plant: target references an unplaced neuron");
                theta.push_back(p.values[k] * lam_old[p.rows[k]]);
                src_mother.push_back(src);
            }

            auto candidate_params = [&](int j) {
                std::vector<double> m;
                if (p.has_bias) m.push_back(mlayer.b[j]);
                for (int src : src_mother) m.push_back(mlayer.wt(src, j));
                return m;
            };

            int best_j = -1;
            double best_q = 0.0, best_lambda = 1.0;
            if (last) {
                // output width equals target width: the slot is fixed and
                // lambda_out absorbs the remaining scale (the head is
                // linear, so negative scalings are fine)
                best_j = i;
                auto mq = match_quality(theta, candidate_params(i));
                best_lambda = (mq && std::abs(mq->lambda) > 1e-12) ? mq->lambda : 1.0;
            } else {
                for (int j = 0; j < mother.arch.widths[l]; ++j) {
                    if (used[j]) continue;
                    auto mq = match_quality(theta, candidate_params(j));
                    if (!mq || mq->lambda <= 0.0) continue;  // ReLU needs lambda > 0
                    if (best_j < 0 || mq->q < best_q) {
                        best_j = j;
                        best_q = mq->q;
                        best_lambda = mq->lambda;
                    }
                }
                if (best_j < 0)
                    throw std::runtime_error("plant: no candidate with positive scaling for neuron " +
                                             std::to_string(i) + " in layer " + std::to_string(l));
            }

            if (p.has_bias) {
                mlayer.b[best_j] = p.bias / best_lambda;
                rep.placed_biases.push_back({l, best_j});
            }
            for (std::size_t k = 0; k < p.rows.size(); ++k) {
                mlayer.wt(src_mother[k], best_j) = p.values[k] * lam_old[p.rows[k]] / best_lambda;
                rep.placed_weights.push_back({l, src_mother[k], best_j});
            }
            used[best_j] = 1;
            rep.placement[l - 1][i] = best_j;
            rep.neuron_scales[l - 1][i] = best_lambda;
            if (last) rep.lambda_out[i] = best_lambda;
        }

        // lam_old / place_prev are indexed by target neurons of layer l
        lam_old = rep.neuron_scales[l - 1];
        place_prev = rep.placement[l - 1];
    }
    return res;
}

MaskSet planted_masks(const MaskedMLP& mother, const PlantReport& report) {
    if (!(mother.arch == report.mother_arch))
        throw std::invalid_argument("planted_masks: report does not match this mother");
    MaskedMLP tmp = mother;
    MaskSet masks = MaskSet::zeros_like(tmp);
    for (const PlacedWeight& e : report.placed_weights)
        masks.w[e.layer - 1][static_cast<std::size_t>(e.row) * mother.layers[e.layer - 1].out +
                             e.col] = 1;
    for (const PlacedBias& e : report.placed_biases) masks.b[e.layer - 1][e.idx] = 1;
    return masks;
}

MaskedMLP extract_subnet(const MaskedMLP& mother, const PlantReport& report) {
    MaskedMLP out = mother;
    apply_mask(out, planted_masks(mother, report));
    return out;
}

std::vector<double> rescaled_forward(const MaskedMLP& extracted, const PlantReport& report,
                                     const std::vector<double>& x) {
    std::vector<double> y = forward(extracted, x);
    if (y.size() != report.lambda_out.size())
        throw std::invalid_argument("rescaled_forward: lambda_out size mismatch");
    for (std::size_t j = 0; j < y.size(); ++j) y[j] *= report.lambda_out[j];
    return y;
}

std::vector<HidingLayerStats> hiding_score(const MaskedMLP& mother, const PlantReport& report) {
    MaskSet masks = planted_masks(mother, report);
    std::vector<HidingLayerStats> stats;
    for (int l = 0; l < mother.depth(); ++l) {
        const Layer& layer = mother.layers[l];
        HidingLayerStats s;
        s.layer = l + 1;
        double psum2 = 0.0, bsum2 = 0.0, pabs = 0.0, babs = 0.0;
        int np = 0, nb = 0;
        auto feed = [&](double v, bool planted) {
            double a = std::abs(v);
            if (planted) {
                psum2 += v * v;
                pabs += a;
                s.planted_max_abs = std::max(s.planted_max_abs, a);
                ++np;
            } else {
                bsum2 += v * v;
                babs += a;
                s.background_max_abs = std::max(s.background_max_abs, a);
                ++nb;
            }
        };
        for (std::size_t k = 0; k < layer.w.size(); ++k) feed(layer.w[k], masks.w[l][k]);
        for (std::size_t k = 0; k < layer.b.size(); ++k) feed(layer.b[k], masks.b[l][k]);
        s.planted_count = np;
        if (np > 0) {
            s.planted_rms = std::sqrt(psum2 / np);
            s.planted_mean_abs = pabs / np;
        }
        if (nb > 0) {
            s.background_rms = std::sqrt(bsum2 / nb);
            s.background_mean_abs = babs / nb;
        }
        if (np > 0 && nb > 0 && s.background_rms > 0.0)
            s.rms_ratio = s.planted_rms / s.background_rms;
        stats.push_back(s);
    }
    return stats;
}

}  // namespace plantbench
