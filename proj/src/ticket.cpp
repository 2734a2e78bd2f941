#include "plantbench/ticket.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace plantbench {

void SparseTicket::validate() const {
    arch.validate();
    for (const WeightEntry& e : weights) {
        if (e.value == 0.0) throw std::invalid_argument("ticket stores a zero weight");
        if (e.layer < 1 || e.layer > arch.depth() || e.row < 0 ||
            e.row >= arch.widths[e.layer - 1] || e.col < 0 || e.col >= arch.widths[e.layer])
            throw std::invalid_argument("ticket weight entry out of bounds");
    }
    for (const BiasEntry& e : biases) {
        if (e.value == 0.0) throw std::invalid_argument("ticket stores a zero bias");
        if (e.layer < 1 || e.layer > arch.depth() || e.idx < 0 || e.idx >= arch.widths[e.layer])
            throw std::invalid_argument("ticket bias entry out of bounds");
    }
}

int SparseTicket::in_degree(int layer, int neuron) const {
    int k = 0;
    for (const WeightEntry& e : weights)
        if (e.layer == layer && e.col == neuron) ++k;
    for (const BiasEntry& e : biases)
        if (e.layer == layer && e.idx == neuron) ++k;
    return k;
}

int SparseTicket::max_in_degree(int layer) const {
    int best = 0;
    for (int i = 0; i < arch.widths[layer]; ++i) best = std::max(best, in_degree(layer, i));
    return best;
}

void KnotGrid::validate() const {
    if (knots.empty()) throw std::invalid_argument("knot grid is empty");
    if (signs.size() != knots.size())
        throw std::invalid_argument("knot grid needs one sign per knot");
    for (std::size_t j = 1; j < knots.size(); ++j)
        if (!(knots[j] > knots[j - 1]))
            throw std::invalid_argument("knots must be strictly increasing");
    for (int p : signs)
        if (p != 1 && p != -1) throw std::invalid_argument("knot signs must be +-1");
    if (signs[0] != 1) throw std::invalid_argument("first knot sign must be +1");
}

KnotGrid KnotGrid::equidistant(double lo, double hi, int n, bool alternating_signs) {
    if (n < 1) throw std::invalid_argument("need at least one knot");
    KnotGrid g;
    for (int j = 0; j < n; ++j) {
        g.knots.push_back(n == 1 ? lo : lo + (hi - lo) * j / (n - 1));
        g.signs.push_back(alternating_signs && (j % 2 == 1) ? -1 : 1);
    }
    return g;
}

PwlCoeffs univariate_pwl(const std::function<double(double)>& f, const KnotGrid& grid) {
    grid.validate();
    const std::vector<double>& s = grid.knots;
    int n = static_cast<int>(s.size());
    double eps = n > 1 ? (s.back() - s.front()) / (n - 1) : 1e-3;

    // segment slopes m_j on [s_j, s_{j+1}], with s_{N+1} := s_N + eps
    std::vector<double> m(n);
    for (int j = 0; j < n; ++j) {
        double s1 = s[j];
        double s2 = j + 1 < n ? s[j + 1] : s[j] + eps;
        m[j] = (f(s2) - f(s1)) / (s2 - s1);
    }
    PwlCoeffs c;
    c.a.resize(n);
    c.a[0] = m[0];
    for (int j = 1; j < n; ++j) c.a[j] = m[j] - m[j - 1];
    // mixed signs: phi(-(x-s_j)) = phi(x-s_j) - (x-s_j) flattens every
    // segment slope by the same amount; a_1 rides the linear term
    // phi(x - s_1) on [s_1, s_N] and absorbs it back
    double corr = 0.0;
    for (int j = 0; j < n; ++j)
        if (grid.signs[j] < 0) corr += c.a[j];
    c.a[0] += corr;
    c.b = f(s[0]);
    for (int j = 0; j < n; ++j)
        c.b -= c.a[j] * std::max(grid.signs[j] * (s[0] - s[j]), 0.0);
    return c;
}

double pwl_eval(const KnotGrid& grid, const PwlCoeffs& c, double x) {
    double y = c.b;
    for (std::size_t j = 0; j < grid.knots.size(); ++j)
        y += c.a[j] * std::max(grid.signs[j] * (x - grid.knots[j]), 0.0);
    return y;
}

SparseTicket build_relu_ticket(int depth) {
    if (depth < 2)
        throw std::invalid_argument(
            "relu ticket needs depth >= 2 (the output layer is linear)");
    SparseTicket t;
    t.task = TaskKind::Relu;
    t.head = HeadKind::Linear;
    t.arch = Architecture(std::vector<int>(depth + 1, 1));
    for (int l = 1; l <= depth; ++l) t.weights.push_back({l, 0, 0, 1.0});
    return t;
}

SparseTicket build_circle_ticket(int depth, int knots) {
    if (depth < 4)
        throw std::invalid_argument("circle ticket needs depth >= 4 (fold 2, squaring 1, head 1)");
    if (knots < 2) throw std::invalid_argument("circle ticket needs at least 2 knots");
    SparseTicket t;
    t.task = TaskKind::Circle;
    t.head = HeadKind::SoftmaxLogits;

    // layers: 1-2 fold to the first quadrant, 3..depth-2 mirror, depth-1
    // squaring PWL, depth head
    std::vector<int> widths{2, 4, 2};
    int first_mirror = 3, last_mirror = depth - 2;
    for (int l = first_mirror; l <= last_mirror; ++l) widths.push_back(3);
    widths.push_back(2 * knots);
    widths.push_back(4);
    t.arch = Architecture(widths);

    auto w = [&](int layer, int row, int col, double v) {
        if (v != 0.0) t.weights.push_back({layer, row, col, v});
    };
    auto b = [&](int layer, int idx, double v) {
        if (v != 0.0) t.biases.push_back({layer, idx, v});
    };

    // layer 1: [phi(x1), phi(-x1), phi(x2), phi(-x2)]
    w(1, 0, 0, 1.0);
    w(1, 0, 1, -1.0);
    w(1, 1, 2, 1.0);
    w(1, 1, 3, -1.0);
    // layer 2: (|x1|, |x2|)
    w(2, 0, 0, 1.0);
    w(2, 1, 0, 1.0);
    w(2, 2, 1, 1.0);
    w(2, 3, 1, 1.0);

    // mirror layers: fold the represented vector (u1, u2 + u3) along the axis
    // at angle pi/2^(l-1); outputs (phi(par), phi(perp), phi(-perp))
    for (int l = first_mirror; l <= last_mirror; ++l) {
        double ang = M_PI / std::pow(2.0, l - 1);
        double a1 = std::cos(ang), a2 = std::sin(ang);
        int prev = t.arch.widths[l - 1];
        w(l, 0, 0, a1);
        w(l, 0, 1, a2);
        w(l, 0, 2, -a2);
        for (int r = 1; r < prev; ++r) {
            w(l, r, 0, a2);
            w(l, r, 1, -a1);
            w(l, r, 2, a1);
        }
    }

    // squaring layer: PWL bases for h(x) = x^2 on the parallel and
    // perpendicular components
    bool have_mirror = last_mirror >= first_mirror;
    double pmax = have_mirror ? std::sqrt(2.0) : 1.0;
    double qmax = have_mirror
                      ? std::sqrt(2.0) * std::sin(M_PI / std::pow(2.0, last_mirror - 1))
                      : 1.0;
    KnotGrid gp = KnotGrid::equidistant(0.0, pmax, knots);
    KnotGrid gq = KnotGrid::equidistant(0.0, qmax, knots);
    auto square = [](double v) { return v * v; };
    PwlCoeffs cp = univariate_pwl(square, gp);
    PwlCoeffs cq = univariate_pwl(square, gq);

    int sq_layer = depth - 1;
    int prev = t.arch.widths[sq_layer - 1];
    for (int j = 0; j < knots; ++j) {
        w(sq_layer, 0, j, 1.0);  // parallel component from u1
        b(sq_layer, j, -gp.knots[j]);
        // perpendicular component: u2 + u3 (|q| after the fold), or |x2|
        // straight from the fold layers when there are no mirrors
        w(sq_layer, 1, knots + j, 1.0);
        if (prev == 3) w(sq_layer, 2, knots + j, 1.0);
        b(sq_layer, knots + j, -gq.knots[j]);
    }

    // head: logits (0, g-0.2, 2g-0.7, 3g-1.4) over g = pwl_p + pwl_q; the
    // lines cross exactly at the ring thresholds, so argmax implements the
    // bands
    const double slope[4] = {0.0, 1.0, 2.0, 3.0};
    const double inter[4] = {0.0, -0.2, -0.7, -1.4};
    for (int c = 0; c < 4; ++c) {
        for (int j = 0; j < knots; ++j) {
            w(depth, j, c, slope[c] * cp.a[j]);
            w(depth, knots + j, c, slope[c] * cq.a[j]);
        }
        b(depth, c, slope[c] * (cp.b + cq.b) + inter[c]);
    }
    t.validate();
    return t;
}

SparseTicket build_helix_ticket(int depth, int knots) {
    if (depth < 3)
        throw std::invalid_argument("helix ticket needs depth >= 3 (shift, knots, head)");
    if (knots < 2) throw std::invalid_argument("helix ticket needs at least 2 knots");
    SparseTicket t;
    t.task = TaskKind::Helix;
    t.head = HeadKind::Linear;

    std::vector<int> widths{1, 1, knots + 1};
    for (int l = 3; l < depth; ++l) widths.push_back(3);
    widths.push_back(3);
    t.arch = Architecture(widths);

    auto w = [&](int layer, int row, int col, double v) {
        if (v != 0.0) t.weights.push_back({layer, row, col, v});
    };
    auto b = [&](int layer, int idx, double v) {
        if (v != 0.0) t.biases.push_back({layer, idx, v});
    };

    // layer 1: t = x + 1 in [0,2] so later identities are plain ReLUs
    w(1, 0, 0, 1.0);
    b(1, 0, 1.0);

    // layer 2: knot neurons phi(p_j (t - s_j)) on an equidistant grid of
    // [0,2] with alternating signs, plus a carry neuron for the f3 path
    KnotGrid grid = KnotGrid::equidistant(0.0, 2.0, knots, true);
    for (int j = 0; j < knots; ++j) {
        w(2, 0, j, static_cast<double>(grid.signs[j]));
        b(2, j, -grid.signs[j] * grid.knots[j]);
    }
    w(2, 0, knots, 1.0);  // carry t

    auto f_shift = [](const std::function<double(double)>& f) {
        return [f](double t) { return f(t - 1.0); };
    };
    std::function<double(double)> f1 = [](double x) { return helix_targets(x)[0]; };
    std::function<double(double)> f2 = [](double x) { return helix_targets(x)[1]; };
    PwlCoeffs c1 = univariate_pwl(f_shift(f1), grid);
    PwlCoeffs c2 = univariate_pwl(f_shift(f2), grid);

    if (depth == 3) {
        // head combines the knot neurons directly (linear head, no shift)
        for (int j = 0; j < knots; ++j) {
            w(3, j, 0, c1.a[j]);
            w(3, j, 1, c2.a[j]);
        }
        b(3, 0, c1.b);
        b(3, 1, c2.b);
        w(3, knots, 2, 3.0 / 8.0);
        b(3, 2, 0.25);  // f3 = (3/8) t + 1/4 with t = x + 1
        t.validate();
        return t;
    }

    // layer 3: (f1+1, f2+1, t); the +1 keeps hidden values nonnegative and is
    // subtracted again at the head
    for (int j = 0; j < knots; ++j) {
        w(3, j, 0, c1.a[j]);
        w(3, j, 1, c2.a[j]);
    }
    b(3, 0, c1.b + 1.0);
    b(3, 1, c2.b + 1.0);
    w(3, knots, 2, 1.0);

    // identity layers
    for (int l = 4; l < depth; ++l)
        for (int j = 0; j < 3; ++j) w(l, j, j, 1.0);

    // head: undo the +1 shifts; f3 = (3/8) t + 1/4 with t = x + 1
    w(depth, 0, 0, 1.0);
    b(depth, 0, -1.0);
    w(depth, 1, 1, 1.0);
    b(depth, 1, -1.0);
    w(depth, 2, 2, 3.0 / 8.0);
    b(depth, 2, 0.25);
    t.validate();
    return t;
}

SparseTicket build_ticket(TaskKind task, int depth, int knots) {
    switch (task) {
        case TaskKind::Relu: return build_relu_ticket(depth);
        case TaskKind::Circle: return build_circle_ticket(depth, knots > 0 ? knots : 10);
        case TaskKind::Helix: return build_helix_ticket(depth, knots > 0 ? knots : 30);
    }
    throw std::invalid_argument("build_ticket: bad task");
}

MaskedMLP densify(const SparseTicket& t) {
    t.validate();
    MaskedMLP net;
    net.arch = t.arch;
    for (int l = 0; l < t.arch.depth(); ++l) {
        Layer layer;
        layer.in = t.arch.widths[l];
        layer.out = t.arch.widths[l + 1];
        layer.w.assign(static_cast<std::size_t>(layer.in) * layer.out, 0.0);
        layer.b.assign(layer.out, 0.0);
        layer.w_mask.assign(layer.w.size(), 0);
        layer.b_mask.assign(layer.b.size(), 0);
        net.layers.push_back(std::move(layer));
    }
    for (const WeightEntry& e : t.weights) {
        net.layers[e.layer - 1].wt(e.row, e.col) = e.value;
        net.layers[e.layer - 1].wm(e.row, e.col) = 1;
    }
    for (const BiasEntry& e : t.biases) {
        net.layers[e.layer - 1].b[e.idx] = e.value;
        net.layers[e.layer - 1].b_mask[e.idx] = 1;
    }
    return net;
}

SparseTicket sparsify(const MaskedMLP& net, TaskKind task, HeadKind head) {
    SparseTicket t;
    t.arch = net.arch;
    t.task = task;
    t.head = head;
    for (int l = 0; l < net.depth(); ++l) {
        const Layer& layer = net.layers[l];
        for (int i = 0; i < layer.in; ++i)
            for (int j = 0; j < layer.out; ++j)
                if (layer.wm(i, j) && layer.wt(i, j) != 0.0)
                    t.weights.push_back({l + 1, i, j, layer.wt(i, j)});
        for (int j = 0; j < layer.out; ++j)
            if (layer.b_mask[j] && layer.b[j] != 0.0)
                t.biases.push_back({l + 1, j, layer.b[j]});
    }
    return t;
}

std::vector<double> eval_ticket(const SparseTicket& t, const std::vector<double>& x) {
    return forward(densify(t), x);
}

double ticket_sparsity_in(const SparseTicket& t, const Architecture& mother_arch) {
    if (mother_arch.depth() != t.arch.depth())
        throw std::invalid_argument("ticket_sparsity_in: depth mismatch");
    for (std::size_t l = 0; l < t.arch.widths.size(); ++l)
        if (mother_arch.widths[l] < t.arch.widths[l])
            throw std::invalid_argument("ticket_sparsity_in: mother narrower than ticket at layer " +
                                        std::to_string(l));
    return static_cast<double>(t.weights.size()) /
           static_cast<double>(total_weight_count(mother_arch));
}

}  // namespace plantbench
