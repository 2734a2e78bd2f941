#pragma once

#include <functional>
#include <vector>

#include "plantbench/data.hpp"
#include "plantbench/net.hpp"

namespace plantbench {

enum class HeadKind { Linear, SoftmaxLogits };

struct WeightEntry {
    int layer;  // 1-based weight layer
    int row;    // source neuron in layer-1
    int col;    // destination neuron in layer
    double value;
};

struct BiasEntry {
    int layer;  // 1-based
    int idx;    // neuron index
    double value;
};

// Explicit sparse target network: only the nonzero parameters are stored.
struct SparseTicket {
    Architecture arch;
    std::vector<WeightEntry> weights;
    std::vector<BiasEntry> biases;
    TaskKind task = TaskKind::Relu;
    HeadKind head = HeadKind::Linear;

    void validate() const;
    // in-degree k_i of a neuron: nonzero incoming weights plus 1 if the bias
    // is nonzero
    int in_degree(int layer, int neuron) const;
    int max_in_degree(int layer) const;
};

// Knots s_1 < ... < s_N with signs p_j in {-1,+1} for the basis
// phi(p_j (x - s_j)).
struct KnotGrid {
    std::vector<double> knots;
    std::vector<int> signs;

    void validate() const;
    static KnotGrid equidistant(double lo, double hi, int n, bool alternating_signs = false);
};

struct PwlCoeffs {
    std::vector<double> a;
    double b = 0.0;
};

// Coefficients of g(x) = sum_j a_j phi(p_j (x - s_j)) + b with
// a_j = m_j - m_{j-1} (slope changes of f on the grid) and b anchoring
// g(s_1) = f(s_1). For mixed signs (p_1 must stay +1), a_1 additionally
// absorbs sum of a_j over negative-sign knots so that g still interpolates f
// at every knot on [s_1, s_N].
PwlCoeffs univariate_pwl(const std::function<double(double)>& f, const KnotGrid& grid);

double pwl_eval(const KnotGrid& grid, const PwlCoeffs& c, double x);

// phi(x) as a single-neuron-per-layer chain of unit weights, zero biases.
// Needs at least one hidden layer (L >= 2) since the output layer is linear.
SparseTicket build_relu_ticket(int depth);

// 4-class ring classifier on [-1,1]^2: two folding layers, one mirror layer
// per extra unit of depth, a squared-radius PWL layer, and a linear logit
// head with ring thresholds at squared radii 0.2 / 0.5 / 0.7.
SparseTicket build_circle_ticket(int depth, int knots = 10);

// Helix regression head (f1, f2, f3): input shift to [0,2], shared knot
// layer, PWL combinations for f1/f2, single-neuron identity path for f3.
SparseTicket build_helix_ticket(int depth, int knots = 30);

SparseTicket build_ticket(TaskKind task, int depth, int knots = 0);

// Dense embedding of the ticket: masks keep exactly the stored entries.
MaskedMLP densify(const SparseTicket& t);
// Inverse of densify over the masked support.
SparseTicket sparsify(const MaskedMLP& net, TaskKind task, HeadKind head);

std::vector<double> eval_ticket(const SparseTicket& t, const std::vector<double>& x);

// nonzero weight entries of t / weight slots of the mother architecture
double ticket_sparsity_in(const SparseTicket& t, const Architecture& mother_arch);

}  // namespace plantbench
