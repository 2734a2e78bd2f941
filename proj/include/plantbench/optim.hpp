#pragma once

#include <cstdint>

#include "plantbench/data.hpp"
#include "plantbench/net.hpp"

namespace plantbench {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    long step = 0;
    ParamSet m, v;

    static AdamState init_for(const MaskedMLP& net, const AdamConfig& cfg = {});
};

// One bias-corrected Adam update. Masked parameters are skipped entirely:
// their moments stay zero and the parameters stay exactly 0.
void adam_step(AdamState& state, MaskedMLP& net, const ParamSet& grads);

// Test metric: classification accuracy for SoftmaxCrossEntropy, mean squared
// error (over samples and output dimensions) for Mse.
double evaluate_metric(const MaskedMLP& net, const Dataset& data, LossKind kind);

LossKind loss_for_task(TaskKind task);

struct TrainOptions {
    int epochs = 10;
    int batch_size = 32;
    double lr = 1e-3;
    std::uint64_t seed = 0;  // batch shuffling
};

// Trains only unmasked parameters (masks stay fixed); returns the final test
// metric. epochs = 0 leaves the net untouched and just evaluates.
double train(MaskedMLP& net, const Dataset& train_set, const Dataset& test_set, LossKind kind,
             const TrainOptions& opt);

}  // namespace plantbench
