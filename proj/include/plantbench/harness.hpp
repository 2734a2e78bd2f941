#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plantbench/data.hpp"
#include "plantbench/net.hpp"
#include "plantbench/plant.hpp"
#include "plantbench/prune.hpp"
#include "plantbench/ticket.hpp"

namespace plantbench {

struct ExperimentConfig {
    TaskKind task = TaskKind::Circle;
    int depth = 5;
    int width = 100;
    int knots = 0;  // 0 -> task default (circle 10, helix 30)
    // target sparsities; the planted ticket's own sparsity is prepended when
    // include_planted_sparsity is set
    std::vector<double> sparsities{0.01, 0.1, 0.5, 1.0};
    bool include_planted_sparsity = true;
    std::vector<Method> methods{Method::Magnitude, Method::Random, Method::Snip, Method::Grasp,
                                Method::Synflow};
    bool include_planted_oracle = true;  // ground-truth mask row per repetition
    PruneStrategy strategy;
    int repetitions = 25;
    std::uint64_t base_seed = 1;
    int samples = 10000;
    double noise = 0.01;  // sigma for regression, flip rate for circle
    int train_epochs = 10;
    double train_lr = 1e-3;
    int batch_size = 32;

    void validate() const;
};

struct ResultRow {
    std::string task, method, strategy;
    double target_rho = 0.0, achieved_rho = 0.0;
    double post_prune = 0.0;   // metric of the masked subnet, frozen parameters
    double post_train = 0.0;   // metric after training the subnet
    std::uint64_t seed = 0;
    bool layer_collapse = false;
    double planted_iou = 0.0;        // kept weights vs planted support
    double planted_recovered = 0.0;  // fraction of planted entries kept
    // lambda_out-rescaled metric; only the planted-oracle row has one
    std::optional<double> post_prune_rescaled;
};

struct RecoveryMetrics {
    double iou = 0.0;
    double recovered_fraction = 0.0;
};

RecoveryMetrics recovery_metrics(const MaskSet& found, const MaskSet& planted);

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

void write_tsv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_tsv(const std::string& path);

struct AggregateRow {
    std::string task, method, strategy;
    double target_rho = 0.0;
    int n = 0;
    double post_prune_mean = 0.0, post_prune_min = 0.0, post_prune_max = 0.0;
    double post_train_mean = 0.0, post_train_min = 0.0, post_train_max = 0.0;
    int collapse_count = 0;
};

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);
void write_aggregate_tsv(const std::vector<AggregateRow>& rows, const std::string& path);

// worker threads for the experiment grid; reads PLANTBENCH_THREADS, falls
// back to the hardware count
int worker_thread_count();

}  // namespace plantbench
