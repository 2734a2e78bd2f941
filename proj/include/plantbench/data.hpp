#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace plantbench {

enum class TaskKind { Relu, Circle, Helix };

std::string task_name(TaskKind t);
TaskKind task_from_name(const std::string& name);

// Closed-form helix target: angle A(x) = 5*pi + 3*pi*x, outputs
// (A cos A, A sin A, A) / (8*pi).
std::array<double, 3> helix_targets(double x);

// Squared-radius ring label with boundaries 0.2 / 0.5 / 0.7.
int circle_label(double x1, double x2);

struct Dataset {
    TaskKind task = TaskKind::Relu;
    int n = 0, in_dim = 0, out_dim = 0;
    std::vector<double> inputs;   // n x in_dim, row-major, values in [-1,1]
    std::vector<double> targets;  // n x out_dim for regression tasks
    std::vector<int> labels;      // n class labels for circle
    std::uint64_t seed = 0;

    bool classification() const { return task == TaskKind::Circle; }
};

// y = max(0, x) + N(0, noise_sigma^2), x ~ U[-1,1]
Dataset gen_relu(int n, double noise_sigma, std::uint64_t seed);

// 4-class rings on x ~ U[-1,1]^2; each label flipped with probability
// flip_rate to the adjacent band whose squared-radius boundary is nearest.
Dataset gen_circle(int n, double flip_rate, std::uint64_t seed);

// y = helix_targets(x) + per-dimension gaussian noise, x ~ U[-1,1]
Dataset gen_helix(int n, double noise_sigma, std::uint64_t seed);

Dataset gen_task(TaskKind task, int n, double noise, std::uint64_t seed);

struct Split {
    Dataset train, test;
};

// Seeded shuffle, then the first round(n * test_frac) samples form the test
// set and the rest the training set.
Split split(const Dataset& d, double test_frac, std::uint64_t seed);

void write_csv(const Dataset& d, const std::string& path);

}  // namespace plantbench
