#include "plantbench/data.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "plantbench/rng.hpp"

namespace plantbench {

std::string task_name(TaskKind t) {
    switch (t) {
        case TaskKind::Relu: return "relu";
        case TaskKind::Circle: return "circle";
        case TaskKind::Helix: return "helix";
    }
    return "?";
}

TaskKind task_from_name(const std::string& name) {
    if (name == "relu") return TaskKind::Relu;
    if (name == "circle") return TaskKind::Circle;
    if (name == "helix") return TaskKind::Helix;
    throw std::invalid_argument("unknown task: " + name);
}

std::array<double, 3> helix_targets(double x) {
    double a = 5.0 * M_PI + 3.0 * M_PI * x;
    double inv = 1.0 / (8.0 * M_PI);
    return {a * std::cos(a) * inv, a * std::sin(a) * inv, a * inv};
}

int circle_label(double x1, double x2) {
    double r2 = x1 * x1 + x2 * x2;
    if (r2 < 0.2) return 0;
    if (r2 < 0.5) return 1;
    if (r2 < 0.7) return 2;
    return 3;
}

Dataset gen_relu(int n, double noise_sigma, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_relu: n must be >= 1");
    Dataset d;
    d.task = TaskKind::Relu;
    d.n = n;
    d.in_dim = 1;
    d.out_dim = 1;
    d.seed = seed;
    d.inputs.resize(n);
    d.targets.resize(n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        double x = rng.uniform(-1.0, 1.0);
        d.inputs[i] = x;
        // draw unconditionally so the same seed gives the same inputs for
        // any noise level
        d.targets[i] = std::max(0.0, x) + noise_sigma * rng.normal();
    }
    return d;
}

Dataset gen_circle(int n, double flip_rate, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_circle: n must be >= 1");
    Dataset d;
    d.task = TaskKind::Circle;
    d.n = n;
    d.in_dim = 2;
    d.out_dim = 4;
    d.seed = seed;
    d.inputs.resize(2 * static_cast<std::size_t>(n));
    d.labels.resize(n);
    Rng rng(seed);
    const double bounds[3] = {0.2, 0.5, 0.7};
    for (int i = 0; i < n; ++i) {
        double x1 = rng.uniform(-1.0, 1.0);
        double x2 = rng.uniform(-1.0, 1.0);
        d.inputs[2 * static_cast<std::size_t>(i)] = x1;
        d.inputs[2 * static_cast<std::size_t>(i) + 1] = x2;
        int lab = circle_label(x1, x2);
        if (rng.bernoulli(flip_rate)) {
            // flip to the band behind the nearest squared-radius boundary
            double r2 = x1 * x1 + x2 * x2;
            if (lab == 0) lab = 1;
            else if (lab == 3) lab = 2;
            else lab = (r2 - bounds[lab - 1] < bounds[lab] - r2) ? lab - 1 : lab + 1;
        }
        d.labels[i] = lab;
    }
    return d;
}

Dataset gen_helix(int n, double noise_sigma, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_helix: n must be >= 1");
    Dataset d;
    d.task = TaskKind::Helix;
    d.n = n;
    d.in_dim = 1;
    d.out_dim = 3;
    d.seed = seed;
    d.inputs.resize(n);
    d.targets.resize(3 * static_cast<std::size_t>(n));
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        double x = rng.uniform(-1.0, 1.0);
        d.inputs[i] = x;
        auto f = helix_targets(x);
        for (int j = 0; j < 3; ++j) {
            d.targets[3 * static_cast<std::size_t>(i) + j] = f[j] + noise_sigma * rng.normal();
        }
    }
    return d;
}

Dataset gen_task(TaskKind task, int n, double noise, std::uint64_t seed) {
    switch (task) {
        case TaskKind::Relu: return gen_relu(n, noise, seed);
        case TaskKind::Circle: return gen_circle(n, noise, seed);
        case TaskKind::Helix: return gen_helix(n, noise, seed);
    }
    throw std::invalid_argument("gen_task: bad task");
}

namespace {

Dataset take(const Dataset& d, const std::vector<int>& idx, std::size_t begin, std::size_t end) {
    Dataset out;
    out.task = d.task;
    out.n = static_cast<int>(end - begin);
    out.in_dim = d.in_dim;
    out.out_dim = d.out_dim;
    out.seed = d.seed;
    for (std::size_t k = begin; k < end; ++k) {
        int i = idx[k];
        for (int j = 0; j < d.in_dim; ++j)
            out.inputs.push_back(d.inputs[static_cast<std::size_t>(i) * d.in_dim + j]);
        if (!d.targets.empty())
            for (int j = 0; j < d.out_dim; ++j)
                out.targets.push_back(d.targets[static_cast<std::size_t>(i) * d.out_dim + j]);
        if (!d.labels.empty()) out.labels.push_back(d.labels[i]);
    }
    return out;
}

}  // namespace

Split split(const Dataset& d, double test_frac, std::uint64_t seed) {
    if (!(test_frac > 0.0 && test_frac < 1.0))
        throw std::invalid_argument("split: test_frac must be in (0,1)");
    std::vector<int> idx(d.n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);
    std::size_t n_test = static_cast<std::size_t>(std::llround(test_frac * d.n));
    if (n_test == 0) n_test = 1;
    if (n_test >= static_cast<std::size_t>(d.n)) n_test = d.n - 1;
    Split s;
    s.test = take(d, idx, 0, n_test);
    s.train = take(d, idx, n_test, idx.size());
    return s;
}

void write_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    for (int j = 0; j < d.in_dim; ++j) out << (j ? "," : "") << "x" << j;
    if (d.classification()) {
        out << ",label";
    } else {
        for (int j = 0; j < d.out_dim; ++j) out << ",y" << j;
    }
    out << "\n";
    for (int i = 0; i < d.n; ++i) {
        for (int j = 0; j < d.in_dim; ++j)
            out << (j ? "," : "") << d.inputs[static_cast<std::size_t>(i) * d.in_dim + j];
        if (d.classification()) {
            out << "," << d.labels[i];
        } else {
            for (int j = 0; j < d.out_dim; ++j)
                out << "," << d.targets[static_cast<std::size_t>(i) * d.out_dim + j];
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace plantbench
