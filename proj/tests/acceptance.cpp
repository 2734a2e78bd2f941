// Acceptance suite: runs every benchmark-level criterion end to end and
// prints one PASS/FAIL line per criterion. Exit code is the failure count.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "plantbench/harness.hpp"
#include "plantbench/optim.hpp"
#include "plantbench/prune.hpp"
#include "plantbench/rng.hpp"
#include "plantbench/serialize.hpp"
#include "plantbench/theory.hpp"

using namespace plantbench;

namespace {

int failures = 0;

void report(int crit, bool ok, const std::string& what, double secs) {
    std::printf("%s criterion %2d: %s  [%.1fs]\n", ok ? "PASS" : "FAIL", crit, what.c_str(),
                secs);
    std::fflush(stdout);
    if (!ok) ++failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

Architecture mother_arch_for(const SparseTicket& t, int width) {
    std::vector<int> widths{t.arch.in_dim()};
    for (int l = 1; l < t.arch.depth(); ++l) widths.push_back(width);
    widths.push_back(t.arch.out_dim());
    return Architecture(widths);
}

struct PlantedSetup {
    MaskedMLP mother;
    PlantReport report;
    MaskSet planted;
    double planted_rho;
    Dataset train_set, test_set;
    LossKind kind;
};

PlantedSetup make_setup(TaskKind task, int width, std::uint64_t seed) {
    PlantedSetup s;
    SparseTicket t = build_ticket(task, 5, 0);
    Architecture arch = mother_arch_for(t, width);
    MaskedMLP mother = mlp_new(arch, InitSpec::default_for(arch, derive_seed(seed, 1)));
    PlantResult res = plant(t, mother);
    s.mother = std::move(res.mother);
    s.report = std::move(res.report);
    s.planted = planted_masks(s.mother, s.report);
    s.planted_rho = ticket_sparsity_in(t, arch);
    Dataset full = gen_task(task, 10000, 0.01, derive_seed(seed, 2));
    Split sp = split(full, 0.1, derive_seed(seed, 3));
    s.train_set = std::move(sp.train);
    s.test_set = std::move(sp.test);
    s.kind = loss_for_task(task);
    return s;
}

double rescaled_metric(const PlantedSetup& s) {
    MaskedMLP sub = s.mother;
    apply_mask(sub, s.planted);
    const Dataset& d = s.test_set;
    std::vector<double> x(d.in_dim);
    if (s.kind == LossKind::SoftmaxCrossEntropy) {
        int correct = 0;
        for (int i = 0; i < d.n; ++i) {
            std::copy(d.inputs.begin() + static_cast<std::size_t>(i) * d.in_dim,
                      d.inputs.begin() + static_cast<std::size_t>(i + 1) * d.in_dim, x.begin());
            std::vector<double> out = rescaled_forward(sub, s.report, x);
            int arg = 0;
            for (std::size_t c = 1; c < out.size(); ++c)
                if (out[c] > out[arg]) arg = static_cast<int>(c);
            if (arg == d.labels[i]) ++correct;
        }
        return static_cast<double>(correct) / d.n;
    }
    double total = 0.0;
    for (int i = 0; i < d.n; ++i) {
        std::copy(d.inputs.begin() + static_cast<std::size_t>(i) * d.in_dim,
                  d.inputs.begin() + static_cast<std::size_t>(i + 1) * d.in_dim, x.begin());
        std::vector<double> out = rescaled_forward(sub, s.report, x);
        for (int j = 0; j < d.out_dim; ++j) {
            double e = out[j] - d.targets[static_cast<std::size_t>(i) * d.out_dim + j];
            total += e * e;
        }
    }
    return total / (static_cast<double>(d.n) * d.out_dim);
}

// ---------------------------------------------------------------- criterion 1

void criterion_gradients() {
    Timer timer;
    Rng rng(20260810);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        LossKind kind = trial % 2 == 0 ? LossKind::Mse : LossKind::SoftmaxCrossEntropy;
        int depth = 2 + static_cast<int>(rng.index(4));
        std::vector<int> widths;
        for (int l = 0; l <= depth; ++l) widths.push_back(1 + static_cast<int>(rng.index(20)));
        InitSpec init;
        init.seed = rng.raw();
        MaskedMLP net = mlp_new(Architecture(widths), init);

        int n = 4;
        std::vector<double> bx, bt;
        std::vector<int> bl;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < net.arch.in_dim(); ++j) bx.push_back(rng.uniform(-1.0, 1.0));
            if (kind == LossKind::Mse)
                for (int j = 0; j < net.arch.out_dim(); ++j) bt.push_back(rng.uniform(-1.0, 1.0));
            else
                bl.push_back(static_cast<int>(rng.index(net.arch.out_dim())));
        }
        ParamSet grads;
        loss_and_grad(net, bx, n, bt, bl, kind, grads);
        const double h = 1e-6;
        auto fd_check = [&](double& p, double g) {
            double keep = p;
            p = keep + h;
            double lp = loss_only(net, bx, n, bt, bl, kind);
            p = keep - h;
            double lm = loss_only(net, bx, n, bt, bl, kind);
            p = keep;
            double fd = (lp - lm) / (2.0 * h);
            double rel = std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-4});
            worst = std::max(worst, rel);
        };
        for (int l = 0; l < net.depth(); ++l) {
            for (std::size_t k = 0; k < net.layers[l].w.size(); ++k)
                fd_check(net.layers[l].w[k], grads.w[l][k]);
            for (std::size_t k = 0; k < net.layers[l].b.size(); ++k)
                fd_check(net.layers[l].b[k], grads.b[l][k]);
        }
    }
    double secs = timer.secs();
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "gradient check, 20 nets both losses: max rel err %.2e < 1e-5", worst);
    report(1, worst < 1e-5 && secs < 30.0, buf, secs);
}

// ---------------------------------------------------------------- criterion 2

void criterion_round_trip() {
    Timer timer;
    double worst = 0.0;
    for (TaskKind task : {TaskKind::Relu, TaskKind::Circle, TaskKind::Helix}) {
        SparseTicket t = build_ticket(task, 5, 0);
        Architecture arch = mother_arch_for(t, 100);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            MaskedMLP mother = mlp_new(arch, InitSpec::default_for(arch, derive_seed(seed, 77)));
            PlantResult res = plant(t, mother);
            MaskedMLP extracted = extract_subnet(res.mother, res.report);
            int pts = t.arch.in_dim() == 1 ? 1000 : 0;
            if (t.arch.in_dim() == 1) {
                for (int i = 0; i < pts; ++i) {
                    double x = -1.0 + 2.0 * i / (pts - 1);
                    auto a = rescaled_forward(extracted, res.report, {x});
                    auto b = eval_ticket(t, {x});
                    for (std::size_t j = 0; j < a.size(); ++j)
                        worst = std::max(worst, std::abs(a[j] - b[j]));
                }
            } else {
                for (int i = 0; i < 32; ++i)
                    for (int j = 0; j < 32; ++j) {
                        std::vector<double> x{-1.0 + 2.0 * i / 31.0, -1.0 + 2.0 * j / 31.0};
                        auto a = rescaled_forward(extracted, res.report, x);
                        auto b = eval_ticket(t, x);
                        for (std::size_t c = 0; c < a.size(); ++c)
                            worst = std::max(worst, std::abs(a[c] - b[c]));
                    }
            }
        }
    }
    double secs = timer.secs();
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "plant-extract round trip, 3 tickets x 20 seeds: max dev %.2e < 1e-9", worst);
    report(2, worst < 1e-9 && secs < 60.0, buf, secs);
}

// ---------------------------------------------------------------- criterion 3

void criterion_ticket_quality() {
    Timer timer;
    PlantedSetup circle = make_setup(TaskKind::Circle, 100, 11);
    double acc = rescaled_metric(circle);
    PlantedSetup relu = make_setup(TaskKind::Relu, 100, 12);
    double relu_mse = rescaled_metric(relu);
    PlantedSetup helix = make_setup(TaskKind::Helix, 100, 13);
    double helix_mse = rescaled_metric(helix);
    bool ok = acc >= 0.96 && relu_mse <= 2e-4 && helix_mse <= 6e-4;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "planted quality: circle acc %.4f >= 0.96, relu mse %.2e <= 2e-4, helix mse "
                  "%.2e <= 6e-4",
                  acc, relu_mse, helix_mse);
    report(3, ok && timer.secs() < 60.0, buf, timer.secs());
}

// ---------------------------------------------------------------- criterion 4

void criterion_error_propagation() {
    Timer timer;
    bool ok = true;
    double worst_ratio = 0.0;
    for (TaskKind task : {TaskKind::Relu, TaskKind::Circle, TaskKind::Helix}) {
        SparseTicket t = build_ticket(task, 5, 0);
        for (double eps : {0.05, 0.1, 0.3}) {
            ErrorBudget b = eps_layer(eps, t);
            PropagationResult r =
                verify_error_propagation(t, b, 1000, 1000, derive_seed(4, task == TaskKind::Relu ? 1 : task == TaskKind::Circle ? 2 : 3));
            ok = ok && r.within_bound;
            worst_ratio = std::max(worst_ratio, r.max_deviation / eps);
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "layer budgets keep ||f - f_eps|| <= eps (3 tickets x 3 eps, 1000 trials; worst "
                  "dev/eps %.3f)",
                  worst_ratio);
    report(4, ok && timer.secs() < 120.0, buf, timer.secs());
}

// ---------------------------------------------------------------- criterion 5

void criterion_existence_mc() {
    Timer timer;
    ExistenceMc a = verify_existence_bound(0.1, {0.3}, 50, 10000, 505);
    ExistenceMc b = verify_existence_bound(0.2, {0.3, -0.4}, 20, 10000, 506);
    bool ok = a.within_3sigma && b.within_3sigma;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "existence MC: k=1 freq %.4f vs bound %.4f; k=2 freq %.4f vs bound %.4f (>= "
                  "bound - 3 sigma)",
                  a.frequency, a.bound, b.frequency, b.bound);
    report(5, ok && timer.secs() < 60.0, buf, timer.secs());
}

// ---------------------------------------------------------------- criterion 6

void criterion_path_prob() {
    Timer timer;
    PathMc mc33 = relu_path_prob_mc(Architecture({1, 3, 3}), 100000, 606);
    PathMc mc11 = relu_path_prob_mc(Architecture({1, 1, 1}), 100000, 607);
    bool exact_ok = relu_path_prob(Architecture({1, 3, 3})) == 0.765625 &&
                    relu_path_prob(Architecture({1, 1, 1})) == 0.25;
    bool ok = exact_ok && mc33.within_3sigma && mc11.within_3sigma;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "winning-path prob: [3,3] mc %.4f vs 0.765625; [1,1] mc %.4f vs 0.25 (3 sigma)",
                  mc33.frequency, mc11.frequency);
    report(6, ok && timer.secs() < 30.0, buf, timer.secs());
}

// ---------------------------------------------------------------- criterion 7

void criterion_singleshot() {
    Timer timer;
    const int seeds = 10;
    int ok_mag = 0, ok_snip = 0, ok_syn = 0;
    int weak_post_prune_ok = 0;
    bool any_collapse = false;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        PlantedSetup s = make_setup(TaskKind::Circle, 100, derive_seed(700, seed));

        // (a) weak tickets at moderate sparsity train back to >= 0.9
        auto train_at = [&](Method m) {
            MaskSet masks = singleshot(s.mother, m, 0.5, &s.train_set, s.kind, 1, Scope::Global,
                                       derive_seed(701, seed));
            MaskedMLP sub = s.mother;
            apply_mask(sub, masks);
            TrainOptions opt;
            opt.epochs = 10;
            opt.seed = derive_seed(702, seed);
            return train(sub, s.train_set, s.test_set, s.kind, opt);
        };
        if (train_at(Method::Magnitude) >= 0.9) ++ok_mag;
        if (train_at(Method::Snip) >= 0.9) ++ok_snip;
        if (train_at(Method::Synflow) >= 0.9) ++ok_syn;

        // (b) no method finds a strong ticket at the planted sparsity
        bool all_weak = true;
        for (Method m : {Method::Magnitude, Method::Random, Method::Snip, Method::Grasp,
                         Method::Synflow}) {
            MaskSet masks = singleshot(s.mother, m, s.planted_rho, &s.train_set, s.kind, 1,
                                       Scope::Global, derive_seed(703, seed));
            MaskedMLP sub = s.mother;
            apply_mask(sub, masks);
            if (evaluate_metric(sub, s.test_set, s.kind) > 0.5) all_weak = false;
        }
        if (all_weak) ++weak_post_prune_ok;

        // (c) layer collapse shows up at extreme sparsity
        for (Method m : {Method::Magnitude, Method::Random, Method::Snip, Method::Grasp,
                         Method::Synflow}) {
            MaskSet masks = singleshot(s.mother, m, 0.01, &s.train_set, s.kind, 1, Scope::Global,
                                       derive_seed(704, seed));
            CollapseReport rep = detect_layer_collapse(masks, s.mother.arch);
            if (!rep.collapsed_layers.empty() || rep.flow_interrupted) any_collapse = true;
        }
    }
    bool ok = ok_mag >= 8 && ok_snip >= 8 && ok_syn >= 8 && weak_post_prune_ok >= 8 &&
              any_collapse;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "singleshot trends: rho=0.5 post-train>=0.9 mag %d/10 snip %d/10 synflow "
                  "%d/10 (need 8); planted-rho post-prune<=0.5 %d/10 (need 8); collapse@0.01 %s",
                  ok_mag, ok_snip, ok_syn, weak_post_prune_ok, any_collapse ? "yes" : "no");
    report(7, ok && timer.secs() < 900.0, buf, timer.secs());
}

// ---------------------------------------------------------------- criterion 8

void criterion_multishot() {
    Timer timer;
    const int seeds = 10;
    int good = 0;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        PlantedSetup s = make_setup(TaskKind::Circle, 100, derive_seed(800, seed));
        MaskSet masks = multishot(s.mother, Method::Synflow, 0.01, s.train_set, s.kind, 10, 5,
                                  Scope::Global, derive_seed(801, seed));
        MaskedMLP sub = s.mother;
        apply_mask(sub, masks);
        TrainOptions opt;
        opt.epochs = 10;
        opt.seed = derive_seed(802, seed);
        double acc = train(sub, s.train_set, s.test_set, s.kind, opt);
        if (acc >= 0.9) ++good;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "synflow multishot rho=0.01: post-train>=0.9 in %d/10 seeds (need 7)", good);
    report(8, good >= 7 && timer.secs() < 1200.0, buf, timer.secs());
}

// ---------------------------------------------------------------- criterion 9

void criterion_edge_popup() {
    Timer timer;
    const int seeds = 10;
    int strong = 0, annealed = 0;
    bool frozen = true;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        PlantedSetup s = make_setup(TaskKind::Circle, 100, derive_seed(900, seed));
        MaskedMLP before = s.mother;

        MaskSet m5 = edge_popup(s.mother, 0.5, 10, false, s.train_set, s.kind,
                                derive_seed(901, seed));
        MaskedMLP sub = s.mother;
        apply_mask(sub, m5);
        if (evaluate_metric(sub, s.test_set, s.kind) >= 0.9) ++strong;

        MaskSet m1 = edge_popup(s.mother, 0.1, 10, true, s.train_set, s.kind,
                                derive_seed(902, seed));
        MaskedMLP sub1 = s.mother;
        apply_mask(sub1, m1);
        if (evaluate_metric(sub1, s.test_set, s.kind) >= 0.8) ++annealed;

        for (int l = 0; l < s.mother.depth(); ++l)
            if (s.mother.layers[l].w != before.layers[l].w ||
                s.mother.layers[l].b != before.layers[l].b)
                frozen = false;
    }
    bool ok = strong >= 7 && annealed >= 5 && frozen;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "edge-popup: rho=0.5 post-prune>=0.9 in %d/10 (need 7); anneal rho=0.1 >=0.8 "
                  "in %d/10 (need 5); weights frozen %s",
                  strong, annealed, frozen ? "yes" : "no");
    report(9, ok && timer.secs() < 900.0, buf, timer.secs());
}

// --------------------------------------------------------------- criterion 10

void criterion_invariants() {
    Timer timer;
    bool ok = true;
    std::string detail;

    // achieved sparsity within 1/N of target across methods and rho values
    PlantedSetup s = make_setup(TaskKind::Circle, 100, 1000);
    double n_weights = static_cast<double>(total_weight_count(s.mother.arch));
    for (Method m : {Method::Magnitude, Method::Random, Method::Snip, Method::Grasp,
                     Method::Synflow}) {
        for (double rho : {s.planted_rho, 0.01, 0.1, 0.5, 1.0}) {
            MaskSet masks = singleshot(s.mother, m, rho, &s.train_set, s.kind, 1, Scope::Global,
                                       derive_seed(1001, static_cast<std::uint64_t>(rho * 1e6)));
            MaskedMLP sub = s.mother;
            apply_mask(sub, masks);
            if (std::abs(sparsity(sub) - rho) >= 1.0 / n_weights + 1e-12) {
                ok = false;
                detail += " sparsity-miss(" + method_name(m) + ")";
            }
        }
    }

    // multishot schedule: achieved sparsity after round r is rho^(r/10)
    std::vector<double> schedule;
    multishot(s.mother, Method::Magnitude, 0.01, s.train_set, s.kind, 10, 1, Scope::Global, 1002,
              &schedule);
    for (int r = 1; r <= 10; ++r) {
        double want = std::pow(0.01, r / 10.0);
        if (std::abs(schedule[r - 1] - want) >= 1.0 / n_weights + 1e-12) {
            ok = false;
            detail += " multishot-schedule(r=" + std::to_string(r) + ")";
        }
    }
    // strictly decreasing toward rho
    for (int r = 1; r < 10; ++r)
        if (schedule[r] >= schedule[r - 1]) {
            ok = false;
            detail += " schedule-not-decreasing";
        }

    // edge-popup anneal: keep fraction after e epochs is rho^(min(e,10)/10)
    for (int e : {2, 5, 10}) {
        MaskSet m = edge_popup(s.mother, 0.1, e, true, s.train_set, s.kind, 1003);
        MaskedMLP sub = s.mother;
        apply_mask(sub, m);
        double want = std::pow(0.1, std::min(e, 10) / 10.0);
        if (std::abs(sparsity(sub) - want) > 0.01) {
            ok = false;
            detail += " anneal(e=" + std::to_string(e) + ")";
        }
    }

    // byte-for-byte determinism of a full experiment
    ExperimentConfig cfg;
    cfg.task = TaskKind::Circle;
    cfg.depth = 5;
    cfg.width = 50;
    cfg.samples = 1000;
    cfg.repetitions = 2;
    cfg.methods = {Method::Magnitude, Method::Synflow};
    cfg.sparsities = {0.1, 0.5};
    cfg.train_epochs = 2;
    cfg.strategy = PruneStrategy::singleshot();
    cfg.base_seed = 99;
    write_tsv(run_experiment(cfg), "acceptance_det_a.tsv");
    write_tsv(run_experiment(cfg), "acceptance_det_b.tsv");
    if (load_text("acceptance_det_a.tsv") != load_text("acceptance_det_b.tsv")) {
        ok = false;
        detail += " tsv-not-deterministic";
    }
    std::remove("acceptance_det_a.tsv");
    std::remove("acceptance_det_b.tsv");

    report(10, ok,
           detail.empty() ? "sparsity targets, schedules, and byte-level determinism hold"
                          : "violations:" + detail,
           timer.secs());
}

}  // namespace

int main() {
    Timer total;
    criterion_gradients();
    criterion_round_trip();
    criterion_ticket_quality();
    criterion_error_propagation();
    criterion_existence_mc();
    criterion_path_prob();
    criterion_singleshot();
    criterion_multishot();
    criterion_edge_popup();
    criterion_invariants();
    std::printf("%s: %d/10 criteria passed  [total %.0fs]\n", failures == 0 ? "OK" : "FAILED",
                10 - failures, total.secs());
    return failures;
}
