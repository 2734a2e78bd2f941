// plantbench CLI: plant tickets into random networks, run pruning
// experiment grids, print theory bound tables, and export datasets.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plantbench/harness.hpp"
#include "plantbench/optim.hpp"
#include "plantbench/serialize.hpp"
#include "plantbench/theory.hpp"

using namespace plantbench;

namespace {

Architecture mother_arch_for(const SparseTicket& t, int depth, int width) {
    std::vector<int> widths{t.arch.in_dim()};
    for (int l = 1; l < depth; ++l) widths.push_back(width);
    widths.push_back(t.arch.out_dim());
    return Architecture(widths);
}

int cmd_plant(const std::string& task, int depth, int width, int knots, std::uint64_t seed,
              const std::string& out) {
    SparseTicket ticket = build_ticket(task_from_name(task), depth, knots);
    Architecture arch = mother_arch_for(ticket, depth, width);
    MaskedMLP mother = mlp_new(arch, InitSpec::default_for(arch, derive_seed(seed, 1)));
    PlantResult res = plant(ticket, mother);

    // verify the round trip on a domain grid
    MaskedMLP extracted = extract_subnet(res.mother, res.report);
    double max_dev = 0.0;
    int pts = ticket.arch.in_dim() == 1 ? 1000 : 1024;
    int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(pts))));
    std::vector<std::vector<double>> grid;
    if (ticket.arch.in_dim() == 1) {
        for (int i = 0; i < pts; ++i) grid.push_back({-1.0 + 2.0 * i / (pts - 1)});
    } else {
        for (int i = 0; i < side; ++i)
            for (int j = 0; j < side; ++j)
                grid.push_back({-1.0 + 2.0 * i / (side - 1), -1.0 + 2.0 * j / (side - 1)});
    }
    for (const auto& x : grid) {
        std::vector<double> a = rescaled_forward(extracted, res.report, x);
        std::vector<double> b = eval_ticket(ticket, x);
        for (std::size_t j = 0; j < a.size(); ++j)
            max_dev = std::max(max_dev, std::abs(a[j] - b[j]));
    }

    save_text(out + ".net.json", net_to_json(res.mother));
    save_text(out + ".report.json", report_to_json(res.report));
    save_text(out + ".ticket.json", ticket_to_json(ticket));

    std::printf("task=%s depth=%d width=%d planted_rho=%.6g round_trip_max_dev=%.3e\n",
                task.c_str(), depth, width, ticket_sparsity_in(ticket, arch), max_dev);
    for (const HidingLayerStats& s : hiding_score(res.mother, res.report)) {
        std::printf("layer %d: planted=%d planted_rms=%.4g background_rms=%.4g ratio=%s\n",
                    s.layer, s.planted_count, s.planted_rms, s.background_rms,
                    s.rms_ratio ? std::to_string(*s.rms_ratio).c_str() : "-");
    }
    std::printf("wrote %s.net.json, %s.report.json, %s.ticket.json\n", out.c_str(), out.c_str(),
                out.c_str());
    return 0;
}

int cmd_theory(const std::string& task, int depth, int width, int knots, double eps,
               bool normal_variant, int trials, std::uint64_t seed) {
    SparseTicket ticket = build_ticket(task_from_name(task), depth, knots);
    Architecture arch = mother_arch_for(ticket, depth, width);
    ExistenceBound bound = existence_lower_bound(eps, ticket, arch, {}, {}, normal_variant);

    std::printf("existence lower bound: eps=%g task=%s depth=%d mother_width=%d%s\n", eps,
                task.c_str(), depth, width, normal_variant ? " (normal variant)" : "");
    std::printf("%-6s %-6s %-8s %-12s %-14s %-14s\n", "layer", "n_l", "k_max", "eps_l",
                "failure_term", "cumulative");
    double cum = 1.0;
    for (int l = 1; l <= ticket.arch.depth(); ++l) {
        cum *= std::max(0.0, 1.0 - bound.layer_failure_terms[l - 1]);
        std::printf("%-6d %-6d %-8d %-12.4e %-14.6g %-14.6g\n", l, ticket.arch.widths[l],
                    ticket.max_in_degree(l), bound.eps_l[l - 1],
                    bound.layer_failure_terms[l - 1], cum);
    }
    std::printf("bound=%.6g raw=%.6g lambda=%.6g%s\n", bound.probability, bound.raw_product,
                bound.lambda_rescale, bound.degenerate ? " (degenerate eps_l >= 1)" : "");

    if (task == "relu") {
        double p = relu_path_prob(arch);
        PathMc mc = relu_path_prob_mc(arch, trials, seed);
        std::printf("relu winning-path probability: exact=%.6g mc=%.6g (3sigma=%s)\n", p,
                    mc.frequency, mc.within_3sigma ? "ok" : "off");
    }
    return 0;
}

int cmd_data(const std::string& task, int n, double noise, std::uint64_t seed,
             const std::string& out) {
    Dataset d = gen_task(task_from_name(task), n, noise, seed);
    write_csv(d, out);
    std::printf("wrote %d samples to %s\n", d.n, out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse-ticket planting and pruning benchmark"};
    app.set_config("--config", "", "key=value config file; flags override");
    app.require_subcommand(1);

    std::string task = "circle", out = "out", strategy = "singleshot";
    int depth = 5, width = 100, knots = 0, n = 10000, reps = 25, rounds = 10, epochs = 10;
    double eps = 0.1, noise = 0.01;
    std::uint64_t seed = 1;
    std::vector<double> sparsities;
    std::vector<std::string> methods;
    bool no_planted = false, normal_variant = false, anneal = false, local_scope = false;
    int trials = 100000, synflow_rounds = 1;
    double edge_lr = 0.1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--task", task, "relu | circle | helix");
        cmd->add_option("--depth", depth, "network depth L");
        cmd->add_option("--width", width, "mother hidden width");
        cmd->add_option("--knots", knots, "PWL knots (0 = task default)");
        cmd->add_option("--seed", seed, "base seed");
    };

    CLI::App* plant_cmd = app.add_subcommand("plant", "build a ticket, plant it, verify, save");
    add_common(plant_cmd);
    plant_cmd->add_option("--out", out, "output path prefix");

    CLI::App* prune_cmd = app.add_subcommand("prune", "run a pruning experiment grid");
    add_common(prune_cmd);
    prune_cmd->add_option("--sparsity", sparsities, "target sparsity (repeatable)");
    prune_cmd->add_option("--method", methods,
                          "magnitude|random|snip|grasp|synflow (repeatable)");
    prune_cmd->add_option("--strategy", strategy, "singleshot | multishot | edge-popup");
    prune_cmd->add_option("--rounds", rounds, "multishot rounds");
    prune_cmd->add_option("--epochs", epochs, "training epochs (post-prune / edge-popup)");
    prune_cmd->add_option("--reps", reps, "repetitions");
    prune_cmd->add_option("--synflow-rounds", synflow_rounds, "SynFlow singleshot rounds");
    prune_cmd->add_flag("--anneal", anneal, "edge-popup sparsity annealing");
    prune_cmd->add_flag("--local", local_scope, "per-layer sparsity constraints");
    prune_cmd->add_flag("--no-planted", no_planted, "skip planted sparsity and oracle rows");
    prune_cmd->add_option("--noise", noise, "noise sigma / flip rate");
    prune_cmd->add_option("--samples", n, "dataset size");
    prune_cmd->add_option("--edge-popup-lr", edge_lr, "edge-popup base learning rate");
    prune_cmd->add_option("--out", out, "output TSV path");

    CLI::App* theory_cmd = app.add_subcommand("theory", "existence bound tables");
    add_common(theory_cmd);
    theory_cmd->add_option("--eps", eps, "target sup-norm error in (0,1)");
    theory_cmd->add_flag("--normal", normal_variant, "normal-initialization variant (eps_l/2)");
    theory_cmd->add_option("--trials", trials, "Monte Carlo trials");

    CLI::App* data_cmd = app.add_subcommand("data", "export a dataset as CSV");
    add_common(data_cmd);
    data_cmd->add_option("--samples", n, "sample count");
    data_cmd->add_option("--noise", noise, "noise sigma / flip rate");
    data_cmd->add_option("--out", out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (plant_cmd->parsed()) return cmd_plant(task, depth, width, knots, seed, out);
        if (theory_cmd->parsed())
            return cmd_theory(task, depth, width, knots, eps, normal_variant, trials, seed);
        if (data_cmd->parsed()) return cmd_data(task, n, noise, seed, out);
        if (prune_cmd->parsed()) {
            ExperimentConfig cfg;
            cfg.task = task_from_name(task);
            cfg.depth = depth;
            cfg.width = width;
            cfg.knots = knots;
            cfg.repetitions = reps;
            cfg.base_seed = seed;
            cfg.samples = n;
            cfg.noise = noise;
            cfg.train_epochs = epochs;
            if (!sparsities.empty()) cfg.sparsities = sparsities;
            if (!methods.empty()) {
                cfg.methods.clear();
                for (const std::string& m : methods) cfg.methods.push_back(method_from_name(m));
            }
            cfg.include_planted_sparsity = !no_planted;
            cfg.include_planted_oracle = !no_planted;
            if (strategy == "singleshot") {
                cfg.strategy = PruneStrategy::singleshot(synflow_rounds);
            } else if (strategy == "multishot") {
                cfg.strategy = PruneStrategy::multishot(rounds, 5);
            } else if (strategy == "edge-popup") {
                cfg.strategy = PruneStrategy::edge_popup(anneal, epochs);
                cfg.strategy.edge_popup_lr = edge_lr;
            } else {
                std::cerr << "unknown strategy: " << strategy << "\n";
                return 1;
            }
            if (local_scope) cfg.strategy.scope = Scope::LocalPerLayer;
            std::vector<ResultRow> rows = run_experiment(cfg);
            write_tsv(rows, out);
            write_aggregate_tsv(aggregate(rows), out + ".agg.tsv");
            std::printf("wrote %zu rows to %s (+ %s.agg.tsv)\n", rows.size(), out.c_str(),
                        out.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
