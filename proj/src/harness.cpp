#include "plantbench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "plantbench/optim.hpp"
#include "plantbench/rng.hpp"

namespace plantbench {

void ExperimentConfig::validate() const {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    if (task != TaskKind::Relu && depth < 3)
        throw std::invalid_argument("circle/helix constructions need depth >= 3");
    if (depth < 2) throw std::invalid_argument("depth must be >= 2");
    if (width < 1) throw std::invalid_argument("width must be >= 1");
    for (double rho : sparsities)
        if (!(rho > 0.0 && rho <= 1.0))
            throw std::invalid_argument("sparsities must be in (0,1]");
}

RecoveryMetrics recovery_metrics(const MaskSet& found, const MaskSet& planted) {
    if (found.w.size() != planted.w.size())
        throw std::invalid_argument("recovery_metrics: layer count mismatch");
    std::size_t inter = 0, uni = 0, planted_total = 0;
    for (std::size_t l = 0; l < found.w.size(); ++l) {
        if (found.w[l].size() != planted.w[l].size())
            throw std::invalid_argument("recovery_metrics: shape mismatch");
        for (std::size_t k = 0; k < found.w[l].size(); ++k) {
            bool f = found.w[l][k], p = planted.w[l][k];
            inter += (f && p);
            uni += (f || p);
            planted_total += p;
        }
    }
    RecoveryMetrics m;
    m.iou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    m.recovered_fraction =
        planted_total == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(planted_total);
    return m;
}

int worker_thread_count() {
    if (const char* env = std::getenv("PLANTBENCH_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

struct RepContext {
    std::uint64_t seed = 0;
    MaskedMLP mother;          // with the ticket planted
    PlantReport report;
    MaskSet planted;
    double planted_rho = 0.0;
    Dataset train_set, test_set;
    LossKind kind = LossKind::Mse;
};

RepContext make_rep(const ExperimentConfig& cfg, int rep) {
    RepContext ctx;
    ctx.seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
    SparseTicket ticket = build_ticket(cfg.task, cfg.depth, cfg.knots);

    std::vector<int> widths{ticket.arch.in_dim()};
    for (int l = 1; l < cfg.depth; ++l) widths.push_back(cfg.width);
    widths.push_back(ticket.arch.out_dim());
    Architecture mother_arch(widths);

    MaskedMLP mother =
        mlp_new(mother_arch, InitSpec::default_for(mother_arch, derive_seed(ctx.seed, 1)));
    PlantResult planted = plant(ticket, mother);
    ctx.mother = std::move(planted.mother);
    ctx.report = std::move(planted.report);
    ctx.planted = planted_masks(ctx.mother, ctx.report);
    ctx.planted_rho = ticket_sparsity_in(ticket, mother_arch);

    Dataset full = gen_task(cfg.task, cfg.samples, cfg.noise, derive_seed(ctx.seed, 2));
    Split sp = split(full, 0.1, derive_seed(ctx.seed, 3));
    ctx.train_set = std::move(sp.train);
    ctx.test_set = std::move(sp.test);
    ctx.kind = loss_for_task(cfg.task);
    return ctx;
}

double metric_of_masked(const RepContext& ctx, const MaskSet& masks) {
    MaskedMLP sub = ctx.mother;
    apply_mask(sub, masks);
    return evaluate_metric(sub, ctx.test_set, ctx.kind);
}

double metric_rescaled(const RepContext& ctx, const MaskSet& masks) {
    MaskedMLP sub = ctx.mother;
    apply_mask(sub, masks);
    const Dataset& d = ctx.test_set;
    if (ctx.kind == LossKind::SoftmaxCrossEntropy) {
        int correct = 0;
        std::vector<double> x(d.in_dim);
        for (int i = 0; i < d.n; ++i) {
            std::copy(d.inputs.begin() + static_cast<std::size_t>(i) * d.in_dim,
                      d.inputs.begin() + static_cast<std::size_t>(i + 1) * d.in_dim, x.begin());
            std::vector<double> out = rescaled_forward(sub, ctx.report, x);
            int arg = 0;
            for (std::size_t c = 1; c < out.size(); ++c)
                if (out[c] > out[arg]) arg = static_cast<int>(c);
            if (arg == d.labels[i]) ++correct;
        }
        return static_cast<double>(correct) / d.n;
    }
    double total = 0.0;
    std::vector<double> x(d.in_dim);
    for (int i = 0; i < d.n; ++i) {
        std::copy(d.inputs.begin() + static_cast<std::size_t>(i) * d.in_dim,
                  d.inputs.begin() + static_cast<std::size_t>(i + 1) * d.in_dim, x.begin());
        std::vector<double> out = rescaled_forward(sub, ctx.report, x);
        for (int j = 0; j < d.out_dim; ++j) {
            double e = out[j] - d.targets[static_cast<std::size_t>(i) * d.out_dim + j];
            total += e * e;
        }
    }
    return total / (static_cast<double>(d.n) * d.out_dim);
}

double train_masked(const RepContext& ctx, const MaskSet& masks, const ExperimentConfig& cfg,
                    std::uint64_t seed) {
    MaskedMLP sub = ctx.mother;
    apply_mask(sub, masks);
    TrainOptions opt;
    opt.epochs = cfg.train_epochs;
    opt.batch_size = cfg.batch_size;
    opt.lr = cfg.train_lr;
    opt.seed = seed;
    return train(sub, ctx.train_set, ctx.test_set, ctx.kind, opt);
}

MaskSet run_strategy(const RepContext& ctx, const ExperimentConfig& cfg, Method method, double rho,
                     std::uint64_t seed) {
    const PruneStrategy& st = cfg.strategy;
    switch (st.kind) {
        case PruneStrategy::Kind::Singleshot:
            return singleshot(ctx.mother, method, rho, &ctx.train_set, ctx.kind,
                              method == Method::Synflow ? st.synflow_rounds : 1, st.scope, seed);
        case PruneStrategy::Kind::Multishot:
            return multishot(ctx.mother, method, rho, ctx.train_set, ctx.kind, st.rounds,
                             st.epochs_per_round, st.scope, seed);
        case PruneStrategy::Kind::EdgePopup:
            return edge_popup(ctx.mother, rho, st.edge_popup_epochs, st.anneal, ctx.train_set,
                              ctx.kind, seed, st.edge_popup_lr);
    }
    throw std::invalid_argument("bad strategy");
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    int reps = cfg.repetitions;
    std::vector<RepContext> contexts;
    contexts.reserve(reps);
    for (int rep = 0; rep < reps; ++rep) contexts.push_back(make_rep(cfg, rep));

    std::vector<double> rhos = cfg.sparsities;
    if (cfg.include_planted_sparsity) rhos.insert(rhos.begin(), contexts[0].planted_rho);

    struct Cell {
        int rep, rho_idx, method_idx;  // method_idx == -1 -> planted oracle
    };
    // edge-popup trains its own scores; the methods list does not apply
    bool is_edge_popup = cfg.strategy.kind == PruneStrategy::Kind::EdgePopup;
    int n_methods = is_edge_popup ? 1 : static_cast<int>(cfg.methods.size());
    std::vector<Cell> cells;
    for (int rep = 0; rep < reps; ++rep) {
        if (cfg.include_planted_oracle) cells.push_back({rep, -1, -1});
        for (int r = 0; r < static_cast<int>(rhos.size()); ++r)
            for (int m = 0; m < n_methods; ++m) cells.push_back({rep, r, m});
    }

    std::vector<ResultRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= cells.size()) break;
            const Cell& cell = cells[c];
            const RepContext& ctx = contexts[cell.rep];
            ResultRow row;
            row.task = task_name(cfg.task);
            row.strategy = strategy_name(cfg.strategy);
            row.seed = ctx.seed;

            if (cell.method_idx < 0) {
                // ground-truth planted mask
                row.method = "planted";
                row.target_rho = ctx.planted_rho;
                MaskedMLP sub = ctx.mother;
                apply_mask(sub, ctx.planted);
                row.achieved_rho = sparsity(sub);
                row.post_prune = metric_of_masked(ctx, ctx.planted);
                row.post_prune_rescaled = metric_rescaled(ctx, ctx.planted);
                row.post_train = train_masked(ctx, ctx.planted, cfg, derive_seed(ctx.seed, 40));
                CollapseReport col = detect_layer_collapse(ctx.planted, ctx.mother.arch);
                row.layer_collapse = !col.collapsed_layers.empty() || col.flow_interrupted;
                row.planted_iou = 1.0;
                row.planted_recovered = 1.0;
            } else {
                Method method = is_edge_popup ? Method::Random : cfg.methods[cell.method_idx];
                double rho = rhos[cell.rho_idx];
                row.method = is_edge_popup ? "edge-popup" : method_name(method);
                row.target_rho = rho;
                std::uint64_t cell_seed =
                    derive_seed(ctx.seed, 50 + cell.method_idx, cell.rho_idx);
                MaskSet masks = run_strategy(ctx, cfg, method, rho, cell_seed);
                MaskedMLP sub = ctx.mother;
                apply_mask(sub, masks);
                row.achieved_rho = sparsity(sub);
                row.post_prune = metric_of_masked(ctx, masks);
                row.post_train = train_masked(ctx, masks, cfg, derive_seed(cell_seed, 41));
                CollapseReport col = detect_layer_collapse(masks, ctx.mother.arch);
                row.layer_collapse = !col.collapsed_layers.empty() || col.flow_interrupted;
                RecoveryMetrics rec = recovery_metrics(masks, ctx.planted);
                row.planted_iou = rec.iou;
                row.planted_recovered = rec.recovered_fraction;
            }
            rows[c] = std::move(row);
        }
    };

    int n_threads = std::min<int>(worker_thread_count(), static_cast<int>(cells.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return rows;
}

namespace {

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

void write_tsv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "task\tmethod\tstrategy\ttarget_rho\tachieved_rho\tpost_prune\tpost_prune_rescaled"
        << "\tpost_train\tseed\tlayer_collapse\tplanted_iou\tplanted_recovered\n";
    for (const ResultRow& r : rows) {
        out << r.task << '\t' << r.method << '\t' << r.strategy << '\t' << fmt(r.target_rho)
            << '\t' << fmt(r.achieved_rho) << '\t' << fmt(r.post_prune) << '\t'
            << (r.post_prune_rescaled ? fmt(*r.post_prune_rescaled) : std::string())
            << '\t' << fmt(r.post_train) << '\t' << r.seed << '\t' << (r.layer_collapse ? 1 : 0)
            << '\t' << fmt(r.planted_iou) << '\t' << fmt(r.planted_recovered) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ResultRow> read_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        while (true) {
            std::size_t tab = line.find('\t', pos);
            f.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (f.size() != 12) throw std::runtime_error("bad tsv row: " + line);
        ResultRow r;
        r.task = f[0];
        r.method = f[1];
        r.strategy = f[2];
        r.target_rho = std::stod(f[3]);
        r.achieved_rho = std::stod(f[4]);
        r.post_prune = std::stod(f[5]);
        if (!f[6].empty()) r.post_prune_rescaled = std::stod(f[6]);
        r.post_train = std::stod(f[7]);
        r.seed = std::stoull(f[8]);
        r.layer_collapse = f[9] == "1";
        r.planted_iou = std::stod(f[10]);
        r.planted_recovered = std::stod(f[11]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
    // aggregation key: (task, method, strategy, target_rho), first-seen order
    std::vector<AggregateRow> agg;
    for (const ResultRow& r : rows) {
        AggregateRow* slot = nullptr;
        for (AggregateRow& a : agg)
            if (a.task == r.task && a.method == r.method && a.strategy == r.strategy &&
                a.target_rho == r.target_rho) {
                slot = &a;
                break;
            }
        if (!slot) {
            agg.emplace_back();
            slot = &agg.back();
            slot->task = r.task;
            slot->method = r.method;
            slot->strategy = r.strategy;
            slot->target_rho = r.target_rho;
            slot->post_prune_min = slot->post_prune_max = r.post_prune;
            slot->post_train_min = slot->post_train_max = r.post_train;
        }
        slot->n += 1;
        slot->post_prune_mean += r.post_prune;
        slot->post_train_mean += r.post_train;
        slot->post_prune_min = std::min(slot->post_prune_min, r.post_prune);
        slot->post_prune_max = std::max(slot->post_prune_max, r.post_prune);
        slot->post_train_min = std::min(slot->post_train_min, r.post_train);
        slot->post_train_max = std::max(slot->post_train_max, r.post_train);
        slot->collapse_count += r.layer_collapse ? 1 : 0;
    }
    for (AggregateRow& a : agg) {
        a.post_prune_mean /= a.n;
        a.post_train_mean /= a.n;
    }
    return agg;
}

void write_aggregate_tsv(const std::vector<AggregateRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "task\tmethod\tstrategy\ttarget_rho\tn\tpost_prune_mean\tpost_prune_min"
        << "\tpost_prune_max\tpost_train_mean\tpost_train_min\tpost_train_max\tcollapse_count\n";
    for (const AggregateRow& a : rows) {
        out << a.task << '\t' << a.method << '\t' << a.strategy << '\t' << fmt(a.target_rho)
            << '\t' << a.n << '\t' << fmt(a.post_prune_mean) << '\t' << fmt(a.post_prune_min)
            << '\t' << fmt(a.post_prune_max) << '\t' << fmt(a.post_train_mean) << '\t'
            << fmt(a.post_train_min) << '\t' << fmt(a.post_train_max) << '\t' << a.collapse_count
            << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace plantbench
