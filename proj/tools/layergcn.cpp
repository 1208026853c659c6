// Command-line front end: prepare data, train, evaluate, run diagnostics,
// and run the DegreeDrop-vs-DropEdge comparison study.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "layergcn/eval.hpp"
#include "layergcn/graph.hpp"
#include "layergcn/ingest.hpp"
#include "layergcn/io.hpp"
#include "layergcn/model.hpp"
#include "layergcn/pruning.hpp"
#include "layergcn/training.hpp"

namespace fs = std::filesystem;
using namespace layergcn;

namespace {

char parse_delimiter(const std::string& s) {
    if (s == "tab" || s == "\\t") return '\t';
    if (s == "comma") return ',';
    if (s == "space") return ' ';
    if (s.size() == 1) return s[0];
    throw config_error("bad delimiter: '" + s + "' (use tab|comma|space or a single character)");
}

// Flat key=value config file ('#' starts a comment). Values here fill in any
// option the user did not pass on the command line: flag > config > default.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(line_no) + ": expected key=value");
        kv[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
    }
    return kv;
}

// Shared train-time options; compare-dropout reuses them per run.
struct TrainOptions {
    std::string splits_dir;
    std::string out_dir;
    std::string config_path;
    std::string variant = "layergcn";
    std::string strategy = "none";
    double dropout_ratio = 0.0;
    int layers = 4;
    double epsilon = 1e-8;
    double lambda = 1e-3;
    double lr = 1e-3;
    int batch_size = 2048;
    int embedding_dim = 64;
    int max_epochs = 1000;
    int patience = 50;
    int topk = 20;
    std::uint64_t seed = 42;
    int threads = 1;
    int precision = 64;
    bool diagnostics = false;
    bool quiet = false;

    TrainConfig to_config() const {
        TrainConfig cfg;
        cfg.batch_size = batch_size;
        cfg.learning_rate = lr;
        cfg.lambda = lambda;
        cfg.max_epochs = max_epochs;
        cfg.patience = patience;
        cfg.seed = seed;
        cfg.embedding_dim = embedding_dim;
        cfg.eval_topk = topk;
        cfg.model.variant = parse_variant(variant);
        cfg.model.n_layers = layers;
        cfg.model.epsilon = epsilon;
        cfg.prune.strategy = parse_drop_strategy(strategy);
        cfg.prune.ratio = dropout_ratio;
        return cfg;
    }

    // The recorded value of every semantic option, path- and verbosity-free;
    // re-running with this file reproduces the run bit for bit.
    std::string snapshot() const {
        std::ostringstream os;
        os << "variant=" << variant << '\n'
           << "layers=" << layers << '\n'
           << "epsilon=" << detail::fmt_double(epsilon, "%.17g") << '\n'
           << "lambda=" << detail::fmt_double(lambda, "%.17g") << '\n'
           << "lr=" << detail::fmt_double(lr, "%.17g") << '\n'
           << "batch-size=" << batch_size << '\n'
           << "embedding-dim=" << embedding_dim << '\n'
           << "max-epochs=" << max_epochs << '\n'
           << "patience=" << patience << '\n'
           << "topk=" << topk << '\n'
           << "seed=" << seed << '\n'
           << "precision=" << precision << '\n'
           << "dropout-ratio=" << detail::fmt_double(dropout_ratio, "%.17g") << '\n'
           << "dropout-strategy=" << strategy << '\n'
           << "diagnostics=" << (diagnostics ? "true" : "false") << '\n';
        return os.str();
    }

    // Fills options the command line left untouched from the config file.
    // Unknown keys and unparsable values are all reported together.
    void apply_config(const CLI::App* sub) {
        if (config_path.empty()) return;
        const auto kv = read_config_file(config_path);
        std::vector<std::string> bad;
        for (const auto& [key, value] : kv) {
            if (sub->count("--" + key) > 0) continue;  // flag wins
            try {
                if (key == "variant") variant = value;
                else if (key == "dropout-strategy") strategy = value;
                else if (key == "dropout-ratio") dropout_ratio = std::stod(value);
                else if (key == "layers") layers = std::stoi(value);
                else if (key == "epsilon") epsilon = std::stod(value);
                else if (key == "lambda") lambda = std::stod(value);
                else if (key == "lr") lr = std::stod(value);
                else if (key == "batch-size") batch_size = std::stoi(value);
                else if (key == "embedding-dim") embedding_dim = std::stoi(value);
                else if (key == "max-epochs") max_epochs = std::stoi(value);
                else if (key == "patience") patience = std::stoi(value);
                else if (key == "topk") topk = std::stoi(value);
                else if (key == "seed") seed = std::stoull(value);
                else if (key == "threads") threads = std::stoi(value);
                else if (key == "precision") precision = std::stoi(value);
                else if (key == "diagnostics") diagnostics = (value == "true" || value == "1");
                else bad.push_back("unknown key '" + key + "'");
            } catch (const std::exception&) {
                bad.push_back("bad value for '" + key + "': '" + value + "'");
            }
        }
        if (!bad.empty()) {
            std::string msg = "invalid config file " + config_path + ":";
            for (const auto& b : bad) msg += "\n  - " + b;
            throw config_error(msg);
        }
        if (precision != 32 && precision != 64)
            throw config_error("precision must be 32 or 64");
    }
};

void add_train_flags(CLI::App* sub, TrainOptions& o, bool with_io = true) {
    if (with_io) {
        sub->add_option("--splits", o.splits_dir, "Directory produced by `prepare`")->required();
        sub->add_option("--out", o.out_dir, "Run output directory")->required();
    }
    sub->add_option("--config", o.config_path,
                    "Config file (flat key=value lines; flags take precedence)");
    sub->add_option("--variant", o.variant, "Model variant: layergcn|lightgcn|bpr_mf");
    sub->add_option("--layers", o.layers, "Number of propagation layers L");
    sub->add_option("--epsilon", o.epsilon, "Cosine guard / additive scale epsilon");
    sub->add_option("--lambda", o.lambda, "L2 regularization coefficient");
    sub->add_option("--lr", o.lr, "Adam learning rate");
    sub->add_option("--batch-size", o.batch_size, "Triples per batch");
    sub->add_option("--embedding-dim", o.embedding_dim, "Embedding size T");
    sub->add_option("--max-epochs", o.max_epochs, "Epoch budget");
    sub->add_option("--patience", o.patience, "Early-stopping patience (epochs)");
    sub->add_option("--topk", o.topk, "K of the validation Recall@K early-stop metric");
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--threads", o.threads, "Worker threads for evaluation (default 1)");
    sub->add_option("--precision", o.precision, "Float width for training arithmetic: 32 or 64")
        ->check(CLI::IsMember({32, 64}));
    sub->add_option("--dropout-ratio", o.dropout_ratio, "Edge dropout ratio m/M in [0,1)");
    sub->add_option("--dropout-strategy", o.strategy,
                    "Edge dropout strategy: degree|uniform|mixed|none");
}

int effective_threads(const CLI::App* sub, int flag_value) {
    if (sub->count("--threads") > 0) return flag_value;
    if (const char* env = std::getenv("LAYERGCN_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (...) {
            throw config_error("LAYERGCN_THREADS is not an integer: " + std::string(env));
        }
    }
    return flag_value;
}

std::map<std::string, std::uint64_t> split_checksums(const std::string& dir) {
    std::map<std::string, std::uint64_t> sums;
    for (const char* f : {"train.tsv", "valid.tsv", "test.tsv", "id_map.tsv"}) {
        const std::string path = dir + "/" + std::string(f);
        if (fs::exists(path)) sums[path] = fnv1a_file(path);
    }
    return sums;
}

// ---- prepare ---------------------------------------------------------------

struct PrepareOptions {
    std::string input;
    std::string out_dir;
    std::string delimiter = "tab";
    int k_core = 5;
    int k_user = 0;  // 0 = use k_core
    int k_item = 0;
    std::vector<double> ratios = {0.7, 0.1, 0.2};
    bool dump_adjacency = false;
};

int cmd_prepare(const PrepareOptions& o) {
    if (o.ratios.size() != 3) throw config_error("--ratios needs exactly 3 values");
    const int ku = o.k_user > 0 ? o.k_user : o.k_core;
    const int ki = o.k_item > 0 ? o.k_item : o.k_core;

    InteractionLog log = load_interactions(o.input, parse_delimiter(o.delimiter));
    std::fprintf(stderr, "loaded %zu interactions (%d users, %d items)\n", log.size(),
                 log.n_users, log.n_items);
    log = k_core_filter(log, ku, ki);
    const SplitBundle splits = chronological_split(log, o.ratios[0], o.ratios[1], o.ratios[2]);
    if (splits.valid.interactions.empty() || splits.test.interactions.empty())
        std::fprintf(stderr, "warning: %s split is empty after cold-start removal\n",
                     splits.valid.interactions.empty() ? "valid" : "test");

    write_splits(o.out_dir, splits);
    const DatasetStats stats = dataset_stats(log);
    write_stats(o.out_dir + "/stats.csv", stats);
    if (o.dump_adjacency) {
        const BipartiteGraph g = build_graph(splits.train);
        auto out = std::ofstream(o.out_dir + "/adjacency.txt", std::ios::binary);
        dump_adjacency(normalize<double>(g), out);
    }

    std::printf("n_users\tn_items\tn_interactions\tsparsity\n");
    std::printf("%d\t%d\t%zu\t%.4f%%\n", stats.n_users, stats.n_items, stats.n_interactions,
                stats.sparsity_pct);
    std::printf("train=%zu valid=%zu test=%zu cold_dropped=%zu\n", splits.train.size(),
                splits.valid.size(), splits.test.size(), splits.n_cold_dropped);
    return 0;
}

// ---- train -----------------------------------------------------------------

int cmd_train(CLI::App* sub, TrainOptions& o) {
    o.apply_config(sub);
    o.threads = effective_threads(sub, o.threads);
    const TrainConfig cfg = o.to_config();
    cfg.validate();
    if (o.diagnostics && cfg.model.variant != Variant::layergcn)
        throw config_error("--diagnostics requires --variant layergcn");

    const SplitBundle splits = read_splits(o.splits_dir);
    fs::create_directories(o.out_dir);

    // manifest + config snapshot are written before training begins
    const std::string snapshot = o.snapshot();
    {
        auto out = std::ofstream(o.out_dir + "/config_snapshot.cfg", std::ios::binary);
        out << snapshot;
    }
    write_manifest(o.out_dir + "/manifest.txt", o.seed, snapshot, split_checksums(o.splits_dir),
                   {"checkpoint.bin", "train_log.csv", "timing.csv", "config_snapshot.cfg"});

    std::unique_ptr<LayerSeriesWriter> sim_ptr, div_ptr;
    if (o.diagnostics) {
        sim_ptr = std::make_unique<LayerSeriesWriter>(o.out_dir + "/layer_similarity.csv");
        div_ptr = std::make_unique<LayerSeriesWriter>(o.out_dir + "/layer_divergence.csv");
    }

    Checkpoint ckpt;
    ckpt.n_users = splits.train.n_users;
    ckpt.n_items = splits.train.n_items;
    ckpt.dim = cfg.embedding_dim;
    ckpt.seed = cfg.seed;
    ckpt.config_hash = fnv1a(snapshot);

    auto run = [&]<class S>() {
        EpochHook<S> hook = [&](const EpochRecord& rec, const ForwardTrace<S>& trace,
                                const Matrix<S>& x0) {
            if (!o.quiet)
                std::fprintf(stderr, "epoch %d  loss=%.6f  valid_recall@%d=%.6f\n", rec.epoch,
                             rec.mean_batch_loss, cfg.eval_topk, rec.valid_metric);
            if (sim_ptr) {
                const auto sims = mean_layer_similarity(trace);
                sim_ptr->append(rec.epoch, std::vector<double>(sims.begin(), sims.end()));
            }
            if (div_ptr) {
                const Matrix<S> d = layer_divergence(trace, x0);
                std::vector<double> mean_div(d.rows, 0.0);
                for (int l = 0; l < d.rows; ++l) {
                    double s = 0.0;
                    for (int v = 0; v < d.cols; ++v) s += static_cast<double>(d(l, v));
                    mean_div[l] = s / d.cols;
                }
                div_ptr->append(rec.epoch, mean_div);
            }
        };
        FitResult<S> r = fit<S>(splits, cfg, hook);
        ckpt.x0 = Matrix<double>(r.embeddings.rows, r.embeddings.cols);
        for (std::size_t k = 0; k < r.embeddings.data.size(); ++k)
            ckpt.x0.data[k] = static_cast<double>(r.embeddings.data[k]);
        return r.log;
    };
    const TrainingLog log =
        (o.precision == 32) ? run.template operator()<float>() : run.template operator()<double>();

    save_checkpoint(o.out_dir + "/checkpoint.bin", ckpt);
    write_train_log(o.out_dir + "/train_log.csv", log, cfg.eval_topk);
    write_timing(o.out_dir + "/timing.csv", log);
    std::printf("best_epoch=%d best_valid_recall@%d=%.6f epochs_run=%zu\n", log.best_epoch,
                cfg.eval_topk, log.best_metric, log.epochs.size());
    return 0;
}

// ---- evaluate ----------------------------------------------------------------

struct EvalOptions {
    std::string checkpoint;
    std::string splits_dir;
    std::string out_path;
    std::string per_user_path;
    std::string variant = "layergcn";
    int layers = 4;
    double epsilon = 1e-8;
    std::vector<int> ks = {10, 20, 50};
    int threads = 1;
};

int cmd_evaluate(CLI::App* sub, EvalOptions& o) {
    o.threads = effective_threads(sub, o.threads);
    const Checkpoint ckpt = load_checkpoint(o.checkpoint);
    const SplitBundle splits = read_splits(o.splits_dir);
    if (ckpt.n_users != splits.train.n_users)
        throw data_error("n_users mismatch: checkpoint has " + std::to_string(ckpt.n_users) +
                         ", splits have " + std::to_string(splits.train.n_users));
    if (ckpt.n_items != splits.train.n_items)
        throw data_error("n_items mismatch: checkpoint has " + std::to_string(ckpt.n_items) +
                         ", splits have " + std::to_string(splits.train.n_items));

    ModelConfig mcfg;
    mcfg.variant = parse_variant(o.variant);
    mcfg.n_layers = o.layers;
    mcfg.epsilon = o.epsilon;

    const BipartiteGraph g = build_graph(splits.train);
    const SparseMatrix<double> adj = normalize<double>(g);
    const ForwardTrace<double> trace = forward(adj, ckpt.x0, mcfg);
    const RankingResult res = evaluate(trace.final, splits, o.ks, o.threads);

    if (!o.out_path.empty()) write_metrics(o.out_path, res);
    if (!o.per_user_path.empty()) write_per_user_metrics(o.per_user_path, res);
    std::printf("K,recall,ndcg,n_evaluated_users\n");
    for (std::size_t ki = 0; ki < res.ks.size(); ++ki)
        std::printf("%d,%.6f,%.6f,%zu\n", res.ks[ki], res.mean_recall[ki], res.mean_ndcg[ki],
                    res.n_evaluated_users());
    return 0;
}

// ---- diagnose ------------------------------------------------------------

struct DiagnoseOptions {
    std::string checkpoint;
    std::string splits_dir;
    std::string out_dir;
    std::string variant = "layergcn";
    int layers = 4;
    double epsilon = 1e-8;
};

int cmd_diagnose(const DiagnoseOptions& o) {
    ModelConfig mcfg;
    mcfg.variant = parse_variant(o.variant);
    mcfg.n_layers = o.layers;
    mcfg.epsilon = o.epsilon;
    if (mcfg.variant != Variant::layergcn)
        throw config_error("diagnose requires a layergcn checkpoint (got --variant " + o.variant +
                           ")");

    const Checkpoint ckpt = load_checkpoint(o.checkpoint);
    const SplitBundle splits = read_splits(o.splits_dir);
    if (ckpt.n_users != splits.train.n_users || ckpt.n_items != splits.train.n_items)
        throw data_error("checkpoint and splits disagree on n_users/n_items");

    const BipartiteGraph g = build_graph(splits.train);
    const ForwardTrace<double> trace = forward(normalize<double>(g), ckpt.x0, mcfg);

    fs::create_directories(o.out_dir);
    // final-state export: epoch column is 0
    LayerSeriesWriter sim(o.out_dir + "/layer_similarity.csv");
    sim.append(0, mean_layer_similarity(trace));

    const Matrix<double> d = layer_divergence(trace, ckpt.x0);
    std::vector<double> mean_div(d.rows, 0.0);
    for (int l = 0; l < d.rows; ++l) {
        double s = 0.0;
        for (int v = 0; v < d.cols; ++v) s += d(l, v);
        mean_div[l] = s / d.cols;
    }
    LayerSeriesWriter div(o.out_dir + "/layer_divergence.csv");
    div.append(0, mean_div);
    std::printf("wrote %s/layer_similarity.csv and %s/layer_divergence.csv\n", o.out_dir.c_str(),
                o.out_dir.c_str());
    return 0;
}

// ---- compare-dropout -------------------------------------------------------

struct CompareOptions {
    TrainOptions train;
    std::vector<double> ratios = {0.1, 0.2};
    std::vector<std::string> strategies = {"degree", "uniform"};
    std::vector<std::uint64_t> seeds = {42};
};

int cmd_compare_dropout(CLI::App* sub, CompareOptions& o) {
    o.train.apply_config(sub);
    o.train.threads = effective_threads(sub, o.train.threads);
    const SplitBundle splits = read_splits(o.train.splits_dir);
    fs::create_directories(o.train.out_dir);

    auto report = std::ofstream(o.train.out_dir + "/report.csv", std::ios::binary);
    report << "strategy,ratio,seed,best_epoch,recall@20_e20,ndcg@20_e20,recall@20_e50,ndcg@20_e50,"
              "recall@20_best,ndcg@20_best\n";

    for (const std::string& strategy : o.strategies) {
        for (double ratio : o.ratios) {
            for (std::uint64_t seed : o.seeds) {
                TrainOptions to = o.train;
                to.strategy = strategy;
                to.dropout_ratio = ratio;
                to.seed = seed;
                const TrainConfig cfg = to.to_config();
                cfg.validate();

                char tag[128];
                std::snprintf(tag, sizeof(tag), "%s_%g_%llu", strategy.c_str(), ratio,
                              static_cast<unsigned long long>(seed));
                std::fprintf(stderr, "-- run %s\n", tag);

                // test metrics sampled mid-training at epochs 20 and 50
                double r20_e20 = -1, n20_e20 = -1, r20_e50 = -1, n20_e50 = -1;
                auto curve = std::ofstream(o.train.out_dir + "/loss_" + tag + ".csv",
                                           std::ios::binary);
                curve << "epoch,loss\n";
                EpochHook<double> hook = [&](const EpochRecord& rec,
                                             const ForwardTrace<double>& trace,
                                             const Matrix<double>&) {
                    char buf[64];
                    std::snprintf(buf, sizeof(buf), "%d,%.12g\n", rec.epoch, rec.mean_batch_loss);
                    curve << buf;
                    if (rec.epoch == 20 || rec.epoch == 50) {
                        const RankingResult res = evaluate(trace.final, splits, {20});
                        (rec.epoch == 20 ? r20_e20 : r20_e50) = res.mean_recall[0];
                        (rec.epoch == 20 ? n20_e20 : n20_e50) = res.mean_ndcg[0];
                    }
                };
                const FitResult<double> r = fit<double>(splits, cfg, hook);

                const BipartiteGraph g = build_graph(splits.train);
                const ForwardTrace<double> best_trace =
                    forward(normalize<double>(g), r.embeddings, cfg.model);
                const RankingResult best = evaluate(best_trace.final, splits, {20});

                auto cell = [](double v) { return v < 0 ? std::string() : detail::fmt_double(v); };
                report << strategy << ',' << ratio << ',' << seed << ',' << r.log.best_epoch << ','
                       << cell(r20_e20) << ',' << cell(n20_e20) << ',' << cell(r20_e50) << ','
                       << cell(n20_e50) << ',' << detail::fmt_double(best.mean_recall[0]) << ','
                       << detail::fmt_double(best.mean_ndcg[0]) << '\n';
            }
        }
    }
    std::printf("wrote %s/report.csv\n", o.train.out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"layergcn: layer-refined graph collaborative filtering"};
    app.require_subcommand(1);

    PrepareOptions prep;
    CLI::App* sub_prep = app.add_subcommand("prepare", "Filter, split and index raw interactions");
    sub_prep->add_option("--input", prep.input, "Raw interaction file (user, item, timestamp)")
        ->required();
    sub_prep->add_option("--out", prep.out_dir, "Output directory for splits")->required();
    sub_prep->add_option("--delimiter", prep.delimiter, "Field delimiter (tab|comma|space|char)");
    sub_prep->add_option("--k-core", prep.k_core, "k-core threshold for users and items");
    sub_prep->add_option("--k-user", prep.k_user, "Override user-side k (0 = use --k-core)");
    sub_prep->add_option("--k-item", prep.k_item, "Override item-side k (0 = use --k-core)");
    sub_prep->add_option("--ratios", prep.ratios, "Train/valid/test ratios")->delimiter(',');
    sub_prep->add_flag("--dump-adjacency", prep.dump_adjacency,
                       "Also dump the normalized train adjacency as (i, j, value) text");

    TrainOptions tr;
    CLI::App* sub_train = app.add_subcommand("train", "Train a model on prepared splits");
    add_train_flags(sub_train, tr);
    sub_train->add_flag("--diagnostics", tr.diagnostics,
                        "Write per-epoch layer similarity/divergence CSVs (layergcn only)");
    sub_train->add_flag("--quiet", tr.quiet, "Suppress per-epoch progress output");

    EvalOptions ev;
    CLI::App* sub_eval = app.add_subcommand("evaluate", "All-ranking Recall@K / NDCG@K");
    sub_eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint from `train`")->required();
    sub_eval->add_option("--splits", ev.splits_dir, "Split directory")->required();
    sub_eval->add_option("--topk", ev.ks, "Ks to evaluate")->delimiter(',');
    sub_eval->add_option("--out", ev.out_path, "Metrics CSV path");
    sub_eval->add_option("--per-user", ev.per_user_path, "Optional per-user metrics CSV");
    sub_eval->add_option("--variant", ev.variant, "Model variant used at train time");
    sub_eval->add_option("--layers", ev.layers, "Number of layers used at train time");
    sub_eval->add_option("--epsilon", ev.epsilon, "Epsilon used at train time");
    sub_eval->add_option("--threads", ev.threads, "Worker threads for evaluation");

    DiagnoseOptions diag;
    CLI::App* sub_diag = app.add_subcommand("diagnose", "Layer similarity/divergence export");
    sub_diag->add_option("--checkpoint", diag.checkpoint, "Checkpoint from `train`")->required();
    sub_diag->add_option("--splits", diag.splits_dir, "Split directory")->required();
    sub_diag->add_option("--out", diag.out_dir, "Output directory")->required();
    sub_diag->add_option("--variant", diag.variant, "Model variant (must be layergcn)");
    sub_diag->add_option("--layers", diag.layers, "Number of layers");
    sub_diag->add_option("--epsilon", diag.epsilon, "Epsilon");

    CompareOptions cmp;
    CLI::App* sub_cmp = app.add_subcommand("compare-dropout",
                                           "DegreeDrop vs DropEdge convergence/accuracy study");
    add_train_flags(sub_cmp, cmp.train);
    sub_cmp->add_option("--ratios", cmp.ratios, "Dropout ratios to sweep")->delimiter(',');
    sub_cmp->add_option("--strategies", cmp.strategies, "Strategies to sweep")->delimiter(',');
    sub_cmp->add_option("--seeds", cmp.seeds, "Seeds to sweep")->delimiter(',');
    sub_cmp->add_flag("--quiet", cmp.train.quiet, "Suppress per-epoch progress output");

    try {
        app.parse(argc, argv);
        if (sub_prep->parsed()) return cmd_prepare(prep);
        if (sub_train->parsed()) return cmd_train(sub_train, tr);
        if (sub_eval->parsed()) return cmd_evaluate(sub_eval, ev);
        if (sub_diag->parsed()) return cmd_diagnose(diag);
        if (sub_cmp->parsed()) return cmd_compare_dropout(sub_cmp, cmp);
        return 1;
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
