#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "layergcn/core.hpp"
#include "layergcn/eval.hpp"
#include "layergcn/graph.hpp"
#include "layergcn/model.hpp"
#include "layergcn/pruning.hpp"

namespace layergcn {

struct TrainConfig {
    int batch_size = 2048;
    double learning_rate = 1e-3;
    double lambda = 1e-3;  // L2 coefficient on the full ego embedding matrix
    int max_epochs = 1000;
    int patience = 50;
    std::uint64_t seed = 42;
    int embedding_dim = 64;
    int eval_topk = 20;  // early-stopping metric: Recall@eval_topk on valid
    PruneConfig prune;
    ModelConfig model;

    // Collects every problem into one message instead of failing on the
    // first, so a bad config file is fixable in one pass.
    void validate() const {
        std::vector<std::string> bad;
        if (batch_size < 1) bad.push_back("batch_size must be >= 1");
        if (!(learning_rate > 0)) bad.push_back("learning_rate must be positive");
        if (lambda < 0) bad.push_back("lambda must be >= 0");
        if (max_epochs < 1) bad.push_back("max_epochs must be >= 1");
        if (patience < 1) bad.push_back("patience must be >= 1");
        if (patience > max_epochs) bad.push_back("patience must be <= max_epochs");
        if (embedding_dim < 1) bad.push_back("embedding_dim must be >= 1");
        if (eval_topk < 1) bad.push_back("eval_topk must be >= 1");
        if (model.n_layers < 1) bad.push_back("n_layers must be >= 1");
        if (!(model.epsilon > 0)) bad.push_back("epsilon must be positive");
        if (prune.ratio < 0 || prune.ratio >= 1) bad.push_back("dropout ratio must be in [0,1)");
        if (!bad.empty()) {
            std::string msg = "invalid config:";
            for (const auto& b : bad) msg += "\n  - " + b;
            throw config_error(msg);
        }
    }
};

// One training batch of (user, positive item, negative item) triples.
// Item entries are item-space indices; n_users maps them to node rows.
struct TripleBatch {
    int n_users = 0;
    std::vector<int> u, i, j;
    std::size_t size() const { return u.size(); }
};

inline double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// sum_b -ln sigma(pos_b - neg_b), evaluated as softplus(-(pos-neg)).
template <class S>
S bpr_loss(const std::vector<S>& scores_pos, const std::vector<S>& scores_neg) {
    if (scores_pos.size() != scores_neg.size()) throw data_error("bpr_loss length mismatch");
    double s = 0.0;
    for (std::size_t b = 0; b < scores_pos.size(); ++b) {
        s += softplus(-(static_cast<double>(scores_pos[b]) - static_cast<double>(scores_neg[b])));
    }
    return static_cast<S>(s);
}

template <class S>
S total_loss(S bpr, const Matrix<S>& x0, S lambda) {
    if (lambda < 0) throw config_error("lambda must be >= 0");
    return bpr + lambda * frobenius_sq(x0);
}

inline std::vector<std::vector<int>> build_user_items(const InteractionLog& train) {
    return items_by_user(train);
}

// Uniform draw over items the user has NOT interacted with in train,
// by rejection. `user_items` rows must be sorted.
inline std::vector<int> sample_negatives(const std::vector<std::vector<int>>& user_items,
                                         int n_items, const std::vector<int>& users, rng_t& rng) {
    std::vector<int> out;
    out.reserve(users.size());
    for (int u : users) {
        const auto& pos = user_items[u];
        if (static_cast<int>(pos.size()) >= n_items)
            throw data_error("user " + std::to_string(u) +
                             " interacted with every item; no negative exists");
        int cand = uniform_int(rng, n_items);
        while (std::binary_search(pos.begin(), pos.end(), cand)) {
            cand = uniform_int(rng, n_items);
        }
        out.push_back(cand);
    }
    return out;
}

inline std::vector<int> sample_negatives(const InteractionLog& train,
                                         const std::vector<int>& users, rng_t& rng) {
    return sample_negatives(build_user_items(train), train.n_items, users, rng);
}

namespace detail {

// Gradient of the summed BPR terms w.r.t. the final embeddings X.
// d/dDelta softplus(-Delta) = -sigma(-Delta), with Delta = r_ui - r_uj.
template <class S>
Matrix<S> score_gradient(const Matrix<S>& X, const TripleBatch& batch) {
    Matrix<S> g(X.rows, X.cols);
    const int t = X.cols;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const int ru = batch.u[b];
        const int ri = batch.n_users + batch.i[b];
        const int rj = batch.n_users + batch.j[b];
        const S* xu = X.row(ru);
        const S* xi = X.row(ri);
        const S* xj = X.row(rj);
        const double delta = static_cast<double>(dot(xu, xi, t)) - static_cast<double>(dot(xu, xj, t));
        const S w = static_cast<S>(stable_sigmoid(-delta));
        S* gu = g.row(ru);
        S* gi = g.row(ri);
        S* gj = g.row(rj);
        for (int c = 0; c < t; ++c) {
            gu[c] -= w * (xi[c] - xj[c]);
            gi[c] -= w * xu[c];
            gj[c] += w * xu[c];
        }
    }
    return g;
}

}  // namespace detail

// Exact gradient of total_loss w.r.t. the ego embeddings X^0, by reverse
// accumulation through the readout, the per-layer cosine refinement (both
// cosine arguments carry gradient: the propagated rows AND the ego anchor),
// and the propagation itself. The adjacency is symmetric, so the transposed
// propagation in the backward direction reuses the same matrix.
template <class S>
Matrix<S> backward(const ForwardTrace<S>& trace, const TripleBatch& batch,
                   const SparseMatrix<S>& adj, const Matrix<S>& x0, S lambda,
                   const ModelConfig& cfg) {
    const int n = x0.rows;
    const int t = x0.cols;
    Matrix<S> g = detail::score_gradient(trace.final, batch);

    Matrix<S> grad(n, t);
    if (cfg.variant == Variant::bpr_mf) {
        grad = g;
    } else if (cfg.variant == Variant::lightgcn) {
        const S c = S(1) / static_cast<S>(cfg.n_layers + 1);
        // T_l = dL/dX^l; T_L = c g, T_{l-1} = A T_l + c g, answer is T_0
        Matrix<S> acc(n, t);
        for (std::size_t k = 0; k < acc.data.size(); ++k) acc.data[k] = c * g.data[k];
        Matrix<S> propagated(n, t);
        for (int l = cfg.n_layers; l >= 1; --l) {
            spmm(adj, acc, propagated);
            for (std::size_t k = 0; k < acc.data.size(); ++k)
                acc.data[k] = propagated.data[k] + c * g.data[k];
        }
        grad = std::move(acc);
    } else {
        const S eps = static_cast<S>(cfg.epsilon);
        if (static_cast<int>(trace.propagated.size()) != cfg.n_layers)
            throw data_error("trace does not match config (propagated layers missing)");

        std::vector<S> x0_norm(n);
        for (int v = 0; v < n; ++v) x0_norm[v] = norm2(x0.row(v), t);

        Matrix<S> gx = g;  // dL/dX^L (readout contribution)
        Matrix<S> ganchor(n, t);
        Matrix<S> gh(n, t);
        Matrix<S> propagated_grad(n, t);
        for (int l = cfg.n_layers; l >= 1; --l) {
            const Matrix<S>& h = trace.propagated[l - 1];
            const std::vector<S>& a = trace.sims[l - 1];
            for (int v = 0; v < n; ++v) {
                const S* hv = h.row(v);
                const S* zv = x0.row(v);
                const S* gv = gx.row(v);
                S* ghv = gh.row(v);
                S* gav = ganchor.row(v);

                const S nh = norm2(hv, t);
                const S nz = x0_norm[v];
                const S p = nh * nz;
                const S q = std::max(p, eps);
                const S ga = dot(gv, hv, t);  // dL/da at node v
                const S scale = a[v] + eps;
                if (p > eps) {
                    // da/dh = z/q - (a/q)(nz/nh) h ; da/dz symmetric
                    const S ch = (a[v] / q) * (nz / nh);
                    const S cz = (a[v] / q) * (nh / nz);
                    for (int c = 0; c < t; ++c) {
                        ghv[c] = scale * gv[c] + ga * (zv[c] / q - ch * hv[c]);
                        gav[c] += ga * (hv[c] / q - cz * zv[c]);
                    }
                } else {
                    // denominator pinned at eps (subgradient choice at the max)
                    for (int c = 0; c < t; ++c) {
                        ghv[c] = scale * gv[c] + ga * zv[c] / q;
                        gav[c] += ga * hv[c] / q;
                    }
                }
            }
            spmm(adj, gh, propagated_grad);
            if (l > 1) {
                for (std::size_t k = 0; k < gx.data.size(); ++k)
                    gx.data[k] = propagated_grad.data[k] + g.data[k];
            } else {
                gx = propagated_grad;  // dL/dX^0 through the propagation path
            }
        }
        grad = std::move(gx);
        for (std::size_t k = 0; k < grad.data.size(); ++k) grad.data[k] += ganchor.data[k];
    }

    if (lambda != 0) {
        for (std::size_t k = 0; k < grad.data.size(); ++k)
            grad.data[k] += S(2) * lambda * x0.data[k];
    }
    if (!all_finite(grad)) throw numeric_error("non-finite gradient");
    return grad;
}

template <class S>
struct AdamState {
    Matrix<S> m, v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    AdamState(int rows, int cols) : m(rows, cols), v(rows, cols) {}
};

template <class S>
void adam_step(AdamState<S>& state, Matrix<S>& x0, const Matrix<S>& grad, double lr) {
    if (!state.m.same_shape(x0) || !grad.same_shape(x0))
        throw data_error("adam_step shape mismatch");
    state.step += 1;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < x0.data.size(); ++k) {
        const double gk = static_cast<double>(grad.data[k]);
        const double mk = state.beta1 * static_cast<double>(state.m.data[k]) + (1.0 - state.beta1) * gk;
        const double vk = state.beta2 * static_cast<double>(state.v.data[k]) + (1.0 - state.beta2) * gk * gk;
        state.m.data[k] = static_cast<S>(mk);
        state.v.data[k] = static_cast<S>(vk);
        const double mhat = mk / c1;
        const double vhat = vk / c2;
        x0.data[k] -= static_cast<S>(lr * mhat / (std::sqrt(vhat) + state.eps));
    }
}

// Stops once `patience` consecutive epochs pass without strict improvement.
struct EarlyStopper {
    int patience;
    double best = -1.0;
    int best_epoch = 0;
    int epochs_since_best = 0;

    explicit EarlyStopper(int p) : patience(p) {}

    bool improved(double metric) const { return metric > best; }

    // returns true when training should stop after this epoch
    bool update(int epoch, double metric) {
        if (metric > best) {
            best = metric;
            best_epoch = epoch;
            epochs_since_best = 0;
            return false;
        }
        ++epochs_since_best;
        return epochs_since_best >= patience;
    }
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double mean_batch_loss = 0.0;
    double valid_metric = 0.0;
    double seconds = 0.0;
};

struct TrainingLog {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    double best_metric = 0.0;
    bool early_stopped = false;
};

template <class S>
struct FitResult {
    Matrix<S> embeddings;  // ego embeddings X^0 at the best validation epoch
    TrainingLog log;
};

// Xavier-uniform init over the N x T parameter matrix.
template <class S>
Matrix<S> xavier_init(int rows, int cols, rng_t& rng) {
    Matrix<S> m(rows, cols);
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (auto& v : m.data) v = static_cast<S>((2.0 * uniform01(rng) - 1.0) * bound);
    return m;
}

// Called after each epoch's validation forward (full adjacency) — used for
// the per-epoch diagnostics exports and the dropout-comparison study.
template <class S>
using EpochHook = std::function<void(const EpochRecord& rec, const ForwardTrace<S>& valid_trace,
                                     const Matrix<S>& x0)>;

// Full training loop: per epoch, sample the pruned adjacency, shuffle the
// train positives into batches with one fresh negative each, run
// forward/backward/Adam per batch, then score Recall@K on the validation
// split with the FULL adjacency (pruning is train-time only). Keeps the
// best-validation parameters and stops early after `patience` stale epochs.
template <class S>
FitResult<S> fit(const SplitBundle& splits, const TrainConfig& cfg,
                 const EpochHook<S>& hook = {}) {
    cfg.validate();
    const InteractionLog& train = splits.train;
    if (train.interactions.empty()) throw data_error("train split is empty");

    const BipartiteGraph g = build_graph(train);
    const SparseMatrix<S> full_adj = normalize<S>(g);
    const int n = g.num_nodes();

    rng_t rng_init = make_rng(cfg.seed, 0);
    rng_t rng_prune = make_rng(cfg.seed, 1);
    rng_t rng_shuffle = make_rng(cfg.seed, 2);
    rng_t rng_neg = make_rng(cfg.seed, 3);

    Matrix<S> x0 = xavier_init<S>(n, cfg.embedding_dim, rng_init);
    AdamState<S> adam(n, cfg.embedding_dim);

    const auto user_items = build_user_items(train);
    const auto valid_items = items_by_user(splits.valid);

    FitResult<S> result;
    result.embeddings = x0;
    EarlyStopper stopper(cfg.patience);

    std::vector<int> order(train.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t_start = std::chrono::steady_clock::now();

        const SparseMatrix<S> adj =
            (cfg.prune.strategy == DropStrategy::none || cfg.prune.ratio == 0.0)
                ? full_adj
                : sample_epoch_adjacency<S>(g, cfg.prune, epoch - 1, rng_prune);

        shuffle_inplace(order, rng_shuffle);
        std::vector<int> epoch_users(order.size());
        for (std::size_t k = 0; k < order.size(); ++k)
            epoch_users[k] = train.interactions[order[k]].user;
        const std::vector<int> negatives =
            sample_negatives(user_items, train.n_items, epoch_users, rng_neg);

        double loss_sum = 0.0;
        int n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            TripleBatch batch;
            batch.n_users = train.n_users;
            batch.u.reserve(stop - start);
            batch.i.reserve(stop - start);
            batch.j.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                const auto& r = train.interactions[order[k]];
                batch.u.push_back(r.user);
                batch.i.push_back(r.item);
                batch.j.push_back(negatives[k]);
            }

            const ForwardTrace<S> trace = forward(adj, x0, cfg.model);
            std::vector<S> pos(batch.size()), neg(batch.size());
            for (std::size_t b = 0; b < batch.size(); ++b) {
                const S* xu = trace.final.row(batch.u[b]);
                pos[b] = dot(xu, trace.final.row(batch.n_users + batch.i[b]), cfg.embedding_dim);
                neg[b] = dot(xu, trace.final.row(batch.n_users + batch.j[b]), cfg.embedding_dim);
            }
            const double loss =
                static_cast<double>(total_loss(bpr_loss(pos, neg), x0, static_cast<S>(cfg.lambda)));
            if (!std::isfinite(loss))
                throw numeric_error("training diverged: non-finite loss at epoch " +
                                    std::to_string(epoch) + ", batch " + std::to_string(n_batches));

            const Matrix<S> grad =
                backward(trace, batch, adj, x0, static_cast<S>(cfg.lambda), cfg.model);
            adam_step(adam, x0, grad, cfg.learning_rate);
            loss_sum += loss;
            ++n_batches;
        }

        // validation and diagnostics always use the full graph
        const ForwardTrace<S> vtrace = forward(full_adj, x0, cfg.model);
        const double metric = mean_recall_at_k(vtrace.final, train.n_users, user_items,
                                               valid_items, cfg.eval_topk);

        const auto t_end = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_batch_loss = loss_sum / std::max(1, n_batches);
        rec.valid_metric = metric;
        rec.seconds = std::chrono::duration<double>(t_end - t_start).count();
        result.log.epochs.push_back(rec);
        if (hook) hook(rec, vtrace, x0);

        const bool improved = stopper.improved(metric);
        const bool stop = stopper.update(epoch, metric);
        if (improved) result.embeddings = x0;
        if (stop) {
            result.log.early_stopped = true;
            break;
        }
    }
    result.log.best_epoch = stopper.best_epoch;
    result.log.best_metric = stopper.best;
    return result;
}

}  // namespace layergcn
