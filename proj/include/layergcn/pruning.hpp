#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "layergcn/core.hpp"
#include "layergcn/graph.hpp"

namespace layergcn {

enum class DropStrategy { degree, uniform, mixed, none };

inline const char* drop_strategy_name(DropStrategy s) {
    switch (s) {
        case DropStrategy::degree: return "degree";
        case DropStrategy::uniform: return "uniform";
        case DropStrategy::mixed: return "mixed";
        case DropStrategy::none: return "none";
    }
    return "?";
}

inline DropStrategy parse_drop_strategy(const std::string& s) {
    if (s == "degree") return DropStrategy::degree;
    if (s == "uniform") return DropStrategy::uniform;
    if (s == "mixed") return DropStrategy::mixed;
    if (s == "none") return DropStrategy::none;
    throw config_error("unknown dropout strategy: '" + s +
                       "' (expected degree|uniform|mixed|none)");
}

struct PruneConfig {
    DropStrategy strategy = DropStrategy::none;
    double ratio = 0.0;  // m / M, fraction of edges dropped per epoch
};

// Unnormalized keep weight per edge, 1/(sqrt(d_i) sqrt(d_j)) with the FULL
// graph's degrees: edges between popular nodes are the first to go.
inline std::vector<double> edge_keep_weights(const BipartiteGraph& g) {
    std::vector<double> w(g.edges.size());
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        const auto& [u, i] = g.edges[k];
        w[k] = 1.0 / (std::sqrt(static_cast<double>(g.degree[u])) *
                      std::sqrt(static_cast<double>(g.degree[g.item_node(i)])));
    }
    return w;
}

inline int edges_to_keep(std::size_t n_edges, double ratio) {
    if (ratio < 0.0 || ratio >= 1.0) throw config_error("dropout ratio must be in [0,1)");
    const auto m = static_cast<long long>(std::llround(ratio * static_cast<double>(n_edges)));
    if (m >= static_cast<long long>(n_edges))
        throw config_error("dropout ratio leaves no edges to keep");
    return static_cast<int>(n_edges - static_cast<std::size_t>(m));
}

// Weighted sampling without replacement via the exponential race: item k gets
// key Exp(1)/w_k and the n_keep smallest keys win. Equivalent to successive
// draws from the normalized weight distribution, removing each winner.
// Returned indices are sorted.
inline std::vector<int> weighted_sample_without_replacement(const std::vector<double>& weights,
                                                            int n_keep, rng_t& rng) {
    const int m = static_cast<int>(weights.size());
    if (n_keep > m) throw config_error("cannot keep more items than available");
    std::vector<std::pair<double, int>> keys(m);
    for (int k = 0; k < m; ++k) {
        if (!(weights[k] > 0.0)) throw config_error("sampling weights must be positive");
        keys[k] = {exp_draw(rng) / weights[k], k};
    }
    std::nth_element(keys.begin(), keys.begin() + n_keep, keys.end());
    std::vector<int> kept(n_keep);
    for (int k = 0; k < n_keep; ++k) kept[k] = keys[k].second;
    std::sort(kept.begin(), kept.end());
    return kept;
}

inline std::vector<int> degree_drop_sample(const BipartiteGraph& g, double ratio, rng_t& rng) {
    const int n_keep = edges_to_keep(g.edges.size(), ratio);
    return weighted_sample_without_replacement(edge_keep_weights(g), n_keep, rng);
}

// Uniform subset of exactly M - m edges (partial Fisher-Yates).
inline std::vector<int> uniform_drop_sample(const BipartiteGraph& g, double ratio, rng_t& rng) {
    const int m = static_cast<int>(g.edges.size());
    const int n_keep = edges_to_keep(g.edges.size(), ratio);
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    for (int t = 0; t < n_keep; ++t) {
        const int j = t + uniform_int(rng, m - t);
        std::swap(idx[t], idx[j]);
    }
    idx.resize(n_keep);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Adjacency over the kept edges only, re-normalized with the pruned graph's
// degrees. Nodes that lost every edge get empty rows.
template <class S>
SparseMatrix<S> pruned_adjacency(const BipartiteGraph& g, const std::vector<int>& kept_edges) {
    std::vector<std::pair<int, int>> sub;
    sub.reserve(kept_edges.size());
    for (int k : kept_edges) {
        if (k < 0 || static_cast<std::size_t>(k) >= g.edges.size())
            throw data_error("kept edge index out of range");
        sub.push_back(g.edges[k]);
    }
    return normalized_adjacency<S>(g.n_users, g.n_items, sub);
}

// Per-epoch training adjacency. `mixed` alternates degree-sensitive (even
// epochs) with uniform (odd epochs). ratio 0 and strategy `none` return the
// full normalized adjacency without consuming the RNG, so those configs stay
// bit-identical to an unpruned run.
template <class S>
SparseMatrix<S> sample_epoch_adjacency(const BipartiteGraph& g, const PruneConfig& cfg, int epoch,
                                       rng_t& rng) {
    if (cfg.strategy == DropStrategy::none || cfg.ratio == 0.0) return normalize<S>(g);
    DropStrategy s = cfg.strategy;
    if (s == DropStrategy::mixed) s = (epoch % 2 == 0) ? DropStrategy::degree : DropStrategy::uniform;
    const std::vector<int> kept = (s == DropStrategy::degree)
                                      ? degree_drop_sample(g, cfg.ratio, rng)
                                      : uniform_drop_sample(g, cfg.ratio, rng);
    return pruned_adjacency<S>(g, kept);
}

}  // namespace layergcn
