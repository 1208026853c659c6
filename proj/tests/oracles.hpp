// Independent reference implementations used as test oracles. Everything in
// here is straight-line dense/scalar code kept deliberately separate from the
// library kernels it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "layergcn/core.hpp"
#include "layergcn/ingest.hpp"

namespace oracle {

using DMat = std::vector<std::vector<double>>;

inline DMat dzeros(int r, int c) { return DMat(r, std::vector<double>(c, 0.0)); }

inline DMat dense_matmul(const DMat& a, const DMat& b) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b[0].size());
    const int k = static_cast<int>(b.size());
    DMat out = dzeros(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int t = 0; t < k; ++t) s += a[i][t] * b[t][j];
            out[i][j] = s;
        }
    return out;
}

// Dense D^{-1/2} A D^{-1/2} over a bipartite edge list (no self-loops).
inline DMat dense_normalized_adjacency(int n_users, int n_items,
                                       const std::vector<std::pair<int, int>>& edges) {
    const int n = n_users + n_items;
    DMat a = dzeros(n, n);
    std::vector<double> deg(n, 0.0);
    for (const auto& [u, i] : edges) {
        a[u][n_users + i] = 1.0;
        a[n_users + i][u] = 1.0;
        deg[u] += 1.0;
        deg[n_users + i] += 1.0;
    }
    DMat out = dzeros(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (a[r][c] != 0.0) out[r][c] = a[r][c] / (std::sqrt(deg[r]) * std::sqrt(deg[c]));
    return out;
}

inline double row_cosine(const std::vector<double>& x, const std::vector<double>& y, double eps) {
    double s = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        s += x[k] * y[k];
        nx += x[k] * x[k];
        ny += y[k] * y[k];
    }
    return s / std::max(std::sqrt(nx) * std::sqrt(ny), eps);
}

struct DenseTrace {
    std::vector<DMat> layers;
    std::vector<std::vector<double>> sims;
    DMat final;
};

// Straight-line layer-refined propagation: H = A X^l, a = cos(H, X^0),
// X^{l+1} = (a + eps) H, readout = sum of X^1..X^L.
inline DenseTrace dense_layergcn(const DMat& adj, const DMat& x0, int n_layers, double eps) {
    const int n = static_cast<int>(x0.size());
    const int t = static_cast<int>(x0[0].size());
    DenseTrace tr;
    tr.final = dzeros(n, t);
    DMat x = x0;
    for (int l = 0; l < n_layers; ++l) {
        DMat h = dense_matmul(adj, x);
        std::vector<double> a(n);
        DMat refined = dzeros(n, t);
        for (int v = 0; v < n; ++v) {
            a[v] = row_cosine(h[v], x0[v], eps);
            for (int c = 0; c < t; ++c) refined[v][c] = (a[v] + eps) * h[v][c];
        }
        for (int v = 0; v < n; ++v)
            for (int c = 0; c < t; ++c) tr.final[v][c] += refined[v][c];
        tr.layers.push_back(refined);
        tr.sims.push_back(a);
        x = refined;
    }
    return tr;
}

// Straight-line LightGCN: X^{l+1} = A X^l, readout = mean of X^0..X^L.
inline DenseTrace dense_lightgcn(const DMat& adj, const DMat& x0, int n_layers) {
    const int n = static_cast<int>(x0.size());
    const int t = static_cast<int>(x0[0].size());
    DenseTrace tr;
    tr.final = x0;
    DMat x = x0;
    for (int l = 0; l < n_layers; ++l) {
        x = dense_matmul(adj, x);
        tr.layers.push_back(x);
        for (int v = 0; v < n; ++v)
            for (int c = 0; c < t; ++c) tr.final[v][c] += x[v][c];
    }
    for (int v = 0; v < n; ++v)
        for (int c = 0; c < t; ++c) tr.final[v][c] /= (n_layers + 1);
    return tr;
}

// Central finite differences of a scalar function of a matrix parameter.
inline layergcn::Matrix<double> finite_difference_grad(
    const std::function<double(const layergcn::Matrix<double>&)>& f,
    const layergcn::Matrix<double>& x, double h = 1e-5) {
    layergcn::Matrix<double> g(x.rows, x.cols);
    layergcn::Matrix<double> probe = x;
    for (std::size_t k = 0; k < x.data.size(); ++k) {
        const double orig = probe.data[k];
        probe.data[k] = orig + h;
        const double fp = f(probe);
        probe.data[k] = orig - h;
        const double fm = f(probe);
        probe.data[k] = orig;
        g.data[k] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// max over coordinates of |a-n| / max(|a|,|n|), skipping coordinates where
// both are below `floor` (finite-difference noise territory).
inline double max_relative_error(const layergcn::Matrix<double>& analytic,
                                 const layergcn::Matrix<double>& numeric,
                                 double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t k = 0; k < analytic.data.size(); ++k) {
        const double a = analytic.data[k];
        const double n = numeric.data[k];
        const double mag = std::max(std::abs(a), std::abs(n));
        if (mag < floor) continue;
        worst = std::max(worst, std::abs(a - n) / mag);
    }
    return worst;
}

// Brute-force k-core: rescan-and-delete until no node is below threshold.
// Works on raw-id pairs so its indexing cannot be confused with the
// library's re-mapping.
inline std::set<std::pair<std::string, std::string>> brute_force_k_core(
    const std::vector<std::pair<std::string, std::string>>& pairs, int k_user, int k_item) {
    std::set<std::pair<std::string, std::string>> cur(pairs.begin(), pairs.end());
    while (true) {
        std::map<std::string, int> du, di;
        for (const auto& [u, i] : cur) {
            ++du[u];
            ++di[i];
        }
        std::set<std::pair<std::string, std::string>> next;
        for (const auto& [u, i] : cur) {
            if (du[u] >= k_user && di[i] >= k_item) next.insert({u, i});
        }
        if (next.size() == cur.size()) return cur;
        cur.swap(next);
    }
}

// Reference chronological splitter: sort by (ts, user, item), slice by
// floor(n*0.7) / floor(n*0.8), no cold-start handling.
struct SliceOracle {
    std::vector<layergcn::Interaction> train, valid, test;
};

inline SliceOracle sort_then_slice(std::vector<layergcn::Interaction> recs, double r1, double r2) {
    std::sort(recs.begin(), recs.end(),
              [](const layergcn::Interaction& a, const layergcn::Interaction& b) {
                  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                  if (a.user != b.user) return a.user < b.user;
                  return a.item < b.item;
              });
    const std::size_t n = recs.size();
    const auto b1 = static_cast<std::size_t>(std::floor(n * r1 + 1e-9));
    const auto b2 = static_cast<std::size_t>(std::floor(n * (r1 + r2) + 1e-9));
    SliceOracle o;
    o.train.assign(recs.begin(), recs.begin() + b1);
    o.valid.assign(recs.begin() + b1, recs.begin() + b2);
    o.test.assign(recs.begin() + b2, recs.end());
    return o;
}

// Scalar-loop all-ranking evaluator: full sort of every candidate item per
// user, hits counted by linear scan.
struct BruteMetrics {
    double recall = 0.0;
    double ndcg = 0.0;
};

inline BruteMetrics brute_force_user_metrics(const std::vector<double>& scores,
                                             const std::set<int>& train_items,
                                             const std::set<int>& test_items, int k) {
    std::vector<int> cand;
    for (int i = 0; i < static_cast<int>(scores.size()); ++i)
        if (!train_items.count(i)) cand.push_back(i);
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    const int upto = std::min<int>(k, static_cast<int>(cand.size()));
    int hits = 0;
    double dcg = 0.0;
    for (int p = 0; p < upto; ++p) {
        if (test_items.count(cand[p])) {
            ++hits;
            dcg += (std::pow(2.0, 1.0) - 1.0) / std::log2(p + 2.0);
        }
    }
    double idcg = 0.0;
    const int ideal = std::min<int>(static_cast<int>(test_items.size()), k);
    for (int p = 0; p < ideal; ++p) idcg += (std::pow(2.0, 1.0) - 1.0) / std::log2(p + 2.0);
    BruteMetrics m;
    m.recall = static_cast<double>(hits) / static_cast<double>(test_items.size());
    m.ndcg = idcg > 0 ? dcg / idcg : 0.0;
    return m;
}

// Scalar Adam with bias correction, one parameter at a time.
struct ScalarAdam {
    double m = 0.0, v = 0.0;
    long t = 0;
    double update(double g, double lr, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8) {
        ++t;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mhat = m / (1 - std::pow(b1, static_cast<double>(t)));
        const double vhat = v / (1 - std::pow(b2, static_cast<double>(t)));
        return -lr * mhat / (std::sqrt(vhat) + eps);
    }
};

}  // namespace oracle
