#pragma once

#include <cmath>
#include <ostream>
#include <utility>
#include <vector>

#include "layergcn/core.hpp"
#include "layergcn/ingest.hpp"

namespace layergcn {

// User-item interaction graph over N = n_users + n_items nodes. Item i sits
// at node index n_users + i. Edge k keeps its position in `edges`, which is
// what the pruning samplers index into.
struct BipartiteGraph {
    int n_users = 0;
    int n_items = 0;
    std::vector<std::pair<int, int>> edges;  // (user_index, item_index)
    std::vector<int> degree;                 // length N

    int num_nodes() const { return n_users + n_items; }
    int item_node(int item_index) const { return n_users + item_index; }
};

inline BipartiteGraph build_graph(const InteractionLog& train) {
    if (train.interactions.empty()) throw data_error("cannot build graph from empty log");
    BipartiteGraph g;
    g.n_users = train.n_users;
    g.n_items = train.n_items;
    g.degree.assign(g.num_nodes(), 0);
    g.edges.reserve(train.size());
    for (const auto& r : train.interactions) {
        g.edges.emplace_back(r.user, r.item);
        ++g.degree[r.user];
        ++g.degree[g.item_node(r.item)];
    }
    return g;
}

// Square CSR matrix; the adjacency representation used for propagation.
// Column indices are sorted within each row, which fixes the summation order
// of spmm and keeps results bit-reproducible.
template <class S>
struct SparseMatrix {
    int n = 0;
    std::vector<int> row_ptr;  // n + 1
    std::vector<int> col;
    std::vector<S> val;

    std::size_t nnz() const { return col.size(); }
};

// D^{-1/2} A D^{-1/2} over the given edge set, with degrees computed from
// that same edge set. Called with the full edge list this is the plain
// symmetric normalization; called with a pruned subset it is the
// re-normalization of the sparsified graph. No self-loops.
template <class S>
SparseMatrix<S> normalized_adjacency(int n_users, int n_items,
                                     const std::vector<std::pair<int, int>>& edges) {
    const int n = n_users + n_items;
    std::vector<int> deg(n, 0);
    for (const auto& [u, i] : edges) {
        if (u < 0 || u >= n_users || i < 0 || i >= n_items)
            throw data_error("edge endpoint out of range");
        ++deg[u];
        ++deg[n_users + i];
    }

    SparseMatrix<S> a;
    a.n = n;
    a.row_ptr.assign(n + 1, 0);
    for (const auto& [u, i] : edges) {
        ++a.row_ptr[u + 1];
        ++a.row_ptr[n_users + i + 1];
    }
    for (int r = 0; r < n; ++r) a.row_ptr[r + 1] += a.row_ptr[r];

    a.col.assign(edges.size() * 2, 0);
    std::vector<int> cursor(a.row_ptr.begin(), a.row_ptr.end() - 1);
    for (const auto& [u, i] : edges) {
        const int v = n_users + i;
        a.col[cursor[u]++] = v;
        a.col[cursor[v]++] = u;
    }
    for (int r = 0; r < n; ++r) {
        std::sort(a.col.begin() + a.row_ptr[r], a.col.begin() + a.row_ptr[r + 1]);
    }

    a.val.resize(a.col.size());
    for (int r = 0; r < n; ++r) {
        const S dr = std::sqrt(static_cast<S>(deg[r]));
        for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            const S dc = std::sqrt(static_cast<S>(deg[a.col[k]]));
            // sqrt(d_r)*sqrt(d_c) is commutative, so (r,c) and (c,r) get
            // bit-identical values.
            a.val[k] = S(1) / (dr * dc);
        }
    }
    return a;
}

template <class S>
SparseMatrix<S> normalize(const BipartiteGraph& g) {
    return normalized_adjacency<S>(g.n_users, g.n_items, g.edges);
}

// y = A x, row-major over stored entries of each row.
template <class S>
void spmm(const SparseMatrix<S>& a, const Matrix<S>& x, Matrix<S>& y) {
    if (a.n != x.rows)
        throw data_error("spmm dimension mismatch: adjacency is " + std::to_string(a.n) +
                         "x" + std::to_string(a.n) + ", embeddings have " +
                         std::to_string(x.rows) + " rows");
    const int t = x.cols;
    if (y.rows != a.n || y.cols != t) y = Matrix<S>(a.n, t);
    for (int r = 0; r < a.n; ++r) {
        S* out = y.row(r);
        for (int c = 0; c < t; ++c) out[c] = S(0);
        for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            const S w = a.val[k];
            const S* src = x.row(a.col[k]);
            for (int c = 0; c < t; ++c) out[c] += w * src[c];
        }
    }
}

template <class S>
Matrix<S> spmm(const SparseMatrix<S>& a, const Matrix<S>& x) {
    Matrix<S> y(a.n, x.cols);
    spmm(a, x, y);
    return y;
}

// Debug dump as coordinate-list text, one "i j value" line per stored entry.
template <class S>
void dump_adjacency(const SparseMatrix<S>& a, std::ostream& os) {
    char buf[64];
    for (int r = 0; r < a.n; ++r) {
        for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", r, a.col[k],
                          static_cast<double>(a.val[k]));
            os << buf;
        }
    }
}

}  // namespace layergcn
