#pragma once

#include <string>
#include <vector>

#include "layergcn/core.hpp"
#include "layergcn/graph.hpp"

namespace layergcn {

enum class Variant { layergcn, lightgcn, bpr_mf };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::layergcn: return "layergcn";
        case Variant::lightgcn: return "lightgcn";
        case Variant::bpr_mf: return "bpr_mf";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s) {
    if (s == "layergcn") return Variant::layergcn;
    if (s == "lightgcn") return Variant::lightgcn;
    if (s == "bpr_mf") return Variant::bpr_mf;
    throw config_error("unknown model variant: '" + s + "' (expected layergcn|lightgcn|bpr_mf)");
}

struct ModelConfig {
    Variant variant = Variant::layergcn;
    int n_layers = 4;
    double epsilon = 1e-8;  // both the cosine denominator guard and the additive scale guard
};

// Everything the backward pass and the diagnostics need from one forward
// pass. For layergcn, `layers` holds the refined X^1..X^L, `propagated` the
// pre-refinement A_p X^l, and `sims` the raw cosine vectors a^1..a^L. For
// lightgcn only `layers` is populated; for bpr_mf the trace is just `final`.
template <class S>
struct ForwardTrace {
    std::vector<Matrix<S>> layers;
    std::vector<Matrix<S>> propagated;
    std::vector<std::vector<S>> sims;
    Matrix<S> final;
};

// Row-wise cosine similarity, entry i = a_i.b_i / max(|a_i||b_i|, eps).
// Zero rows fall into the eps guard and get similarity 0 instead of NaN.
template <class S>
std::vector<S> cosine_rows(const Matrix<S>& a, const Matrix<S>& b, S eps) {
    if (!a.same_shape(b)) throw data_error("cosine_rows shape mismatch");
    std::vector<S> out(a.rows);
    for (int r = 0; r < a.rows; ++r) {
        const S* x = a.row(r);
        const S* y = b.row(r);
        const S denom = std::max(norm2(x, a.cols) * norm2(y, a.cols), eps);
        out[r] = dot(x, y, a.cols) / denom;
    }
    return out;
}

namespace detail {

template <class S>
void require_finite(const Matrix<S>& m, int layer) {
    if (!all_finite(m))
        throw numeric_error("non-finite values in layer " + std::to_string(layer));
}

}  // namespace detail

// Layer-refined propagation: H = A_p X^l, a = cos(H, X^0) per node, then
// X^{l+1} = (a + eps) * H row-wise. Readout is the sum of X^1..X^L; the ego
// layer is excluded, its information having been folded in by the refinement.
template <class S>
ForwardTrace<S> forward_layergcn(const SparseMatrix<S>& adj, const Matrix<S>& x0,
                                 const ModelConfig& cfg) {
    if (cfg.n_layers < 1) throw config_error("n_layers must be >= 1");
    if (!(cfg.epsilon > 0)) throw config_error("epsilon must be positive");
    const S eps = static_cast<S>(cfg.epsilon);

    ForwardTrace<S> t;
    t.layers.reserve(cfg.n_layers);
    t.propagated.reserve(cfg.n_layers);
    t.sims.reserve(cfg.n_layers);

    const Matrix<S>* cur = &x0;
    for (int l = 0; l < cfg.n_layers; ++l) {
        Matrix<S> h = spmm(adj, *cur);
        detail::require_finite(h, l + 1);
        std::vector<S> a = cosine_rows(h, x0, eps);
        Matrix<S> refined(h.rows, h.cols);
        for (int r = 0; r < h.rows; ++r) {
            const S scale = a[r] + eps;
            const S* src = h.row(r);
            S* dst = refined.row(r);
            for (int c = 0; c < h.cols; ++c) dst[c] = scale * src[c];
        }
        t.propagated.push_back(std::move(h));
        t.sims.push_back(std::move(a));
        t.layers.push_back(std::move(refined));
        cur = &t.layers.back();
    }

    t.final = Matrix<S>(x0.rows, x0.cols);
    for (const auto& layer : t.layers) {
        for (std::size_t k = 0; k < t.final.data.size(); ++k) t.final.data[k] += layer.data[k];
    }
    return t;
}

// Plain linear propagation with mean readout over X^0..X^L (ego included).
template <class S>
ForwardTrace<S> forward_lightgcn(const SparseMatrix<S>& adj, const Matrix<S>& x0,
                                 const ModelConfig& cfg) {
    if (cfg.n_layers < 1) throw config_error("n_layers must be >= 1");

    ForwardTrace<S> t;
    t.layers.reserve(cfg.n_layers);
    t.final = x0;  // accumulates the sum, divided at the end

    const Matrix<S>* cur = &x0;
    for (int l = 0; l < cfg.n_layers; ++l) {
        Matrix<S> h = spmm(adj, *cur);
        detail::require_finite(h, l + 1);
        t.layers.push_back(std::move(h));
        cur = &t.layers.back();
        for (std::size_t k = 0; k < t.final.data.size(); ++k)
            t.final.data[k] += cur->data[k];
    }
    const S inv = S(1) / static_cast<S>(cfg.n_layers + 1);
    for (auto& v : t.final.data) v *= inv;
    return t;
}

template <class S>
ForwardTrace<S> forward(const SparseMatrix<S>& adj, const Matrix<S>& x0, const ModelConfig& cfg) {
    switch (cfg.variant) {
        case Variant::layergcn: return forward_layergcn(adj, x0, cfg);
        case Variant::lightgcn: return forward_lightgcn(adj, x0, cfg);
        case Variant::bpr_mf: {
            ForwardTrace<S> t;
            t.final = x0;
            return t;
        }
    }
    throw config_error("invalid model variant");
}

// Scores of every item for one user: score[i] = x_user . x_{n_users+i}.
template <class S>
void score_all(const Matrix<S>& final, int user, int n_users, std::vector<S>& out) {
    const int n_items = final.rows - n_users;
    if (user < 0 || user >= n_users) throw data_error("user index out of range");
    out.resize(n_items);
    const S* xu = final.row(user);
    for (int i = 0; i < n_items; ++i) out[i] = dot(xu, final.row(n_users + i), final.cols);
}

template <class S>
std::vector<S> score_all(const Matrix<S>& final, int user, int n_users) {
    std::vector<S> out;
    score_all(final, user, n_users, out);
    return out;
}

// d^l_v = |x^l_v - x^0_v|_2, one row per layer. Tracks how far each node has
// drifted from its ego embedding (the over-smoothing diagnostic).
template <class S>
Matrix<S> layer_divergence(const ForwardTrace<S>& trace, const Matrix<S>& x0) {
    const int n_layers = static_cast<int>(trace.layers.size());
    Matrix<S> d(n_layers, x0.rows);
    for (int l = 0; l < n_layers; ++l) {
        const Matrix<S>& xl = trace.layers[l];
        if (!xl.same_shape(x0)) throw data_error("trace layer shape mismatch");
        for (int v = 0; v < x0.rows; ++v) {
            S s = 0;
            const S* a = xl.row(v);
            const S* b = x0.row(v);
            for (int c = 0; c < x0.cols; ++c) {
                const S diff = a[c] - b[c];
                s += diff * diff;
            }
            d(l, v) = std::sqrt(s);
        }
    }
    return d;
}

// Mean over nodes of the raw cosine a^l, one value per layer (the Fig.-5
// style layer-weight curve).
template <class S>
std::vector<S> mean_layer_similarity(const ForwardTrace<S>& trace) {
    if (trace.sims.empty())
        throw config_error("layer similarities are only recorded by the layergcn variant");
    std::vector<S> out(trace.sims.size());
    for (std::size_t l = 0; l < trace.sims.size(); ++l) {
        S s = 0;
        for (S v : trace.sims[l]) s += v;
        out[l] = s / static_cast<S>(trace.sims[l].size());
    }
    return out;
}

}  // namespace layergcn
