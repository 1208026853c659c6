#include "layergcn/model.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "layergcn/pruning.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace layergcn;

namespace {

Matrix<double> random_matrix(int rows, int cols, rng_t& rng, double scale = 1.0) {
    Matrix<double> m(rows, cols);
    for (auto& v : m.data) v = (2.0 * uniform01(rng) - 1.0) * scale;
    return m;
}

oracle::DMat to_dense(const Matrix<double>& m) {
    oracle::DMat out(m.rows, std::vector<double>(m.cols));
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) out[r][c] = m(r, c);
    return out;
}

SparseMatrix<double> zero_adjacency(int n) {
    SparseMatrix<double> a;
    a.n = n;
    a.row_ptr.assign(n + 1, 0);
    return a;
}

}  // namespace

TEST(CosineRows, IdenticalRowsGiveOne) {
    rng_t rng = make_rng(51, 0);
    const Matrix<double> a = random_matrix(6, 4, rng);
    const auto sims = cosine_rows(a, a, 1e-8);
    for (double s : sims) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(CosineRows, OppositeRowsGiveMinusOne) {
    rng_t rng = make_rng(52, 0);
    const Matrix<double> a = random_matrix(6, 4, rng);
    Matrix<double> b = a;
    for (auto& v : b.data) v = -v;
    const auto sims = cosine_rows(a, b, 1e-8);
    for (double s : sims) EXPECT_NEAR(s, -1.0, 1e-12);
}

TEST(CosineRows, OrthogonalRowsGiveZero) {
    Matrix<double> a(1, 2), b(1, 2);
    a(0, 0) = 1.0;
    b(0, 1) = 1.0;
    EXPECT_DOUBLE_EQ(cosine_rows(a, b, 1e-8)[0], 0.0);
}

TEST(CosineRows, ZeroRowFallsIntoEpsGuard) {
    Matrix<double> a(1, 3), b(1, 3);
    b(0, 0) = 2.0;
    EXPECT_DOUBLE_EQ(cosine_rows(a, b, 1e-8)[0], 0.0);
}

TEST(ForwardLayerGCN, ParallelPropagationGivesSimilarityOne) {
    // swap adjacency with equal rows in x0: H rows equal x0 rows, cosine = 1
    const InteractionLog log = synth::log_from_pairs({{0, 0, 1}}, 1, 1);
    const auto adj = normalize<double>(build_graph(log));
    Matrix<double> x0(2, 3);
    for (int c = 0; c < 3; ++c) {
        x0(0, c) = 0.5 + c;
        x0(1, c) = 0.5 + c;  // identical rows
    }
    ModelConfig cfg;
    cfg.n_layers = 1;
    const auto trace = forward_layergcn(adj, x0, cfg);
    ASSERT_EQ(trace.sims.size(), 1u);
    EXPECT_NEAR(trace.sims[0][0], 1.0, 1e-12);
    EXPECT_NEAR(trace.sims[0][1], 1.0, 1e-12);

    const auto h = spmm(adj, x0);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c)
            EXPECT_NEAR(trace.final(r, c), (1.0 + cfg.epsilon) * h(r, c), 1e-12);
}

TEST(ForwardLayerGCN, ZeroEmbeddingsStayZero) {
    const InteractionLog log = synth::log_from_pairs({{0, 0, 1}, {0, 1, 2}}, 1, 2);
    const auto adj = normalize<double>(build_graph(log));
    const Matrix<double> x0(3, 4);
    ModelConfig cfg;
    cfg.n_layers = 3;
    const auto trace = forward_layergcn(adj, x0, cfg);
    for (double v : trace.final.data) EXPECT_EQ(v, 0.0);
    for (const auto& sims : trace.sims)
        for (double s : sims) EXPECT_EQ(s, 0.0);
}

TEST(ForwardLayerGCN, MatchesDenseOracle) {
    rng_t rng = make_rng(53, 0);
    const InteractionLog log = synth::random_log(4, 4, 10, rng);
    const BipartiteGraph g = build_graph(log);
    const auto adj = normalize<double>(g);
    const Matrix<double> x0 = random_matrix(g.num_nodes(), 4, rng);

    ModelConfig cfg;
    cfg.n_layers = 3;
    const auto trace = forward_layergcn(adj, x0, cfg);

    const auto dense_adj = oracle::dense_normalized_adjacency(g.n_users, g.n_items, g.edges);
    const auto expected = oracle::dense_layergcn(dense_adj, to_dense(x0), 3, cfg.epsilon);
    for (int r = 0; r < x0.rows; ++r)
        for (int c = 0; c < x0.cols; ++c)
            EXPECT_NEAR(trace.final(r, c), expected.final[r][c], 1e-12);
    for (int l = 0; l < 3; ++l)
        for (int r = 0; r < x0.rows; ++r)
            EXPECT_NEAR(trace.sims[l][r], expected.sims[l][r], 1e-12);
}

TEST(ForwardLightGCN, ZeroAdjacencyGivesHalfEgo) {
    const Matrix<double> x0 = [] {
        rng_t rng = make_rng(54, 0);
        return random_matrix(5, 3, rng);
    }();
    ModelConfig cfg;
    cfg.variant = Variant::lightgcn;
    cfg.n_layers = 1;
    const auto trace = forward_lightgcn(zero_adjacency(5), x0, cfg);
    for (std::size_t k = 0; k < x0.data.size(); ++k)
        EXPECT_NEAR(trace.final.data[k], x0.data[k] / 2.0, 1e-15);
}

TEST(ForwardLightGCN, SingleEdgeMeanOfEgoAndSwap) {
    const InteractionLog log = synth::log_from_pairs({{0, 0, 1}}, 1, 1);
    const auto adj = normalize<double>(build_graph(log));
    rng_t rng = make_rng(55, 0);
    const Matrix<double> x0 = random_matrix(2, 3, rng);
    ModelConfig cfg;
    cfg.variant = Variant::lightgcn;
    cfg.n_layers = 1;
    const auto trace = forward_lightgcn(adj, x0, cfg);
    for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(trace.final(0, c), (x0(0, c) + x0(1, c)) / 2.0, 1e-15);
        EXPECT_NEAR(trace.final(1, c), (x0(1, c) + x0(0, c)) / 2.0, 1e-15);
    }
}

TEST(ForwardLightGCN, MatchesDenseOracle) {
    rng_t rng = make_rng(56, 0);
    const InteractionLog log = synth::random_log(5, 5, 14, rng);
    const BipartiteGraph g = build_graph(log);
    const auto adj = normalize<double>(g);
    const Matrix<double> x0 = random_matrix(g.num_nodes(), 6, rng);

    ModelConfig cfg;
    cfg.variant = Variant::lightgcn;
    cfg.n_layers = 4;
    const auto trace = forward_lightgcn(adj, x0, cfg);

    const auto dense_adj = oracle::dense_normalized_adjacency(g.n_users, g.n_items, g.edges);
    const auto expected = oracle::dense_lightgcn(dense_adj, to_dense(x0), 4);
    for (int r = 0; r < x0.rows; ++r)
        for (int c = 0; c < x0.cols; ++c)
            EXPECT_NEAR(trace.final(r, c), expected.final[r][c], 1e-12);
}

TEST(ReadoutExclusion, LayerGCNDropsEgoLightGCNKeepsIt) {
    // with a zero adjacency every propagated layer is zero, so the two
    // readouts are distinguishable: sum of zeros vs mean including x0
    rng_t rng = make_rng(57, 0);
    const Matrix<double> x0 = random_matrix(4, 3, rng);
    const auto adj = zero_adjacency(4);
    ModelConfig lg;
    lg.n_layers = 1;
    const auto t_layer = forward_layergcn(adj, x0, lg);
    for (double v : t_layer.final.data) EXPECT_EQ(v, 0.0);

    ModelConfig li;
    li.variant = Variant::lightgcn;
    li.n_layers = 1;
    const auto t_light = forward_lightgcn(adj, x0, li);
    for (std::size_t k = 0; k < x0.data.size(); ++k)
        EXPECT_NEAR(t_light.final.data[k], x0.data[k] / 2.0, 1e-15);
}

TEST(ForwardBprMf, FinalIsEgoMatrix) {
    rng_t rng = make_rng(58, 0);
    const Matrix<double> x0 = random_matrix(6, 4, rng);
    ModelConfig cfg;
    cfg.variant = Variant::bpr_mf;
    const auto trace = forward(zero_adjacency(6), x0, cfg);
    EXPECT_EQ(trace.final.data, x0.data);
    EXPECT_TRUE(trace.layers.empty());
}

TEST(ForwardLayerGCN, ScaleEquivariantInEgo) {
    rng_t rng = make_rng(59, 0);
    const InteractionLog log = synth::random_log(5, 5, 15, rng);
    const BipartiteGraph g = build_graph(log);
    const auto adj = normalize<double>(g);
    const Matrix<double> x0 = random_matrix(g.num_nodes(), 4, rng);
    ModelConfig cfg;
    cfg.n_layers = 3;

    const double c = 2.75;
    Matrix<double> scaled = x0;
    for (auto& v : scaled.data) v *= c;

    const auto base = forward_layergcn(adj, x0, cfg);
    const auto big = forward_layergcn(adj, scaled, cfg);
    for (std::size_t k = 0; k < base.final.data.size(); ++k)
        EXPECT_NEAR(big.final.data[k], c * base.final.data[k], 1e-10);
}

TEST(ForwardLayerGCN, SimilaritiesStayInBounds) {
    rng_t rng = make_rng(60, 0);
    for (int rep = 0; rep < 5; ++rep) {
        const InteractionLog log = synth::random_log(6, 6, 18, rng);
        const BipartiteGraph g = build_graph(log);
        const auto adj = normalize<double>(g);
        const Matrix<double> x0 = random_matrix(g.num_nodes(), 5, rng, 3.0);
        ModelConfig cfg;
        cfg.n_layers = 4;
        const auto trace = forward_layergcn(adj, x0, cfg);
        for (const auto& sims : trace.sims) {
            for (double s : sims) {
                EXPECT_GE(s, -1.0 - 1e-12);
                EXPECT_LE(s, 1.0 + 1e-12);
            }
        }
    }
}

TEST(RefinementContraction, HoldsForNegativeCosinePairs) {
    // |x^l cos(theta) - x^0| <= |x^l - x^0| whenever cos(theta) < 0
    rng_t rng = make_rng(61, 0);
    const int dim = 6;
    int tested = 0;
    while (tested < 10000) {
        std::vector<double> xl(dim), x0(dim);
        for (int c = 0; c < dim; ++c) {
            xl[c] = (2.0 * uniform01(rng) - 1.0) * 2.0;
            x0[c] = (2.0 * uniform01(rng) - 1.0) * 2.0;
        }
        double s = 0, nl = 0, n0 = 0;
        for (int c = 0; c < dim; ++c) {
            s += xl[c] * x0[c];
            nl += xl[c] * xl[c];
            n0 += x0[c] * x0[c];
        }
        if (nl == 0 || n0 == 0) continue;
        const double cosv = s / (std::sqrt(nl) * std::sqrt(n0));
        if (cosv >= 0) continue;
        ++tested;
        double refined = 0, plain = 0;
        for (int c = 0; c < dim; ++c) {
            refined += (xl[c] * cosv - x0[c]) * (xl[c] * cosv - x0[c]);
            plain += (xl[c] - x0[c]) * (xl[c] - x0[c]);
        }
        ASSERT_LE(std::sqrt(refined), std::sqrt(plain) + 1e-12);
    }
}

TEST(ScoreAll, ZeroUserRowGivesZeroScores) {
    Matrix<double> final(4, 3);
    final(2, 0) = 1.0;  // an item row
    const auto s = score_all(final, 0, 2);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0], 0.0);
    EXPECT_EQ(s[1], 0.0);
}

TEST(ScoreAll, BasisVectorsPickCoordinate) {
    Matrix<double> final(4, 3);
    final(0, 1) = 1.0;  // user 0 = e_1
    final(2, 0) = 1.0;  // item 0 = e_0
    final(3, 1) = 1.0;  // item 1 = e_1
    const auto s = score_all(final, 0, 2);
    EXPECT_DOUBLE_EQ(s[0], 0.0);
    EXPECT_DOUBLE_EQ(s[1], 1.0);
}

TEST(ScoreAll, MatchesDenseOracle) {
    rng_t rng = make_rng(62, 0);
    const Matrix<double> final = random_matrix(9, 5, rng);
    const int n_users = 4;
    for (int u = 0; u < n_users; ++u) {
        const auto s = score_all(final, u, n_users);
        for (int i = 0; i < 5; ++i) {
            double expect = 0;
            for (int c = 0; c < 5; ++c) expect += final(u, c) * final(n_users + i, c);
            EXPECT_NEAR(s[i], expect, 1e-12);
        }
    }
}

TEST(LayerDivergence, EqualLayersGiveZero) {
    rng_t rng = make_rng(63, 0);
    const Matrix<double> x0 = random_matrix(5, 4, rng);
    ForwardTrace<double> trace;
    trace.layers.push_back(x0);
    const auto d = layer_divergence(trace, x0);
    for (int v = 0; v < 5; ++v) EXPECT_EQ(d(0, v), 0.0);
}

TEST(LayerDivergence, DoubledLayerGivesEgoNorm) {
    rng_t rng = make_rng(64, 0);
    const Matrix<double> x0 = random_matrix(5, 4, rng);
    Matrix<double> x2 = x0;
    for (auto& v : x2.data) v *= 2.0;
    ForwardTrace<double> trace;
    trace.layers.push_back(x2);
    const auto d = layer_divergence(trace, x0);
    for (int v = 0; v < 5; ++v) EXPECT_NEAR(d(0, v), norm2(x0.row(v), 4), 1e-12);
}

TEST(LayerDivergence, MatchesScalarLoopOracle) {
    rng_t rng = make_rng(65, 0);
    const Matrix<double> x0 = random_matrix(6, 3, rng);
    ForwardTrace<double> trace;
    trace.layers.push_back(random_matrix(6, 3, rng));
    trace.layers.push_back(random_matrix(6, 3, rng));
    const auto d = layer_divergence(trace, x0);
    for (int l = 0; l < 2; ++l) {
        for (int v = 0; v < 6; ++v) {
            double s = 0;
            for (int c = 0; c < 3; ++c) {
                const double diff = trace.layers[l](v, c) - x0(v, c);
                s += diff * diff;
            }
            EXPECT_NEAR(d(l, v), std::sqrt(s), 1e-12);
        }
    }
}

TEST(MeanLayerSimilarity, AllOnesGiveOnes) {
    ForwardTrace<double> trace;
    trace.sims.push_back(std::vector<double>(6, 1.0));
    trace.sims.push_back(std::vector<double>(6, 1.0));
    const auto m = mean_layer_similarity(trace);
    EXPECT_DOUBLE_EQ(m[0], 1.0);
    EXPECT_DOUBLE_EQ(m[1], 1.0);
}

TEST(MeanLayerSimilarity, AlternatingSignsCancel) {
    ForwardTrace<double> trace;
    std::vector<double> sims(8);
    for (int v = 0; v < 8; ++v) sims[v] = (v % 2 == 0) ? 1.0 : -1.0;
    trace.sims.push_back(sims);
    EXPECT_DOUBLE_EQ(mean_layer_similarity(trace)[0], 0.0);
}

TEST(MeanLayerSimilarity, MatchesLoopOracle) {
    rng_t rng = make_rng(66, 0);
    ForwardTrace<double> trace;
    std::vector<double> sims(7);
    for (auto& s : sims) s = 2.0 * uniform01(rng) - 1.0;
    trace.sims.push_back(sims);
    double expect = 0;
    for (double s : sims) expect += s;
    expect /= 7.0;
    EXPECT_DOUBLE_EQ(mean_layer_similarity(trace)[0], expect);
}

TEST(MeanLayerSimilarity, RequiresLayerGCNTrace) {
    ForwardTrace<double> trace;  // no sims
    EXPECT_THROW(mean_layer_similarity(trace), config_error);
}

TEST(Forward, NonFiniteInputNamesTheLayer) {
    const InteractionLog log = synth::log_from_pairs({{0, 0, 1}}, 1, 1);
    const auto adj = normalize<double>(build_graph(log));
    Matrix<double> x0(2, 2);
    x0(0, 0) = std::numeric_limits<double>::infinity();
    ModelConfig cfg;
    cfg.n_layers = 2;
    try {
        forward_layergcn(adj, x0, cfg);
        FAIL() << "expected numeric_error";
    } catch (const numeric_error& e) {
        EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
    }
}
