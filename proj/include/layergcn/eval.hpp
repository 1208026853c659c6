#pragma once

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "layergcn/core.hpp"
#include "layergcn/ingest.hpp"
#include "layergcn/model.hpp"

namespace layergcn {

// All-ranking evaluation output: per-user ranked lists and metrics plus the
// macro-averages, for each requested K.
struct RankingResult {
    std::vector<int> ks;
    std::vector<int> users;                 // evaluated users (>=1 test item)
    std::vector<std::vector<int>> topk;     // per user, top max(ks) candidates
    std::vector<std::vector<double>> recall;  // [k][user]
    std::vector<std::vector<double>> ndcg;    // [k][user]
    std::vector<double> mean_recall;          // [k]
    std::vector<double> mean_ndcg;            // [k]

    std::size_t n_evaluated_users() const { return users.size(); }
};

// Indices of the K highest unmasked scores, descending score, ties broken by
// ascending item index. Returns fewer than K when the candidate pool is
// smaller.
template <class S>
std::vector<int> top_k(const std::vector<S>& scores, const std::vector<char>& mask, int k) {
    if (k < 1) throw config_error("top_k requires K >= 1");
    if (!mask.empty() && mask.size() != scores.size())
        throw data_error("top_k mask length mismatch");

    std::vector<int> cand;
    cand.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (mask.empty() || !mask[i]) cand.push_back(static_cast<int>(i));
    }
    const auto cmp = [&scores](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    if (static_cast<std::size_t>(k) < cand.size()) {
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), cmp);
        cand.resize(k);
    } else {
        std::sort(cand.begin(), cand.end(), cmp);
    }
    return cand;
}

// |hits in top K| / |relevant|. `relevant` must be sorted.
inline double recall_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant,
                          int k) {
    if (relevant.empty()) throw data_error("recall_at_k: empty relevant set");
    const int upto = std::min<int>(k, static_cast<int>(ranked.size()));
    int hits = 0;
    for (int p = 0; p < upto; ++p) {
        if (std::binary_search(relevant.begin(), relevant.end(), ranked[p])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

// Binary-relevance NDCG with base-2 logs: DCG = sum_i hit_i / log2(i+1),
// IDCG places min(|relevant|, K) hits at the top. The base cancels in the
// ratio; base 2 is fixed for golden-file stability.
inline double ndcg_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant,
                        int k) {
    if (relevant.empty()) throw data_error("ndcg_at_k: empty relevant set");
    const int upto = std::min<int>(k, static_cast<int>(ranked.size()));
    double dcg = 0.0;
    for (int p = 0; p < upto; ++p) {
        if (std::binary_search(relevant.begin(), relevant.end(), ranked[p]))
            dcg += 1.0 / std::log2(static_cast<double>(p + 2));
    }
    const int ideal = std::min<int>(static_cast<int>(relevant.size()), k);
    double idcg = 0.0;
    for (int p = 0; p < ideal; ++p) idcg += 1.0 / std::log2(static_cast<double>(p + 2));
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

inline std::vector<std::vector<int>> items_by_user(const InteractionLog& log) {
    std::vector<std::vector<int>> out(log.n_users);
    for (const auto& r : log.interactions) out[r.user].push_back(r.item);
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
}

// Macro-averaged Recall@K over users with at least one relevant item, with
// the user's training items masked out of the candidate set. This is the
// per-epoch validation metric, so it avoids building a full RankingResult.
template <class S>
double mean_recall_at_k(const Matrix<S>& final, int n_users,
                        const std::vector<std::vector<int>>& train_items,
                        const std::vector<std::vector<int>>& relevant, int k) {
    const int n_items = final.rows - n_users;
    std::vector<S> scores;
    std::vector<char> mask(n_items, 0);
    double sum = 0.0;
    std::size_t n_eval = 0;
    for (int u = 0; u < n_users; ++u) {
        if (relevant[u].empty()) continue;
        score_all(final, u, n_users, scores);
        for (int i : train_items[u]) mask[i] = 1;
        sum += recall_at_k(top_k(scores, mask, k), relevant[u], k);
        for (int i : train_items[u]) mask[i] = 0;
        ++n_eval;
    }
    return n_eval > 0 ? sum / static_cast<double>(n_eval) : 0.0;
}

// Full all-ranking protocol on the test split: every item the user has not
// interacted with in train is a candidate; users without test items are
// excluded from the macro-average.
template <class S>
RankingResult evaluate(const Matrix<S>& final, const SplitBundle& splits,
                       std::vector<int> ks = {10, 20, 50}, int n_threads = 1) {
    if (ks.empty()) throw config_error("evaluate requires at least one K");
    for (int k : ks)
        if (k < 1) throw config_error("evaluate requires K >= 1");
    const int n_users = splits.train.n_users;
    const int n_items = splits.train.n_items;
    if (final.rows != n_users + n_items)
        throw data_error("embedding row count does not match n_users + n_items");

    const auto train_items = items_by_user(splits.train);
    const auto test_items = items_by_user(splits.test);
    const int k_max = *std::max_element(ks.begin(), ks.end());

    RankingResult res;
    res.ks = ks;
    for (int u = 0; u < n_users; ++u) {
        if (!test_items[u].empty()) res.users.push_back(u);
    }
    res.topk.resize(res.users.size());
    res.recall.assign(ks.size(), std::vector<double>(res.users.size(), 0.0));
    res.ndcg.assign(ks.size(), std::vector<double>(res.users.size(), 0.0));

    auto eval_range = [&](std::size_t lo, std::size_t hi) {
        std::vector<S> scores;
        std::vector<char> mask(n_items, 0);
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const int u = res.users[idx];
            score_all(final, u, n_users, scores);
            for (int i : train_items[u]) mask[i] = 1;
            res.topk[idx] = top_k(scores, mask, k_max);
            for (int i : train_items[u]) mask[i] = 0;
            for (std::size_t ki = 0; ki < ks.size(); ++ki) {
                res.recall[ki][idx] = recall_at_k(res.topk[idx], test_items[u], ks[ki]);
                res.ndcg[ki][idx] = ndcg_at_k(res.topk[idx], test_items[u], ks[ki]);
            }
        }
    };

    const std::size_t n = res.users.size();
    if (n_threads <= 1 || n < 2) {
        eval_range(0, n);
    } else {
        // users are independent and each thread writes disjoint slots, so
        // the result does not depend on the thread count
        const std::size_t nt = std::min<std::size_t>(n_threads, n);
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + nt - 1) / nt;
        for (std::size_t t = 0; t < nt; ++t) {
            const std::size_t lo = t * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo < hi) pool.emplace_back(eval_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    res.mean_recall.resize(ks.size());
    res.mean_ndcg.resize(ks.size());
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        double sr = 0.0, sn = 0.0;
        for (std::size_t idx = 0; idx < n; ++idx) {
            sr += res.recall[ki][idx];
            sn += res.ndcg[ki][idx];
        }
        res.mean_recall[ki] = n > 0 ? sr / static_cast<double>(n) : 0.0;
        res.mean_ndcg[ki] = n > 0 ? sn / static_cast<double>(n) : 0.0;
    }
    return res;
}

}  // namespace layergcn
