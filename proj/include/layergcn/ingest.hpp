#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "layergcn/core.hpp"

namespace layergcn {

struct Interaction {
    int user = 0;
    int item = 0;
    std::int64_t timestamp = 0;
};

// Implicit-feedback log with contiguous indices. Raw IDs are kept both ways
// so splits written to disk can be traced back to the source data.
struct InteractionLog {
    std::vector<Interaction> interactions;
    int n_users = 0;
    int n_items = 0;
    std::vector<std::string> user_ids;  // index -> raw id
    std::vector<std::string> item_ids;
    std::unordered_map<std::string, int> user_index;  // raw id -> index
    std::unordered_map<std::string, int> item_index;

    std::size_t size() const { return interactions.size(); }
};

// Chronological 70/10/20 partition. The three logs share the parent log's
// index space and id maps, so a user index means the same thing in all of
// them (and the training graph keeps every node of the filtered dataset).
struct SplitBundle {
    InteractionLog train;
    InteractionLog valid;
    InteractionLog test;
    std::size_t n_cold_dropped = 0;  // valid/test records removed as cold-start
};

namespace detail {

inline bool parse_int64(const std::string& s, std::int64_t& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno != 0 || end != s.c_str() + s.size()) return false;
    out = v;
    return true;
}

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

// Reads delimited (user, item, timestamp) records, drops duplicate
// (user,item) pairs keeping the earliest timestamp, and remaps IDs to dense
// indices in order of first appearance. A header line is detected by a
// non-numeric timestamp field.
inline InteractionLog load_interactions(const std::string& path, char delim = '\t') {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open input file: " + path);

    InteractionLog log;
    // (user,item) -> position in log.interactions, for earliest-timestamp dedup
    std::unordered_map<std::uint64_t, std::size_t> seen;

    std::string line;
    std::size_t line_no = 0;
    bool first_record = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> f = detail::split_fields(line, delim);
        if (f.size() < 3) {
            throw data_error("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                             std::to_string(f.size()));
        }
        std::int64_t ts = 0;
        if (!detail::parse_int64(f[2], ts)) {
            if (first_record) continue;  // header line
            throw data_error("line " + std::to_string(line_no) +
                             ": timestamp is not an integer: '" + f[2] + "'");
        }
        first_record = false;
        if (f[0].empty() || f[1].empty()) {
            throw data_error("line " + std::to_string(line_no) + ": empty user or item id");
        }

        auto [uit, u_new] = log.user_index.try_emplace(f[0], log.n_users);
        if (u_new) {
            log.user_ids.push_back(f[0]);
            ++log.n_users;
        }
        auto [iit, i_new] = log.item_index.try_emplace(f[1], log.n_items);
        if (i_new) {
            log.item_ids.push_back(f[1]);
            ++log.n_items;
        }
        const int u = uit->second;
        const int i = iit->second;

        const std::uint64_t key =
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
            static_cast<std::uint32_t>(i);
        auto [sit, fresh] = seen.try_emplace(key, log.interactions.size());
        if (fresh) {
            log.interactions.push_back({u, i, ts});
        } else if (ts < log.interactions[sit->second].timestamp) {
            log.interactions[sit->second].timestamp = ts;
        }
    }
    if (log.interactions.empty()) throw data_error("no interactions in input: " + path);
    return log;
}

// Iteratively removes users with degree < k_user and items with degree <
// k_item until fixed point, then re-indexes the survivors densely
// (order-preserving). Throws if the fixed point is the empty graph.
inline InteractionLog k_core_filter(const InteractionLog& log, int k_user, int k_item) {
    if (k_user < 1 || k_item < 1) throw config_error("k-core threshold must be >= 1");

    std::vector<int> deg_u(log.n_users, 0), deg_i(log.n_items, 0);
    for (const auto& r : log.interactions) {
        ++deg_u[r.user];
        ++deg_i[r.item];
    }
    std::vector<char> alive_u(log.n_users, 1), alive_i(log.n_items, 1);

    // adjacency as interaction indices per user/item
    std::vector<std::vector<int>> by_user(log.n_users), by_item(log.n_items);
    for (std::size_t e = 0; e < log.interactions.size(); ++e) {
        by_user[log.interactions[e].user].push_back(static_cast<int>(e));
        by_item[log.interactions[e].item].push_back(static_cast<int>(e));
    }

    // peel with a worklist; each removal decrements neighbour degrees
    std::vector<std::pair<char, int>> work;  // (is_user, index)
    for (int u = 0; u < log.n_users; ++u)
        if (deg_u[u] < k_user) work.push_back({1, u});
    for (int i = 0; i < log.n_items; ++i)
        if (deg_i[i] < k_item) work.push_back({0, i});

    while (!work.empty()) {
        auto [is_user, idx] = work.back();
        work.pop_back();
        if (is_user) {
            if (!alive_u[idx]) continue;
            alive_u[idx] = 0;
            for (int e : by_user[idx]) {
                const int i = log.interactions[e].item;
                if (alive_i[i] && --deg_i[i] < k_item) work.push_back({0, i});
            }
        } else {
            if (!alive_i[idx]) continue;
            alive_i[idx] = 0;
            for (int e : by_item[idx]) {
                const int u = log.interactions[e].user;
                if (alive_u[u] && --deg_u[u] < k_user) work.push_back({1, u});
            }
        }
    }

    InteractionLog out;
    std::vector<int> remap_u(log.n_users, -1), remap_i(log.n_items, -1);
    for (int u = 0; u < log.n_users; ++u) {
        if (alive_u[u]) {
            remap_u[u] = out.n_users++;
            out.user_ids.push_back(log.user_ids[u]);
            out.user_index.emplace(log.user_ids[u], remap_u[u]);
        }
    }
    for (int i = 0; i < log.n_items; ++i) {
        if (alive_i[i]) {
            remap_i[i] = out.n_items++;
            out.item_ids.push_back(log.item_ids[i]);
            out.item_index.emplace(log.item_ids[i], remap_i[i]);
        }
    }
    for (const auto& r : log.interactions) {
        if (alive_u[r.user] && alive_i[r.item]) {
            out.interactions.push_back({remap_u[r.user], remap_i[r.item], r.timestamp});
        }
    }
    if (out.interactions.empty()) throw data_error("k-core empty");
    return out;
}

inline InteractionLog k_core_filter(const InteractionLog& log, int k) {
    return k_core_filter(log, k, k);
}

// Sorts by (timestamp, user, item) — the index tie-break keeps splits
// reproducible — slices at the ratio boundaries, then drops valid/test
// records whose user or item never occurs in train.
inline SplitBundle chronological_split(const InteractionLog& log, double r_train = 0.7,
                                       double r_valid = 0.1, double r_test = 0.2) {
    if (r_train <= 0 || r_valid <= 0 || r_test <= 0)
        throw config_error("split ratios must be positive");
    if (std::abs(r_train + r_valid + r_test - 1.0) > 1e-9)
        throw config_error("split ratios must sum to 1");

    std::vector<Interaction> sorted = log.interactions;
    std::sort(sorted.begin(), sorted.end(), [](const Interaction& a, const Interaction& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        if (a.user != b.user) return a.user < b.user;
        return a.item < b.item;
    });

    const std::size_t n = sorted.size();
    const auto b1 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r_train + 1e-9));
    const auto b2 =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * (r_train + r_valid) + 1e-9));
    if (b1 == 0) throw data_error("train split empty");

    SplitBundle out;
    auto clone_meta = [&log](InteractionLog& dst) {
        dst.n_users = log.n_users;
        dst.n_items = log.n_items;
        dst.user_ids = log.user_ids;
        dst.item_ids = log.item_ids;
        dst.user_index = log.user_index;
        dst.item_index = log.item_index;
    };
    clone_meta(out.train);
    clone_meta(out.valid);
    clone_meta(out.test);

    out.train.interactions.assign(sorted.begin(), sorted.begin() + b1);

    std::vector<char> u_in_train(log.n_users, 0), i_in_train(log.n_items, 0);
    for (const auto& r : out.train.interactions) {
        u_in_train[r.user] = 1;
        i_in_train[r.item] = 1;
    }
    for (std::size_t k = b1; k < n; ++k) {
        const auto& r = sorted[k];
        if (!u_in_train[r.user] || !i_in_train[r.item]) {
            ++out.n_cold_dropped;
            continue;
        }
        (k < b2 ? out.valid : out.test).interactions.push_back(r);
    }
    return out;
}

struct DatasetStats {
    int n_users = 0;
    int n_items = 0;
    std::size_t n_interactions = 0;
    double sparsity_pct = 0.0;  // 100 * (1 - M / (N_U * N_I))
};

inline DatasetStats dataset_stats(const InteractionLog& log) {
    DatasetStats s;
    s.n_users = log.n_users;
    s.n_items = log.n_items;
    s.n_interactions = log.size();
    const double cells = static_cast<double>(log.n_users) * static_cast<double>(log.n_items);
    s.sparsity_pct = cells > 0 ? 100.0 * (1.0 - static_cast<double>(s.n_interactions) / cells) : 0.0;
    return s;
}

}  // namespace layergcn
