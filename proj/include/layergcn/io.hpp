#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "layergcn/core.hpp"
#include "layergcn/eval.hpp"
#include "layergcn/ingest.hpp"
#include "layergcn/training.hpp"

namespace layergcn {

inline constexpr const char* kVersion = "layergcn-0.1.0";

namespace detail {

inline std::string fmt_double(double v, const char* spec = "%.12g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation
    if (!out) throw data_error("cannot write file: " + path);
    return out;
}

}  // namespace detail

// ---- split files -----------------------------------------------------------

inline void write_split_file(const std::string& path, const InteractionLog& log) {
    auto out = detail::open_out(path);
    for (const auto& r : log.interactions) {
        out << r.user << '\t' << r.item << '\t' << r.timestamp << '\n';
    }
}

inline void write_splits(const std::string& dir, const SplitBundle& b) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_split_file(dir + "/train.tsv", b.train);
    write_split_file(dir + "/valid.tsv", b.valid);
    write_split_file(dir + "/test.tsv", b.test);
    auto out = detail::open_out(dir + "/id_map.tsv");
    for (int u = 0; u < b.train.n_users; ++u)
        out << "user\t" << u << '\t' << b.train.user_ids[u] << '\n';
    for (int i = 0; i < b.train.n_items; ++i)
        out << "item\t" << i << '\t' << b.train.item_ids[i] << '\n';
}

// Reads back what write_splits produced. Indices in the files are already
// dense, so this restores the id maps from id_map.tsv and takes the records
// verbatim.
inline SplitBundle read_splits(const std::string& dir) {
    SplitBundle b;
    {
        std::ifstream in(dir + "/id_map.tsv");
        if (!in) throw data_error("cannot open " + dir + "/id_map.tsv");
        std::string kind, raw;
        int idx;
        while (in >> kind >> idx >> raw) {
            if (kind == "user") {
                b.train.user_ids.push_back(raw);
                b.train.user_index.emplace(raw, idx);
            } else if (kind == "item") {
                b.train.item_ids.push_back(raw);
                b.train.item_index.emplace(raw, idx);
            } else {
                throw data_error("bad id_map.tsv entry kind: " + kind);
            }
        }
        b.train.n_users = static_cast<int>(b.train.user_ids.size());
        b.train.n_items = static_cast<int>(b.train.item_ids.size());
        if (b.train.n_users == 0 || b.train.n_items == 0)
            throw data_error("id_map.tsv is empty or missing entries");
    }
    b.valid.n_users = b.test.n_users = b.train.n_users;
    b.valid.n_items = b.test.n_items = b.train.n_items;
    b.valid.user_ids = b.test.user_ids = b.train.user_ids;
    b.valid.item_ids = b.test.item_ids = b.train.item_ids;
    b.valid.user_index = b.test.user_index = b.train.user_index;
    b.valid.item_index = b.test.item_index = b.train.item_index;

    auto read_one = [&](const std::string& path, InteractionLog& log) {
        std::ifstream in(path);
        if (!in) throw data_error("cannot open " + path);
        long long u, i, ts;
        while (in >> u >> i >> ts) {
            if (u < 0 || u >= log.n_users || i < 0 || i >= log.n_items)
                throw data_error("index out of range in " + path);
            log.interactions.push_back(
                {static_cast<int>(u), static_cast<int>(i), static_cast<std::int64_t>(ts)});
        }
    };
    read_one(dir + "/train.tsv", b.train);
    read_one(dir + "/valid.tsv", b.valid);
    read_one(dir + "/test.tsv", b.test);
    if (b.train.interactions.empty()) throw data_error("train split is empty: " + dir);
    return b;
}

inline void write_stats(const std::string& path, const DatasetStats& s) {
    auto out = detail::open_out(path);
    out << "n_users,n_items,n_interactions,sparsity_pct\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d,%d,%zu,%.4f\n", s.n_users, s.n_items, s.n_interactions,
                  s.sparsity_pct);
    out << buf;
}

// ---- checkpoint ------------------------------------------------------------

struct Checkpoint {
    int n_users = 0;
    int n_items = 0;
    int dim = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    Matrix<double> x0;
};

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
    auto out = detail::open_out(path);
    out << "LGCN-CKPT-1\n"
        << c.n_users << ' ' << c.n_items << ' ' << c.dim << ' ' << c.seed << ' ' << c.config_hash
        << '\n';
    out.write(reinterpret_cast<const char*>(c.x0.data.data()),
              static_cast<std::streamsize>(c.x0.data.size() * sizeof(double)));
    if (!out) throw data_error("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open checkpoint: " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != "LGCN-CKPT-1") throw data_error("not a layergcn checkpoint: " + path);
    Checkpoint c;
    in >> c.n_users >> c.n_items >> c.dim >> c.seed >> c.config_hash;
    in.ignore(1);  // newline after the header
    if (!in || c.n_users < 1 || c.n_items < 1 || c.dim < 1)
        throw data_error("corrupt checkpoint header: " + path);
    c.x0 = Matrix<double>(c.n_users + c.n_items, c.dim);
    in.read(reinterpret_cast<char*>(c.x0.data.data()),
            static_cast<std::streamsize>(c.x0.data.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(c.x0.data.size() * sizeof(double)))
        throw data_error("truncated checkpoint: " + path);
    return c;
}

// ---- run outputs -----------------------------------------------------------

// Deterministic per-epoch log. Wall-clock timings go to a separate file so
// that two identically seeded runs produce byte-identical training logs.
inline void write_train_log(const std::string& path, const TrainingLog& log, int eval_topk) {
    auto out = detail::open_out(path);
    out << "epoch,mean_batch_loss,valid_recall@" << eval_topk << "\n";
    for (const auto& e : log.epochs) {
        out << e.epoch << ',' << detail::fmt_double(e.mean_batch_loss) << ','
            << detail::fmt_double(e.valid_metric) << '\n';
    }
    out << "# best_epoch=" << log.best_epoch << " best_metric="
        << detail::fmt_double(log.best_metric) << '\n';
}

inline void write_timing(const std::string& path, const TrainingLog& log) {
    auto out = detail::open_out(path);
    out << "epoch,elapsed_seconds\n";
    for (const auto& e : log.epochs)
        out << e.epoch << ',' << detail::fmt_double(e.seconds, "%.3f") << '\n';
}

inline void write_metrics(const std::string& path, const RankingResult& r) {
    auto out = detail::open_out(path);
    out << "K,recall,ndcg,n_evaluated_users\n";
    for (std::size_t ki = 0; ki < r.ks.size(); ++ki) {
        out << r.ks[ki] << ',' << detail::fmt_double(r.mean_recall[ki]) << ','
            << detail::fmt_double(r.mean_ndcg[ki]) << ',' << r.n_evaluated_users() << '\n';
    }
}

inline void write_per_user_metrics(const std::string& path, const RankingResult& r) {
    auto out = detail::open_out(path);
    out << "user,K,recall,ndcg\n";
    for (std::size_t idx = 0; idx < r.users.size(); ++idx) {
        for (std::size_t ki = 0; ki < r.ks.size(); ++ki) {
            out << r.users[idx] << ',' << r.ks[ki] << ',' << detail::fmt_double(r.recall[ki][idx])
                << ',' << detail::fmt_double(r.ndcg[ki][idx]) << '\n';
        }
    }
}

// Long-format (epoch, layer, value) CSV used by the similarity and
// divergence exports.
class LayerSeriesWriter {
  public:
    LayerSeriesWriter() = default;
    explicit LayerSeriesWriter(const std::string& path) : out_(detail::open_out(path)) {
        out_ << "epoch,layer,value\n";
    }
    void append(int epoch, const std::vector<double>& per_layer) {
        for (std::size_t l = 0; l < per_layer.size(); ++l) {
            out_ << epoch << ',' << (l + 1) << ',' << detail::fmt_double(per_layer[l]) << '\n';
        }
    }

  private:
    std::ofstream out_;
};

inline std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open file for checksum: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
        if (!in) break;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Run manifest, written before training starts: what ran, on which data, and
// where the outputs land.
inline void write_manifest(const std::string& path, std::uint64_t seed,
                           const std::string& config_snapshot,
                           const std::map<std::string, std::uint64_t>& input_checksums,
                           const std::vector<std::string>& outputs) {
    auto out = detail::open_out(path);
    out << "version=" << kVersion << '\n';
    out << "seed=" << seed << '\n';
    out << "config_hash=" << hex64(fnv1a(config_snapshot)) << '\n';
    for (const auto& [file, sum] : input_checksums)
        out << "input " << file << " fnv1a=" << hex64(sum) << '\n';
    for (const auto& f : outputs) out << "output " << f << '\n';
}

}  // namespace layergcn
