#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace layergcn {

// Error categories map to CLI exit codes: config=1, data=2, numeric=3.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix. The only parameter container in the model is an
// N x T instance of this (the ego embeddings).
template <class S>
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<S> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, S(0)) {}

    S* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const S* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    S& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    S operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    void set_zero() { std::fill(data.begin(), data.end(), S(0)); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

template <class S>
S dot(const S* a, const S* b, int n) {
    S s = 0;
    for (int k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
}

template <class S>
S norm2(const S* a, int n) {
    return std::sqrt(dot(a, a, n));
}

template <class S>
S frobenius_sq(const Matrix<S>& m) {
    S s = 0;
    for (S v : m.data) s += v * v;
    return s;
}

template <class S>
bool all_finite(const Matrix<S>& m) {
    for (S v : m.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Seeded randomness.
//
// mt19937_64 output is pinned by the standard, so a fixed seed gives the same
// stream on every platform. The helpers below replace std::*_distribution,
// whose mapping from engine output is implementation-defined and would break
// cross-compiler reproducibility of golden files.

using rng_t = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent stream per (seed, role); roles are small integers chosen by the
// caller (init / pruning / shuffling / negatives).
inline rng_t make_rng(std::uint64_t seed, std::uint64_t stream) {
    return rng_t(splitmix64(seed ^ splitmix64(stream + 0x517cc1b727220a95ull)));
}

// Uniform in [0,1) with 53 random bits.
inline double uniform01(rng_t& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0,n), n >= 1.
inline std::uint64_t uniform_below(rng_t& rng, std::uint64_t n) {
    const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

inline int uniform_int(rng_t& rng, int n) {
    return static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n)));
}

template <class T>
void shuffle_inplace(std::vector<T>& v, rng_t& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_below(rng, i)]);
    }
}

// Exp(1) draw via inverse CDF; input in [0,1) keeps the result finite.
inline double exp_draw(rng_t& rng) {
    return -std::log1p(-uniform01(rng));
}

// FNV-1a, used for dataset checksums and config hashes in run manifests.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

}  // namespace layergcn
