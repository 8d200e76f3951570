#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "fieldscan/parallel.hpp"
#include "fieldscan/rng.hpp"
#include "fieldscan/score.hpp"

namespace fieldscan {

namespace detail {

// H(i) from the cached exact sum below the cutoff, asymptotic expansion
// above (error < 1e-15 relative there).
inline double harmonic(std::size_t i) {
    static constexpr std::size_t kExactLimit = 8192;
    static std::vector<double> table;
    static std::once_flag once;
    std::call_once(once, [] {
        table.resize(kExactLimit + 1, 0.0);
        for (std::size_t k = 1; k <= kExactLimit; ++k) {
            table[k] = table[k - 1] + 1.0 / static_cast<double>(k);
        }
    });
    if (i == 0) return 0.0;
    if (i <= kExactLimit) return table[i];
    constexpr double kEulerGamma = 0.57721566490153286060651209;
    const double x = static_cast<double>(i);
    const double x2 = x * x;
    return std::log(x) + kEulerGamma + 1.0 / (2.0 * x) - 1.0 / (12.0 * x2) +
           1.0 / (120.0 * x2 * x2);
}

}  // namespace detail

/// Average unsuccessful-search path length of a binary search tree over n
/// points: c(n) = 2 H(n-1) - 2(n-1)/n. Normalizes isolation depths.
inline double c_factor(std::size_t n) {
    if (n < 2) throw std::invalid_argument("c_factor needs n >= 2");
    return 2.0 * detail::harmonic(n - 1) -
           2.0 * static_cast<double>(n - 1) / static_cast<double>(n);
}

struct IFParams {
    std::size_t n_trees = 1000;
    std::size_t n_samples = 256;
    std::uint64_t seed = 0;
};

namespace detail {

struct IsoNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double split = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double leaf_adjust = 0.0;  // c(size) for unresolved leaves
};

class IsoTree {
public:
    IsoTree(const FeatureMatrix& m, std::span<const std::size_t> sample, std::size_t depth_cap,
            Rng& rng)
        : matrix_(m) {
        std::vector<std::size_t> rows(sample.begin(), sample.end());
        nodes_.reserve(2 * rows.size());
        build(rows, 0, 0, rows.size(), depth_cap, rng);
    }

    [[nodiscard]] double path_length(std::span<const double> point) const {
        std::uint32_t node = 0;
        double depth = 0.0;
        while (nodes_[node].feature >= 0) {
            node = point[static_cast<std::size_t>(nodes_[node].feature)] < nodes_[node].split
                       ? nodes_[node].left
                       : nodes_[node].right;
            depth += 1.0;
        }
        return depth + nodes_[node].leaf_adjust;
    }

private:
    // Builds the subtree over rows[lo, hi); returns its node index.
    std::uint32_t build(std::vector<std::size_t>& rows, std::size_t depth, std::size_t lo,
                        std::size_t hi, std::size_t depth_cap, Rng& rng) {
        const std::uint32_t idx = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({});
        const std::size_t size = hi - lo;
        if (size <= 1 || depth >= depth_cap) {
            nodes_[idx].leaf_adjust = size > 1 ? c_factor(size) : 0.0;
            return idx;
        }

        // draw features until one has spread inside this node; a node where
        // every feature is constant cannot be split further
        const std::size_t n_features = matrix_.cols();
        std::vector<std::uint8_t> tried(n_features, 0);
        std::size_t n_tried = 0;
        std::int32_t feature = -1;
        double lo_v = 0.0, hi_v = 0.0;
        while (n_tried < n_features) {
            const std::size_t f = rng.uniform_index(n_features);
            if (tried[f]) continue;
            tried[f] = 1;
            ++n_tried;
            double mn = matrix_.at(rows[lo], f), mx = mn;
            for (std::size_t i = lo + 1; i < hi; ++i) {
                const double v = matrix_.at(rows[i], f);
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            if (mx > mn) {
                feature = static_cast<std::int32_t>(f);
                lo_v = mn;
                hi_v = mx;
                break;
            }
        }
        if (feature < 0) {
            nodes_[idx].leaf_adjust = c_factor(size);
            return idx;
        }

        const double split = rng.uniform(lo_v, hi_v);
        auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(lo),
                                     rows.begin() + static_cast<std::ptrdiff_t>(hi),
                                     [&](std::size_t r) {
                                         return matrix_.at(r, static_cast<std::size_t>(feature)) <
                                                split;
                                     });
        std::size_t mid = static_cast<std::size_t>(mid_it - rows.begin());
        // a split drawn inside (min, max) always separates at least the
        // extremes; guard against an exact-boundary draw anyway
        if (mid == lo || mid == hi) mid = lo + size / 2;

        nodes_[idx].feature = feature;
        nodes_[idx].split = split;
        const std::uint32_t left = build(rows, depth + 1, lo, mid, depth_cap, rng);
        const std::uint32_t right = build(rows, depth + 1, mid, hi, depth_cap, rng);
        nodes_[idx].left = left;
        nodes_[idx].right = right;
        return idx;
    }

    const FeatureMatrix& matrix_;
    std::vector<IsoNode> nodes_;
};

}  // namespace detail

/// Isolation forest scores: s(x) = 2^(-E[h(x)]/c(psi)), higher = easier to
/// isolate. Trees are assigned seed streams by index and path lengths are
/// reduced in fixed chunk order, so results do not depend on thread count.
inline ScoreVector fit_score_isolation_forest(const FeatureMatrix& matrix, const IFParams& params) {
    const std::size_t n = matrix.rows();
    if (n < 2) throw std::invalid_argument("isolation forest needs at least 2 rows");
    if (params.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
    const std::size_t psi = std::min(params.n_samples, n);
    if (psi < 2) throw std::invalid_argument("n_samples must be >= 2");
    const std::size_t depth_cap =
        static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(psi))));

    constexpr std::size_t kChunk = 8;  // fixed, so reductions are schedule-free
    const std::size_t n_chunks = (params.n_trees + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> partials(n_chunks);

    parallel_units(n_chunks, [&](std::size_t chunk) {
        std::vector<double> acc(n, 0.0);
        const std::size_t t0 = chunk * kChunk;
        const std::size_t t1 = std::min(t0 + kChunk, params.n_trees);
        for (std::size_t t = t0; t < t1; ++t) {
            Rng rng(mix_seed(params.seed, t));
            const auto sample = rng.sample_without_replacement(n, psi);
            detail::IsoTree tree(matrix, sample, depth_cap, rng);
            for (std::size_t r = 0; r < n; ++r) {
                acc[r] += tree.path_length(matrix.row(r));
            }
        }
        partials[chunk] = std::move(acc);
    });

    std::vector<double> total(n, 0.0);
    for (const auto& part : partials) {
        for (std::size_t r = 0; r < n; ++r) total[r] += part[r];
    }

    ScoreVector sv;
    sv.parcel_ids = matrix.row_ids;
    sv.scores.resize(n);
    const double norm = c_factor(psi);
    for (std::size_t r = 0; r < n; ++r) {
        const double avg_path = total[r] / static_cast<double>(params.n_trees);
        sv.scores[r] = std::exp2(-avg_path / norm);
    }
    sv.algorithm = "isolation_forest";
    sv.parameters = {{"n_trees", params.n_trees}, {"n_samples", psi}};
    sv.seed = params.seed;
    sv.matrix_fingerprint = matrix.fingerprint();
    sv.validate();
    return sv;
}

}  // namespace fieldscan
