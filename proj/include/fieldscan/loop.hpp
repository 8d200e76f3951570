#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fieldscan/parallel.hpp"
#include "fieldscan/score.hpp"

namespace fieldscan {

/// Local Outlier Probabilities. `k` unset means min(701, rows-1); an
/// explicit k must satisfy 1 <= k < rows.
struct LoOPParams {
    std::optional<std::size_t> k;  // nearest-neighbor count
    double lambda = 2.0;           // extent multiplier
};

/// Probabilistic local density scores in [0,1].
///
/// sigma(o)  = sqrt(mean of squared distances to o's k nearest neighbors)
/// PLOF(o)   = sigma(o) / mean_{s in kNN(o)} sigma(s) - 1
/// nPLOF     = lambda * sqrt(mean PLOF^2)
/// LoOP(o)   = max(0, erf(PLOF(o) / (nPLOF * sqrt(2))))
///
/// All-coincident inputs give sigma = 0 everywhere; those ratios are pinned
/// to PLOF = 0, so duplicates score 0.
inline ScoreVector fit_score_loop(const FeatureMatrix& matrix, const LoOPParams& params) {
    const std::size_t n = matrix.rows();
    if (n < 2) throw std::invalid_argument("LoOP needs at least 2 rows");
    if (matrix.normalization != Normalization::minmax) {
        throw std::invalid_argument("LoOP expects a min-max normalized matrix");
    }
    std::size_t k = params.k.value_or(std::min<std::size_t>(701, n - 1));
    if (params.k.has_value() && (*params.k < 1 || *params.k >= n)) {
        throw std::invalid_argument("LoOP k must satisfy 1 <= k < rows");
    }
    if (!(params.lambda > 0.0)) throw std::invalid_argument("LoOP lambda must be positive");

    const std::size_t dims = matrix.cols();
    std::vector<std::vector<std::uint32_t>> neighbors(n);
    std::vector<double> sigma(n, 0.0);

    parallel_units(n, [&](std::size_t i) {
        std::vector<std::pair<double, std::uint32_t>> dist;
        dist.reserve(n - 1);
        const auto row_i = matrix.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto row_j = matrix.row(j);
            double d2 = 0.0;
            for (std::size_t c = 0; c < dims; ++c) {
                const double d = row_i[c] - row_j[c];
                d2 += d * d;
            }
            dist.push_back({d2, static_cast<std::uint32_t>(j)});
        }
        // ties in distance resolve toward the lower row index
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        double sum_d2 = 0.0;
        auto& nb = neighbors[i];
        nb.reserve(k);
        for (std::size_t m = 0; m < k; ++m) {
            sum_d2 += dist[m].first;
            nb.push_back(dist[m].second);
        }
        sigma[i] = std::sqrt(sum_d2 / static_cast<double>(k));
    });

    std::vector<double> plof(n, 0.0);
    double plof_sq_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double mean_sigma = 0.0;
        for (auto j : neighbors[i]) mean_sigma += sigma[j];
        mean_sigma /= static_cast<double>(k);
        plof[i] = mean_sigma > 0.0 ? sigma[i] / mean_sigma - 1.0 : 0.0;
        plof_sq_sum += plof[i] * plof[i];
    }
    const double nplof = params.lambda * std::sqrt(plof_sq_sum / static_cast<double>(n));

    ScoreVector sv;
    sv.parcel_ids = matrix.row_ids;
    sv.scores.resize(n);
    constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
    for (std::size_t i = 0; i < n; ++i) {
        sv.scores[i] = nplof > 0.0 ? std::max(0.0, std::erf(plof[i] * kInvSqrt2 / nplof)) : 0.0;
    }
    sv.algorithm = "loop";
    sv.parameters = {{"k", k}, {"lambda", params.lambda}};
    sv.seed = 0;  // LoOP is deterministic, no randomness involved
    sv.matrix_fingerprint = matrix.fingerprint();
    sv.validate();
    return sv;
}

}  // namespace fieldscan
