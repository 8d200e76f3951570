#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fieldscan/rng.hpp"
#include "fieldscan/score.hpp"
#include "fieldscan/stats.hpp"

namespace fieldscan {

/// Median Euclidean distance over all row pairs; the kernel-bandwidth
/// heuristic. Exact up to 2000 rows, beyond that a seeded 2000-row subsample
/// keeps the pair count bounded.
inline double median_pairwise_distance(const FeatureMatrix& matrix) {
    const std::size_t n = matrix.rows();
    if (n < 2) throw std::invalid_argument("median_pairwise_distance needs at least 2 rows");
    constexpr std::size_t kExactLimit = 2000;

    std::vector<std::size_t> rows;
    if (n <= kExactLimit) {
        rows.resize(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    } else {
        Rng rng(0x6d70645fULL);  // fixed stream: the subsample is part of the contract
        rows = rng.sample_without_replacement(n, kExactLimit);
        std::sort(rows.begin(), rows.end());
    }

    const std::size_t m = rows.size();
    const std::size_t dims = matrix.cols();
    std::vector<double> dist;
    dist.reserve(m * (m - 1) / 2);
    for (std::size_t a = 0; a < m; ++a) {
        const auto ra = matrix.row(rows[a]);
        for (std::size_t b = a + 1; b < m; ++b) {
            const auto rb = matrix.row(rows[b]);
            double d2 = 0.0;
            for (std::size_t c = 0; c < dims; ++c) {
                const double d = ra[c] - rb[c];
                d2 += d * d;
            }
            dist.push_back(std::sqrt(d2));
        }
    }
    return percentile(dist, 0.5);
}

struct OcSvmParams {
    double nu = 0.1;
    std::optional<double> sigma;  // unset: median pairwise distance
    double tolerance = 1e-6;      // max allowed KKT violation
    std::size_t max_updates = 1000000;
};

/// Solution of the one-class dual: minimize 1/2 a'Ka subject to
/// 0 <= a_i <= 1/(nu*n), sum a_i = 1, K the Gaussian kernel.
struct OcSvmModel {
    std::vector<double> alpha;
    std::vector<double> gradient;  // (K alpha)_i, the decision value at row i
    double rho = 0.0;
    double sigma = 0.0;
    double objective = 0.0;
    double kkt_violation = 0.0;
    std::size_t updates = 0;
};

/// Pairwise coordinate descent on the dual (working set of two). Each step
/// moves mass from the most-above-rho coordinate to the most-below-rho one;
/// the two-variable subproblem is solved exactly. Fully deterministic.
inline OcSvmModel fit_ocsvm(const FeatureMatrix& matrix, const OcSvmParams& params) {
    const std::size_t n = matrix.rows();
    if (n < 2) throw std::invalid_argument("one-class SVM needs at least 2 rows");
    if (matrix.normalization != Normalization::minmax) {
        throw std::invalid_argument("one-class SVM expects a min-max normalized matrix");
    }
    if (!(params.nu > 0.0) || params.nu > 1.0) {
        throw std::invalid_argument("nu must lie in (0, 1]");
    }
    if (params.nu * static_cast<double>(n) < 1.0) {
        throw std::invalid_argument("nu*n must be >= 1 or the dual is infeasible");
    }

    OcSvmModel model;
    model.sigma = params.sigma.value_or(0.0);
    if (!params.sigma.has_value()) {
        model.sigma = median_pairwise_distance(matrix);
        if (!(model.sigma > 0.0)) model.sigma = 1.0;  // all rows coincident
    }
    if (!(model.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");

    // Gaussian Gram matrix
    const std::size_t dims = matrix.cols();
    const double inv_two_sigma2 = 1.0 / (2.0 * model.sigma * model.sigma);
    std::vector<double> kernel(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        kernel[i * n + i] = 1.0;
        const auto ri = matrix.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto rj = matrix.row(j);
            double d2 = 0.0;
            for (std::size_t c = 0; c < dims; ++c) {
                const double d = ri[c] - rj[c];
                d2 += d * d;
            }
            const double kv = std::exp(-d2 * inv_two_sigma2);
            kernel[i * n + j] = kv;
            kernel[j * n + i] = kv;
        }
    }

    const double box = 1.0 / (params.nu * static_cast<double>(n));
    model.alpha.assign(n, 1.0 / static_cast<double>(n));  // feasible start
    model.gradient.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* krow = &kernel[i * n];
        double g = 0.0;
        for (std::size_t j = 0; j < n; ++j) g += krow[j] * model.alpha[j];
        model.gradient[i] = g;
    }

    const double bound_eps = box * 1e-12;
    for (model.updates = 0; model.updates < params.max_updates; ++model.updates) {
        // i: can grow (alpha under the box), j: can shrink (alpha above zero)
        std::size_t up = n, down = n;
        double g_up = std::numeric_limits<double>::infinity();
        double g_down = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (model.alpha[i] < box - bound_eps && model.gradient[i] < g_up) {
                g_up = model.gradient[i];
                up = i;
            }
            if (model.alpha[i] > bound_eps && model.gradient[i] > g_down) {
                g_down = model.gradient[i];
                down = i;
            }
        }
        if (up == n || down == n) {
            model.kkt_violation = 0.0;  // box fully saturated (nu = 1)
            break;
        }
        model.kkt_violation = g_down - g_up;
        if (model.kkt_violation <= params.tolerance) break;

        const double eta =
            kernel[up * n + up] + kernel[down * n + down] - 2.0 * kernel[up * n + down];
        const double room = std::min(box - model.alpha[up], model.alpha[down]);
        double step = room;
        if (eta > 1e-15) step = std::min(room, (g_down - g_up) / eta);

        if (step == box - model.alpha[up]) {
            model.alpha[up] = box;
        } else {
            model.alpha[up] += step;
        }
        if (step == model.alpha[down]) {
            model.alpha[down] = 0.0;
        } else {
            model.alpha[down] -= step;
        }
        const double* k_up = &kernel[up * n];
        const double* k_down = &kernel[down * n];
        for (std::size_t i = 0; i < n; ++i) {
            model.gradient[i] += step * (k_up[i] - k_down[i]);
        }
    }
    if (model.kkt_violation > params.tolerance) {
        throw std::runtime_error("one-class SVM did not converge: KKT violation " +
                                 std::to_string(model.kkt_violation) + " after " +
                                 std::to_string(model.updates) + " updates");
    }

    // offset: average decision value over free support vectors, else the
    // midpoint of the feasible interval
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const double margin = box * 1e-8;
    for (std::size_t i = 0; i < n; ++i) {
        if (model.alpha[i] > margin && model.alpha[i] < box - margin) {
            free_sum += model.gradient[i];
            ++free_count;
        } else if (model.alpha[i] >= box - margin) {
            lo = std::max(lo, model.gradient[i]);
        } else {
            hi = std::min(hi, model.gradient[i]);
        }
    }
    if (free_count > 0) {
        model.rho = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(lo) && std::isfinite(hi)) {
        model.rho = 0.5 * (lo + hi);
    } else {
        model.rho = std::isfinite(lo) ? lo : hi;
    }

    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += model.alpha[i] * model.gradient[i];
    model.objective = 0.5 * obj;
    return model;
}

/// Scores are rho - f(x): positive outside the learned region, higher =
/// more anomalous.
inline ScoreVector fit_score_ocsvm(const FeatureMatrix& matrix, const OcSvmParams& params) {
    const OcSvmModel model = fit_ocsvm(matrix, params);
    ScoreVector sv;
    sv.parcel_ids = matrix.row_ids;
    sv.scores.resize(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        sv.scores[i] = model.rho - model.gradient[i];
    }
    sv.algorithm = "ocsvm";
    sv.parameters = {{"nu", params.nu},
                     {"sigma", model.sigma},
                     {"tolerance", params.tolerance},
                     {"max_updates", params.max_updates},
                     {"updates_used", model.updates}};
    sv.seed = 0;  // solver is deterministic
    sv.matrix_fingerprint = matrix.fingerprint();
    sv.validate();
    return sv;
}

}  // namespace fieldscan
