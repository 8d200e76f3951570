#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldscan/rng.hpp"
#include "fieldscan/score.hpp"

namespace fieldscan {

struct AeParams {
    // encoder/decoder widths are fixed; the input width comes from the matrix
    std::vector<std::size_t> hidden = {64, 32, 32, 64};
    double activity_reg = 1e-3;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
};

/// Fully connected autoencoder, ReLU hidden layers and a sigmoid output.
/// Inputs are expected in [0,1]. The loss is the mean squared reconstruction
/// error plus an L2 activity penalty on every hidden activation:
///
///   loss = mean_{b,j} (y - x)^2
///        + reg * sum_{b, hidden units} a^2 / (batch * total_hidden_units)
///
/// Plain double loops; gradients accumulate in fixed sample order so
/// training is bit-reproducible.
class AutoencoderNet {
public:
    AutoencoderNet(std::size_t input_width, const AeParams& params)
        : reg_(params.activity_reg) {
        widths_.push_back(input_width);
        for (std::size_t h : params.hidden) widths_.push_back(h);
        widths_.push_back(input_width);
        n_layers_ = widths_.size() - 1;
        weights_.resize(n_layers_);
        biases_.resize(n_layers_);
        for (std::size_t l = 0; l < n_layers_; ++l) {
            weights_[l].assign(widths_[l + 1] * widths_[l], 0.0);
            biases_[l].assign(widths_[l + 1], 0.0);
        }
        total_hidden_ = 0;
        for (std::size_t h : params.hidden) total_hidden_ += h;
    }

    void init_glorot(Rng& rng) {
        for (std::size_t l = 0; l < n_layers_; ++l) {
            const double limit = std::sqrt(6.0 / static_cast<double>(widths_[l] + widths_[l + 1]));
            for (auto& w : weights_[l]) w = rng.uniform(-limit, limit);
            for (auto& b : biases_[l]) b = 0.0;
        }
    }

    [[nodiscard]] std::size_t input_width() const { return widths_.front(); }
    [[nodiscard]] std::size_t n_parameters() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < n_layers_; ++l) n += weights_[l].size() + biases_[l].size();
        return n;
    }

    [[nodiscard]] std::vector<double> flatten_parameters() const {
        std::vector<double> flat;
        flat.reserve(n_parameters());
        for (std::size_t l = 0; l < n_layers_; ++l) {
            flat.insert(flat.end(), weights_[l].begin(), weights_[l].end());
            flat.insert(flat.end(), biases_[l].begin(), biases_[l].end());
        }
        return flat;
    }

    void set_parameters(std::span<const double> flat) {
        if (flat.size() != n_parameters()) throw std::invalid_argument("parameter size mismatch");
        std::size_t pos = 0;
        for (std::size_t l = 0; l < n_layers_; ++l) {
            for (auto& w : weights_[l]) w = flat[pos++];
            for (auto& b : biases_[l]) b = flat[pos++];
        }
    }

    /// Activations per layer for one sample; activations[0] is the input.
    [[nodiscard]] std::vector<std::vector<double>> forward(std::span<const double> x) const {
        std::vector<std::vector<double>> acts(n_layers_ + 1);
        acts[0].assign(x.begin(), x.end());
        for (std::size_t l = 0; l < n_layers_; ++l) {
            const auto& in = acts[l];
            auto& out = acts[l + 1];
            out.assign(widths_[l + 1], 0.0);
            const bool is_output = l + 1 == widths_.size() - 1;
            for (std::size_t o = 0; o < widths_[l + 1]; ++o) {
                double z = biases_[l][o];
                const double* wrow = &weights_[l][o * widths_[l]];
                for (std::size_t i = 0; i < widths_[l]; ++i) z += wrow[i] * in[i];
                out[o] = is_output ? 1.0 / (1.0 + std::exp(-z)) : (z > 0.0 ? z : 0.0);
            }
        }
        return acts;
    }

    [[nodiscard]] double reconstruction_error(std::span<const double> x) const {
        const auto acts = forward(x);
        const auto& y = acts.back();
        double err = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            const double d = y[j] - x[j];
            err += d * d;
        }
        return err / static_cast<double>(y.size());
    }

    /// Loss and gradient over a batch of rows; grad follows the flattened
    /// parameter layout. Samples accumulate in the given order.
    double loss_and_gradient(const FeatureMatrix& m, std::span<const std::size_t> batch,
                             std::vector<double>& grad) const {
        grad.assign(n_parameters(), 0.0);
        const double batch_n = static_cast<double>(batch.size());
        const double out_w = static_cast<double>(widths_.back());
        const double act_norm = reg_ / (batch_n * static_cast<double>(total_hidden_));
        double loss = 0.0;

        // per-layer views into the flat gradient
        std::vector<std::size_t> w_off(n_layers_), b_off(n_layers_);
        std::size_t pos = 0;
        for (std::size_t l = 0; l < n_layers_; ++l) {
            w_off[l] = pos;
            pos += weights_[l].size();
            b_off[l] = pos;
            pos += biases_[l].size();
        }

        std::vector<std::vector<double>> delta(n_layers_ + 1);
        for (std::size_t bi = 0; bi < batch.size(); ++bi) {
            const auto x = m.row(batch[bi]);
            const auto acts = forward(x);
            const auto& y = acts.back();

            for (std::size_t j = 0; j < y.size(); ++j) {
                const double d = y[j] - x[j];
                loss += d * d / (batch_n * out_w);
            }
            for (std::size_t l = 1; l < n_layers_; ++l) {  // hidden activations
                for (double a : acts[l]) loss += act_norm * a * a;
            }

            // output layer: dL/dz through the sigmoid
            delta[n_layers_].assign(widths_.back(), 0.0);
            for (std::size_t j = 0; j < y.size(); ++j) {
                const double dy = 2.0 * (y[j] - x[j]) / (batch_n * out_w);
                delta[n_layers_][j] = dy * y[j] * (1.0 - y[j]);
            }
            for (std::size_t l = n_layers_; l-- > 0;) {
                const auto& dz = delta[l + 1];
                const auto& in = acts[l];
                double* gw = &grad[w_off[l]];
                double* gb = &grad[b_off[l]];
                for (std::size_t o = 0; o < widths_[l + 1]; ++o) {
                    gb[o] += dz[o];
                    double* grow = &gw[o * widths_[l]];
                    for (std::size_t i = 0; i < widths_[l]; ++i) grow[i] += dz[o] * in[i];
                }
                if (l == 0) break;
                auto& da = delta[l];
                da.assign(widths_[l], 0.0);
                for (std::size_t o = 0; o < widths_[l + 1]; ++o) {
                    const double* wrow = &weights_[l][o * widths_[l]];
                    for (std::size_t i = 0; i < widths_[l]; ++i) da[i] += wrow[i] * dz[o];
                }
                // activity penalty reaches every hidden layer's output
                for (std::size_t i = 0; i < widths_[l]; ++i) {
                    da[i] += 2.0 * act_norm * acts[l][i];
                    da[i] = acts[l][i] > 0.0 ? da[i] : 0.0;  // ReLU mask
                }
            }
        }
        return loss;
    }

private:
    std::vector<std::size_t> widths_;
    std::size_t n_layers_ = 0;
    std::size_t total_hidden_ = 0;
    double reg_ = 0.0;
    std::vector<std::vector<double>> weights_;  // [layer][out*in]
    std::vector<std::vector<double>> biases_;
};

/// Trains the autoencoder with Adam and scores each row by its mean squared
/// reconstruction error.
inline ScoreVector fit_score_autoencoder(const FeatureMatrix& matrix, const AeParams& params) {
    const std::size_t n = matrix.rows();
    if (n < 2) throw std::invalid_argument("autoencoder needs at least 2 rows");
    if (matrix.normalization != Normalization::minmax) {
        throw std::invalid_argument("autoencoder expects a min-max normalized matrix");
    }
    if (params.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (params.activity_reg < 0.0) throw std::invalid_argument("activity_reg must be >= 0");

    AutoencoderNet net(matrix.cols(), params);
    Rng rng(mix_seed(params.seed, 0));
    net.init_glorot(rng);

    const std::size_t n_params = net.n_parameters();
    std::vector<double> theta = net.flatten_parameters();
    std::vector<double> grad(n_params, 0.0);
    std::vector<double> adam_m(n_params, 0.0), adam_v(n_params, 0.0);
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t adam_t = 0;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += params.batch_size) {
            const std::size_t stop = std::min(start + params.batch_size, n);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            const double loss = net.loss_and_gradient(matrix, batch, grad);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("autoencoder loss became non-finite at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(start / params.batch_size));
            }
            ++adam_t;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
            for (std::size_t p = 0; p < n_params; ++p) {
                adam_m[p] = beta1 * adam_m[p] + (1.0 - beta1) * grad[p];
                adam_v[p] = beta2 * adam_v[p] + (1.0 - beta2) * grad[p] * grad[p];
                theta[p] -= params.learning_rate * (adam_m[p] / bc1) /
                            (std::sqrt(adam_v[p] / bc2) + eps);
            }
            net.set_parameters(theta);
        }
    }

    ScoreVector sv;
    sv.parcel_ids = matrix.row_ids;
    sv.scores.resize(n);
    for (std::size_t r = 0; r < n; ++r) sv.scores[r] = net.reconstruction_error(matrix.row(r));
    sv.algorithm = "autoencoder";
    sv.parameters = {{"hidden", params.hidden},
                     {"activity_reg", params.activity_reg},
                     {"epochs", params.epochs},
                     {"batch_size", params.batch_size},
                     {"learning_rate", params.learning_rate}};
    sv.seed = params.seed;
    sv.matrix_fingerprint = matrix.fingerprint();
    sv.validate();
    return sv;
}

}  // namespace fieldscan
