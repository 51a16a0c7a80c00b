#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "tfn/data.hpp"
#include "tfn/nn/model.hpp"

namespace tfn::nn {

struct TrainConfig {
    std::size_t epochs = 50;
    double initial_lr = 0.001;
    /// Multiplicative learning-rate factor applied after every epoch.
    double lr_decay = 0.96;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument naming the first bad field.
    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_acc = 0.0;
    /// NaN when no test set was given.
    double test_acc = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    /// TFconv control parameters before training and after each epoch
    /// (empty when the model has no TFconv layer).
    std::vector<double> theta_initial;
    std::vector<std::vector<double>> theta;
};

/// Mean cross-entropy over the batch and its gradient (p - onehot) / batch.
/// logits: (batch, n_classes, 1).
std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels);

/// Row-wise softmax of (batch, n_classes, 1) logits.
Tensor softmax(const Tensor& logits);

struct Evaluation {
    double accuracy = 0.0;
    /// confusion[true][predicted]
    std::vector<std::vector<std::size_t>> confusion;
};

/// Inference-mode accuracy and confusion matrix.
Evaluation evaluate(Model& model, const Dataset& dataset, std::size_t batch_size = 256);

/// Predicted class per sample, inference mode.
std::vector<std::uint32_t> predict(Model& model, const Tensor& samples, std::size_t batch_size = 256);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Shuffled mini-batch Adam training with per-epoch learning-rate decay and
/// constraint projection after every step. A trailing batch holding a single
/// sample is skipped, since batch normalization needs at least two.
/// Deterministic for a given model, data and config.seed.
TrainHistory train(Model& model, const Dataset& train_set, const Dataset* test_set, const TrainConfig& config,
                   const EpochCallback& on_epoch = {});

}  // namespace tfn::nn
