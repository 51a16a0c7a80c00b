#include "tfn/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tfn/nn/optim.hpp"

namespace tfn::nn {
namespace {

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("TrainConfig.") + field + ": " + what);
}

Tensor gather(const Tensor& samples, std::span<const std::size_t> idx) {
    Tensor out(idx.size(), samples.channels(), samples.length());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto src = samples.sample(idx[i]);
        std::copy(src.begin(), src.end(), out.sample(i).begin());
    }
    return out;
}

std::uint32_t argmax_row(const Tensor& logits, std::size_t b) {
    const auto row = logits.sample(b);
    return static_cast<std::uint32_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::vector<double> theta_of(Model& model) {
    const TfConv* tf = model.tfconv();
    return tf ? tf->layer().params.values : std::vector<double>{};
}

}  // namespace

void TrainConfig::validate() const {
    require(epochs > 0, "epochs", "must be positive");
    require(initial_lr > 0.0 && std::isfinite(initial_lr), "initial_lr", "must be positive");
    require(lr_decay > 0.0 && lr_decay <= 1.0, "lr_decay", "must lie in (0, 1]");
    require(adam_beta1 > 0.0 && adam_beta1 < 1.0, "adam_beta1", "must lie in (0, 1)");
    require(adam_beta2 > 0.0 && adam_beta2 < 1.0, "adam_beta2", "must lie in (0, 1)");
    require(adam_eps > 0.0, "adam_eps", "must be positive");
    require(batch_size >= 2, "batch_size", "must be at least 2");
}

Tensor softmax(const Tensor& logits) {
    Tensor p(logits.shape());
    for (std::size_t b = 0; b < logits.batch(); ++b) {
        const auto z = logits.sample(b);
        auto out = p.sample(b);
        const double zmax = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) sum += (out[k] = std::exp(z[k] - zmax));
        for (double& v : out) v /= sum;
    }
    return p;
}

std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels) {
    const std::size_t batch = logits.batch();
    if (labels.size() != batch) throw std::invalid_argument("softmax_cross_entropy: label count != batch");
    if (batch == 0) throw std::invalid_argument("softmax_cross_entropy: empty batch");
    const std::size_t n = logits.channels() * logits.length();
    Tensor grad(logits.shape());
    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        if (labels[b] >= n) {
            throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(labels[b]) +
                                        " out of range for " + std::to_string(n) + " classes");
        }
        const auto z = logits.sample(b);
        const double zmax = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - zmax);
        const double log_sum = zmax + std::log(sum);
        loss += log_sum - z[labels[b]];
        auto g = grad.sample(b);
        for (std::size_t k = 0; k < n; ++k) g[k] = std::exp(z[k] - log_sum) / static_cast<double>(batch);
        g[labels[b]] -= 1.0 / static_cast<double>(batch);
    }
    return {loss / static_cast<double>(batch), std::move(grad)};
}

std::vector<std::uint32_t> predict(Model& model, const Tensor& samples, std::size_t batch_size) {
    std::vector<std::uint32_t> out;
    out.reserve(samples.batch());
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < samples.batch(); start += batch_size) {
        const std::size_t end = std::min(samples.batch(), start + batch_size);
        idx.resize(end - start);
        std::iota(idx.begin(), idx.end(), start);
        const Tensor logits = model.forward(gather(samples, idx), false);
        for (std::size_t b = 0; b < logits.batch(); ++b) out.push_back(argmax_row(logits, b));
    }
    model.release_caches();
    return out;
}

Evaluation evaluate(Model& model, const Dataset& dataset, std::size_t batch_size) {
    const std::size_t n = model.spec().n_classes;
    Evaluation ev;
    ev.confusion.assign(n, std::vector<std::size_t>(n, 0));
    if (dataset.empty()) return ev;
    const auto pred = predict(model, dataset.samples, batch_size);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const auto truth = dataset.labels[i];
        if (truth >= n) throw std::invalid_argument("evaluate: label exceeds model class count");
        ++ev.confusion[truth][pred[i]];
        correct += truth == pred[i];
    }
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
    return ev;
}

TrainHistory train(Model& model, const Dataset& train_set, const Dataset* test_set, const TrainConfig& config,
                   const EpochCallback& on_epoch) {
    config.validate();
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");
    if (train_set.size() < 2) throw std::invalid_argument("train: need at least 2 training samples");
    const std::size_t n_classes = model.spec().n_classes;
    for (auto l : train_set.labels)
        if (l >= n_classes) throw std::invalid_argument("train: label " + std::to_string(l) + " >= n_classes");

    Adam adam({config.adam_beta1, config.adam_beta2, config.adam_eps});
    TrainHistory history;
    history.theta_initial = theta_of(model);

    std::vector<std::size_t> order(train_set.size());
    std::vector<std::uint32_t> batch_labels;
    double lr = config.initial_lr;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(config.seed, "train.shuffle", epoch));
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

        double loss_sum = 0.0;
        std::size_t correct = 0, seen = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            if (end - start < 2) break;
            const std::span<const std::size_t> idx(order.data() + start, end - start);
            batch_labels.resize(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) batch_labels[i] = train_set.labels[idx[i]];

            model.zero_grad();
            const Tensor logits = model.forward(gather(train_set.samples, idx), true);
            auto [loss, grad] = softmax_cross_entropy(logits, batch_labels);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
            }
            model.backward(grad);
            adam.step(model.parameters(), lr);
            model.project_constraints();

            loss_sum += loss * static_cast<double>(idx.size());
            for (std::size_t b = 0; b < idx.size(); ++b) correct += argmax_row(logits, b) == batch_labels[b];
            seen += idx.size();
        }
        lr *= config.lr_decay;

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(seen);
        rec.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
        rec.test_acc = (test_set && !test_set->empty()) ? evaluate(model, *test_set).accuracy
                                                         : std::numeric_limits<double>::quiet_NaN();
        history.epochs.push_back(rec);
        if (!history.theta_initial.empty()) history.theta.push_back(theta_of(model));
        if (on_epoch) on_epoch(rec);
    }
    return history;
}

}  // namespace tfn::nn
