#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfn/random.hpp"
#include "tfn/tensor.hpp"
#include "tfn/tfconv.hpp"

namespace tfn::nn {

enum class LayerKind { conv1d, batch_norm, relu, max_pool, adaptive_avg_pool, flatten, dense, tfconv, residual };

std::string_view to_string(LayerKind kind);

/// Per-sample feature shape (channels, length).
struct FeatureShape {
    std::size_t channels = 0;
    std::size_t length = 0;
    bool operator==(const FeatureShape&) const = default;
};

/// A trainable tensor and its gradient buffer (identical sizes).
struct ParamView {
    std::string name;
    std::span<double> value;
    std::span<double> grad;
    std::vector<std::size_t> dims;
};

/// Non-trainable state that still belongs in a checkpoint (BN running stats).
struct BufferView {
    std::string name;
    std::span<double> value;
    std::vector<std::size_t> dims;
};

class Layer {
public:
    virtual ~Layer() = default;

    virtual LayerKind kind() const = 0;
    virtual std::string describe() const = 0;
    /// Throws std::invalid_argument if `in` cannot feed this layer.
    virtual FeatureShape output_shape(FeatureShape in) const = 0;

    virtual Tensor forward(const Tensor& x, bool training) = 0;
    /// Accumulates parameter gradients and returns dL/dx for the last forward.
    virtual Tensor backward(const Tensor& grad_out) = 0;

    virtual std::vector<ParamView> parameters() { return {}; }
    virtual std::vector<BufferView> buffers() { return {}; }
    /// Re-imposes parameter constraints after an optimizer step.
    virtual void project() {}
    /// Frees activations kept for backward(); the next call must be forward().
    /// predict() and evaluate() call this on the whole model when they finish.
    virtual void release_cache() {}
};

using LayerPtr = std::unique_ptr<Layer>;

/// h_k = w_k * x + b_k (cross-correlation, stride 1, symmetric zero padding).
class Conv1d final : public Layer {
public:
    Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size, std::size_t padding = 0);

    /// Uniform in +-sqrt(6 / fan_in); zero bias.
    void init(Rng& rng);

    LayerKind kind() const override { return LayerKind::conv1d; }
    std::string describe() const override;
    FeatureShape output_shape(FeatureShape in) const override;
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<ParamView> parameters() override;

    std::size_t in_channels() const { return in_; }
    std::size_t out_channels() const { return out_; }
    std::size_t kernel_size() const { return k_; }
    /// Taps of (out, in) pair; weight layout is (out, in, k).
    std::span<const double> kernel(std::size_t out, std::size_t in) const {
        return std::span<const double>(weight_).subspan((out * in_ + in) * k_, k_);
    }
    std::span<double> weight() { return weight_; }
    std::span<double> bias() { return bias_; }

    void release_cache() override { input_ = Tensor(); }
private:
    std::size_t in_, out_, k_, pad_;
    AlignedVector weight_, bias_, grad_weight_, grad_bias_;
    Tensor input_;
};

/// Per-channel normalization over batch and time, followed by an affine map.
class BatchNorm1d final : public Layer {
public:
    explicit BatchNorm1d(std::size_t channels, double eps = 1e-5, double momentum = 0.1);

    LayerKind kind() const override { return LayerKind::batch_norm; }
    std::string describe() const override;
    FeatureShape output_shape(FeatureShape in) const override;
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<ParamView> parameters() override;
    std::vector<BufferView> buffers() override;

    std::span<double> gamma() { return gamma_; }
    std::span<double> beta() { return beta_; }
    std::span<const double> running_mean() const { return running_mean_; }
    std::span<const double> running_var() const { return running_var_; }

    void release_cache() override { xhat_ = Tensor(); }
private:
    std::size_t channels_;
    double eps_, momentum_;
    AlignedVector gamma_, beta_, grad_gamma_, grad_beta_, running_mean_, running_var_;
    Tensor xhat_;
    AlignedVector inv_std_;
    bool trained_forward_ = false;
};

class ReLU final : public Layer {
public:
    LayerKind kind() const override { return LayerKind::relu; }
    std::string describe() const override { return "ReLU"; }
    FeatureShape output_shape(FeatureShape in) const override { return in; }
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;

    void release_cache() override { std::vector<unsigned char>().swap(mask_); }
private:
    Shape shape_;
    std::vector<unsigned char> mask_;
};

/// Non-overlapping max pooling; output length floor(L / window).
class MaxPool1d final : public Layer {
public:
    explicit MaxPool1d(std::size_t window = 2) : window_(window) {}

    LayerKind kind() const override { return LayerKind::max_pool; }
    std::string describe() const override;
    FeatureShape output_shape(FeatureShape in) const override;
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;

    void release_cache() override { std::vector<std::size_t>().swap(argmax_); }
private:
    std::size_t window_;
    Shape in_shape_;
    std::vector<std::size_t> argmax_;
};

/// Averages each channel into exactly `bins` bins, bin i spanning
/// [floor(i L / bins), ceil((i + 1) L / bins)).
class AdaptiveAvgPool1d final : public Layer {
public:
    explicit AdaptiveAvgPool1d(std::size_t bins = 4) : bins_(bins) {}

    LayerKind kind() const override { return LayerKind::adaptive_avg_pool; }
    std::string describe() const override;
    FeatureShape output_shape(FeatureShape in) const override;
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    std::size_t bins_;
    Shape in_shape_;
};

/// (B, C, L) -> (B, C * L, 1).
class Flatten final : public Layer {
public:
    LayerKind kind() const override { return LayerKind::flatten; }
    std::string describe() const override { return "Flatten"; }
    FeatureShape output_shape(FeatureShape in) const override { return {in.channels * in.length, 1}; }
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    Shape in_shape_;
};

/// y = W x + b on flattened features.
class Dense final : public Layer {
public:
    Dense(std::size_t in_features, std::size_t out_features);

    void init(Rng& rng);

    LayerKind kind() const override { return LayerKind::dense; }
    std::string describe() const override;
    FeatureShape output_shape(FeatureShape in) const override;
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<ParamView> parameters() override;

    std::span<double> weight() { return weight_; }
    std::span<double> bias() { return bias_; }

    void release_cache() override { input_ = Tensor(); }
private:
    std::size_t in_, out_;
    AlignedVector weight_, bias_, grad_weight_, grad_bias_;
    Tensor input_;
};

/// Adapter exposing a TfConvLayer to the model; its only parameters are the
/// kernel control parameters, which are clamped to their box by project().
class TfConv final : public Layer {
public:
    explicit TfConv(TfConvLayer layer);

    LayerKind kind() const override { return LayerKind::tfconv; }
    std::string describe() const override;
    FeatureShape output_shape(FeatureShape in) const override;
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<ParamView> parameters() override;
    void project() override { clamp_in_place(layer_.params); }

    const TfConvLayer& layer() const { return layer_; }
    TfConvLayer& layer() { return layer_; }

    void release_cache() override { cache_ = TfConvCache(); }
private:
    TfConvLayer layer_;
    AlignedVector grad_;
    TfConvCache cache_;
};

/// y = body(x) + x; the body must preserve the feature shape.
class Residual final : public Layer {
public:
    explicit Residual(std::vector<LayerPtr> body);

    LayerKind kind() const override { return LayerKind::residual; }
    std::string describe() const override;
    FeatureShape output_shape(FeatureShape in) const override;
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<ParamView> parameters() override;
    std::vector<BufferView> buffers() override;

    const std::vector<LayerPtr>& body() const { return body_; }

    void release_cache() override;
private:
    std::vector<LayerPtr> body_;
};

}  // namespace tfn::nn
