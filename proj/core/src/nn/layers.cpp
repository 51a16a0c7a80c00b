#include "tfn/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "../linalg.hpp"

namespace tfn::nn {
namespace {

using detail::as_matrix;
using detail::RowMatrix;

[[noreturn]] void shape_error(const std::string& who, const std::string& what) {
    throw std::invalid_argument(who + ": " + what);
}

std::string sz(std::size_t v) { return std::to_string(v); }

// Sum of term(0..n-1) over eight interleaved partial sums. The grouping depends
// only on n, so results are reproducible, and the lanes vectorize.
template <typename F>
double lane_sum(std::size_t n, F&& term) {
    double acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (std::size_t l = 0; l < 8; ++l) acc[l] += term(i + l);
    for (std::size_t l = 0; i < n; ++i, ++l) acc[l] += term(i);
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

}  // namespace

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv1d: return "conv1d";
        case LayerKind::batch_norm: return "batch_norm";
        case LayerKind::relu: return "relu";
        case LayerKind::max_pool: return "max_pool";
        case LayerKind::adaptive_avg_pool: return "adaptive_avg_pool";
        case LayerKind::flatten: return "flatten";
        case LayerKind::dense: return "dense";
        case LayerKind::tfconv: return "tfconv";
        case LayerKind::residual: return "residual";
    }
    return "?";
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size, std::size_t padding)
    : in_(in_channels), out_(out_channels), k_(kernel_size), pad_(padding) {
    if (in_ == 0 || out_ == 0 || k_ == 0) shape_error("Conv1d", "channel counts and kernel size must be positive");
    weight_.assign(out_ * in_ * k_, 0.0);
    grad_weight_.assign(weight_.size(), 0.0);
    bias_.assign(out_, 0.0);
    grad_bias_.assign(out_, 0.0);
}

void Conv1d::init(Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in_ * k_));
    for (double& w : weight_) w = rng.uniform(-bound, bound);
    std::fill(bias_.begin(), bias_.end(), 0.0);
}

std::string Conv1d::describe() const {
    return "Conv(" + sz(out_) + "@" + sz(k_) + "x1" + (pad_ ? ", pad " + sz(pad_) : std::string()) + ")";
}

FeatureShape Conv1d::output_shape(FeatureShape in) const {
    if (in.channels != in_) {
        shape_error("Conv1d", "expected " + sz(in_) + " input channels, got " + sz(in.channels));
    }
    if (in.length + 2 * pad_ < k_) shape_error("Conv1d", "input length " + sz(in.length) + " shorter than kernel");
    return {out_, in.length + 2 * pad_ - k_ + 1};
}

Tensor Conv1d::forward(const Tensor& x, bool) {
    const FeatureShape os = output_shape({x.channels(), x.length()});
    input_ = x;
    Tensor y(x.batch(), out_, os.length);
    const auto w = as_matrix(weight_.data(), out_, in_ * k_);
    RowMatrix cols;
    for (std::size_t b = 0; b < x.batch(); ++b) {
        detail::im2col(x.sample(b).data(), in_, x.length(), k_, pad_, os.length, cols);
        auto yb = as_matrix(y.sample(b).data(), out_, os.length);
        yb.noalias() = w * cols;
        for (std::size_t o = 0; o < out_; ++o) yb.row(static_cast<Eigen::Index>(o)).array() += bias_[o];
    }
    return y;
}

Tensor Conv1d::backward(const Tensor& grad_out) {
    const std::size_t len = input_.length();
    const std::size_t out_len = grad_out.length();
    if (grad_out.batch() != input_.batch() || grad_out.channels() != out_ ||
        out_len != len + 2 * pad_ - k_ + 1) {
        shape_error("Conv1d::backward", "gradient shape " + to_string(grad_out.shape()) + " mismatch");
    }
    Tensor dx(input_.shape());
    const auto w = as_matrix(weight_.data(), out_, in_ * k_);
    auto gw = as_matrix(grad_weight_.data(), out_, in_ * k_);
    RowMatrix cols, dcols;
    for (std::size_t b = 0; b < input_.batch(); ++b) {
        const auto gy = as_matrix(grad_out.sample(b).data(), out_, out_len);
        detail::im2col(input_.sample(b).data(), in_, len, k_, pad_, out_len, cols);
        gw.noalias() += gy * cols.transpose();
        for (std::size_t o = 0; o < out_; ++o) {
            const double* row = grad_out.row(b, o).data();
            grad_bias_[o] += lane_sum(out_len, [row](std::size_t t) { return row[t]; });
        }
        dcols.noalias() = w.transpose() * gy;
        detail::col2im_add(dcols, in_, len, k_, pad_, dx.sample(b).data());
    }
    return dx;
}

std::vector<ParamView> Conv1d::parameters() {
    return {{"weight", weight_, grad_weight_, {out_, in_, k_}}, {"bias", bias_, grad_bias_, {out_}}};
}

// ---------------------------------------------------------------- BatchNorm1d

BatchNorm1d::BatchNorm1d(std::size_t channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum) {
    if (channels_ == 0) shape_error("BatchNorm1d", "channel count must be positive");
    gamma_.assign(channels_, 1.0);
    beta_.assign(channels_, 0.0);
    grad_gamma_.assign(channels_, 0.0);
    grad_beta_.assign(channels_, 0.0);
    running_mean_.assign(channels_, 0.0);
    running_var_.assign(channels_, 1.0);
    inv_std_.assign(channels_, 1.0);
}

std::string BatchNorm1d::describe() const { return "BN(" + sz(channels_) + ")"; }

FeatureShape BatchNorm1d::output_shape(FeatureShape in) const {
    if (in.channels != channels_) {
        shape_error("BatchNorm1d", "expected " + sz(channels_) + " channels, got " + sz(in.channels));
    }
    return in;
}

Tensor BatchNorm1d::forward(const Tensor& x, bool training) {
    output_shape({x.channels(), x.length()});
    const std::size_t batch = x.batch(), len = x.length();
    if (training && batch < 2) shape_error("BatchNorm1d", "training mode requires a batch of at least 2");

    Tensor y(x.shape());
    xhat_ = Tensor(x.shape());
    trained_forward_ = training;
    const double count = static_cast<double>(batch * len);
    for (std::size_t c = 0; c < channels_; ++c) {
        double mean, var;
        if (training) {
            double sum = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                const double* xr = x.row(b, c).data();
                sum += lane_sum(len, [xr](std::size_t t) { return xr[t]; });
            }
            mean = sum / count;
            double sq = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                const double* xr = x.row(b, c).data();
                sq += lane_sum(len, [xr, mean](std::size_t t) { return (xr[t] - mean) * (xr[t] - mean); });
            }
            var = sq / count;
            const double unbiased = count > 1.0 ? sq / (count - 1.0) : var;
            running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
            running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * unbiased;
        } else {
            mean = running_mean_[c];
            var = running_var_[c];
        }
        const double inv_std = 1.0 / std::sqrt(var + eps_);
        inv_std_[c] = inv_std;
        for (std::size_t b = 0; b < batch; ++b) {
            auto xr = x.row(b, c);
            auto hr = xhat_.row(b, c);
            auto yr = y.row(b, c);
            for (std::size_t t = 0; t < len; ++t) {
                hr[t] = (xr[t] - mean) * inv_std;
                yr[t] = gamma_[c] * hr[t] + beta_[c];
            }
        }
    }
    return y;
}

Tensor BatchNorm1d::backward(const Tensor& grad_out) {
    if (!(grad_out.shape() == xhat_.shape())) shape_error("BatchNorm1d::backward", "gradient shape mismatch");
    const std::size_t batch = grad_out.batch(), len = grad_out.length();
    const double count = static_cast<double>(batch * len);
    Tensor dx(grad_out.shape());
    for (std::size_t c = 0; c < channels_; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* gr = grad_out.row(b, c).data();
            const double* hr = xhat_.row(b, c).data();
            sum_dy += lane_sum(len, [gr](std::size_t t) { return gr[t]; });
            sum_dy_xhat += lane_sum(len, [gr, hr](std::size_t t) { return gr[t] * hr[t]; });
        }
        grad_beta_[c] += sum_dy;
        grad_gamma_[c] += sum_dy_xhat;
        const double scale = gamma_[c] * inv_std_[c];
        for (std::size_t b = 0; b < batch; ++b) {
            auto gr = grad_out.row(b, c);
            auto hr = xhat_.row(b, c);
            auto dr = dx.row(b, c);
            if (trained_forward_) {
                for (std::size_t t = 0; t < len; ++t) {
                    dr[t] = scale * (gr[t] - sum_dy / count - hr[t] * sum_dy_xhat / count);
                }
            } else {
                for (std::size_t t = 0; t < len; ++t) dr[t] = scale * gr[t];
            }
        }
    }
    return dx;
}

std::vector<ParamView> BatchNorm1d::parameters() {
    return {{"gamma", gamma_, grad_gamma_, {channels_}}, {"beta", beta_, grad_beta_, {channels_}}};
}

std::vector<BufferView> BatchNorm1d::buffers() {
    return {{"running_mean", running_mean_, {channels_}}, {"running_var", running_var_, {channels_}}};
}

// ---------------------------------------------------------------- ReLU

Tensor ReLU::forward(const Tensor& x, bool) {
    Tensor y = x;
    shape_ = x.shape();
    mask_.resize(y.size());
    auto v = y.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const bool on = v[i] > 0.0;
        mask_[i] = on;
        v[i] = on ? v[i] : 0.0;
    }
    return y;
}

Tensor ReLU::backward(const Tensor& grad_out) {
    if (!(grad_out.shape() == shape_)) shape_error("ReLU::backward", "gradient shape mismatch");
    Tensor dx = grad_out;
    auto d = dx.values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = mask_[i] ? d[i] : 0.0;
    return dx;
}

// ---------------------------------------------------------------- MaxPool1d

std::string MaxPool1d::describe() const { return "MaxPool(" + sz(window_) + ")"; }

FeatureShape MaxPool1d::output_shape(FeatureShape in) const {
    if (in.length < window_) shape_error("MaxPool1d", "input length " + sz(in.length) + " shorter than window");
    return {in.channels, in.length / window_};
}

Tensor MaxPool1d::forward(const Tensor& x, bool) {
    const FeatureShape os = output_shape({x.channels(), x.length()});
    in_shape_ = x.shape();
    Tensor y(x.batch(), x.channels(), os.length);
    argmax_.assign(y.size(), 0);
    std::size_t o = 0;
    for (std::size_t b = 0; b < x.batch(); ++b) {
        for (std::size_t c = 0; c < x.channels(); ++c) {
            auto xr = x.row(b, c);
            auto yr = y.row(b, c);
            for (std::size_t t = 0; t < os.length; ++t, ++o) {
                std::size_t best = t * window_;
                for (std::size_t i = best + 1; i < (t + 1) * window_; ++i)
                    if (xr[i] > xr[best]) best = i;
                yr[t] = xr[best];
                argmax_[o] = best;
            }
        }
    }
    return y;
}

Tensor MaxPool1d::backward(const Tensor& grad_out) {
    if (grad_out.size() != argmax_.size()) shape_error("MaxPool1d::backward", "gradient shape mismatch");
    Tensor dx(in_shape_);
    std::size_t o = 0;
    for (std::size_t b = 0; b < grad_out.batch(); ++b)
        for (std::size_t c = 0; c < grad_out.channels(); ++c) {
            auto gr = grad_out.row(b, c);
            auto dr = dx.row(b, c);
            for (std::size_t t = 0; t < gr.size(); ++t, ++o) dr[argmax_[o]] += gr[t];
        }
    return dx;
}

// ---------------------------------------------------------------- AdaptiveAvgPool1d

std::string AdaptiveAvgPool1d::describe() const { return "AdaptivePool(" + sz(bins_) + ")"; }

FeatureShape AdaptiveAvgPool1d::output_shape(FeatureShape in) const {
    if (in.length == 0) shape_error("AdaptiveAvgPool1d", "empty input");
    return {in.channels, bins_};
}

Tensor AdaptiveAvgPool1d::forward(const Tensor& x, bool) {
    output_shape({x.channels(), x.length()});
    in_shape_ = x.shape();
    const std::size_t len = x.length();
    Tensor y(x.batch(), x.channels(), bins_);
    for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t c = 0; c < x.channels(); ++c) {
            auto xr = x.row(b, c);
            auto yr = y.row(b, c);
            for (std::size_t i = 0; i < bins_; ++i) {
                const std::size_t lo = i * len / bins_;
                const std::size_t hi = ((i + 1) * len + bins_ - 1) / bins_;
                double s = 0.0;
                for (std::size_t t = lo; t < hi; ++t) s += xr[t];
                yr[i] = s / static_cast<double>(hi - lo);
            }
        }
    return y;
}

Tensor AdaptiveAvgPool1d::backward(const Tensor& grad_out) {
    if (grad_out.batch() != in_shape_.batch || grad_out.channels() != in_shape_.channels ||
        grad_out.length() != bins_) {
        shape_error("AdaptiveAvgPool1d::backward", "gradient shape mismatch");
    }
    const std::size_t len = in_shape_.length;
    Tensor dx(in_shape_);
    for (std::size_t b = 0; b < grad_out.batch(); ++b)
        for (std::size_t c = 0; c < grad_out.channels(); ++c) {
            auto gr = grad_out.row(b, c);
            auto dr = dx.row(b, c);
            for (std::size_t i = 0; i < bins_; ++i) {
                const std::size_t lo = i * len / bins_;
                const std::size_t hi = ((i + 1) * len + bins_ - 1) / bins_;
                const double g = gr[i] / static_cast<double>(hi - lo);
                for (std::size_t t = lo; t < hi; ++t) dr[t] += g;
            }
        }
    return dx;
}

// ---------------------------------------------------------------- Flatten

Tensor Flatten::forward(const Tensor& x, bool) {
    in_shape_ = x.shape();
    Tensor y = x;
    y.reshape({x.batch(), x.channels() * x.length(), 1});
    return y;
}

Tensor Flatten::backward(const Tensor& grad_out) {
    Tensor dx = grad_out;
    dx.reshape(in_shape_);
    return dx;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_features, std::size_t out_features) : in_(in_features), out_(out_features) {
    if (in_ == 0 || out_ == 0) shape_error("Dense", "feature counts must be positive");
    weight_.assign(out_ * in_, 0.0);
    grad_weight_.assign(weight_.size(), 0.0);
    bias_.assign(out_, 0.0);
    grad_bias_.assign(out_, 0.0);
}

void Dense::init(Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in_));
    for (double& w : weight_) w = rng.uniform(-bound, bound);
    std::fill(bias_.begin(), bias_.end(), 0.0);
}

std::string Dense::describe() const { return "Dense(" + sz(in_) + "->" + sz(out_) + ")"; }

FeatureShape Dense::output_shape(FeatureShape in) const {
    if (in.channels * in.length != in_) {
        shape_error("Dense", "expected " + sz(in_) + " features, got " + sz(in.channels * in.length));
    }
    return {out_, 1};
}

Tensor Dense::forward(const Tensor& x, bool) {
    output_shape({x.channels(), x.length()});
    input_ = x;
    Tensor y(x.batch(), out_, 1);
    const auto xm = as_matrix(x.data(), x.batch(), in_);
    const auto w = as_matrix(weight_.data(), out_, in_);
    auto ym = as_matrix(y.data(), x.batch(), out_);
    ym.noalias() = xm * w.transpose();
    for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t o = 0; o < out_; ++o) ym(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(o)) += bias_[o];
    return y;
}

Tensor Dense::backward(const Tensor& grad_out) {
    if (grad_out.batch() != input_.batch() || grad_out.channels() * grad_out.length() != out_) {
        shape_error("Dense::backward", "gradient shape mismatch");
    }
    const std::size_t batch = input_.batch();
    const auto gy = as_matrix(grad_out.data(), batch, out_);
    const auto xm = as_matrix(input_.data(), batch, in_);
    const auto w = as_matrix(weight_.data(), out_, in_);
    auto gw = as_matrix(grad_weight_.data(), out_, in_);
    gw.noalias() += gy.transpose() * xm;
    for (std::size_t o = 0; o < out_; ++o) {
        const double* g = grad_out.data() + o;
        grad_bias_[o] += lane_sum(batch, [g, this](std::size_t b) { return g[b * out_]; });
    }
    Tensor dx(input_.shape());
    auto dxm = as_matrix(dx.data(), batch, in_);
    dxm.noalias() = gy * w;
    return dx;
}

std::vector<ParamView> Dense::parameters() {
    return {{"weight", weight_, grad_weight_, {out_, in_}}, {"bias", bias_, grad_bias_, {out_}}};
}

// ---------------------------------------------------------------- TfConv

TfConv::TfConv(TfConvLayer layer) : layer_(std::move(layer)), grad_(layer_.params.values.size(), 0.0) {}

std::string TfConv::describe() const {
    return std::string(layer_.modulus ? "TFconv(" : "WKconv(") + sz(layer_.n_channels()) + "@" +
           sz(layer_.grid().length) + "x1, " + std::string(to_string(layer_.params.family)) + ")";
}

FeatureShape TfConv::output_shape(FeatureShape in) const {
    if (in.channels != 1) shape_error("TfConv", "expected 1 input channel, got " + sz(in.channels));
    return {layer_.n_channels(), in.length};
}

Tensor TfConv::forward(const Tensor& x, bool) {
    auto [y, cache] = tfconv_forward(layer_, x);
    cache_ = std::move(cache);
    return y;
}

Tensor TfConv::backward(const Tensor& grad_out) {
    TfConvGradients g = tfconv_backward(layer_, cache_, grad_out);
    for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] += g.grad_theta[i];
    return std::move(g.grad_input);
}

std::vector<ParamView> TfConv::parameters() {
    return {{"theta", layer_.params.values, grad_, {layer_.n_channels(), layer_.params.per_channel()}}};
}

// ---------------------------------------------------------------- Residual

Residual::Residual(std::vector<LayerPtr> body) : body_(std::move(body)) {
    if (body_.empty()) shape_error("Residual", "empty body");
}

std::string Residual::describe() const {
    std::string s = "Residual[";
    for (std::size_t i = 0; i < body_.size(); ++i) s += (i ? "-" : "") + body_[i]->describe();
    return s + "]";
}

FeatureShape Residual::output_shape(FeatureShape in) const {
    FeatureShape s = in;
    for (const auto& l : body_) s = l->output_shape(s);
    if (!(s == in)) shape_error("Residual", "body does not preserve the feature shape");
    return in;
}

Tensor Residual::forward(const Tensor& x, bool training) {
    Tensor y = x;
    for (auto& l : body_) y = l->forward(y, training);
    if (!(y.shape() == x.shape())) shape_error("Residual", "body does not preserve the feature shape");
    auto yv = y.values();
    auto xv = x.values();
    for (std::size_t i = 0; i < yv.size(); ++i) yv[i] += xv[i];
    return y;
}

Tensor Residual::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    for (auto it = body_.rbegin(); it != body_.rend(); ++it) g = (*it)->backward(g);
    auto gv = g.values();
    auto ov = grad_out.values();
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += ov[i];
    return g;
}

void Residual::release_cache() {
    for (auto& l : body_) l->release_cache();
}

std::vector<ParamView> Residual::parameters() {
    std::vector<ParamView> out;
    for (std::size_t i = 0; i < body_.size(); ++i)
        for (auto& p : body_[i]->parameters()) {
            p.name = sz(i) + "." + p.name;
            out.push_back(std::move(p));
        }
    return out;
}

std::vector<BufferView> Residual::buffers() {
    std::vector<BufferView> out;
    for (std::size_t i = 0; i < body_.size(); ++i)
        for (auto& p : body_[i]->buffers()) {
            p.name = sz(i) + "." + p.name;
            out.push_back(std::move(p));
        }
    return out;
}

}  // namespace tfn::nn
