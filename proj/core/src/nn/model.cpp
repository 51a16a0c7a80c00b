#include "tfn/nn/model.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace tfn::nn {
namespace {

class Builder {
public:
    explicit Builder(std::uint64_t seed) : rng_(derive_seed(seed, "model.init")) {}

    void conv(std::size_t in, std::size_t out, std::size_t k, std::size_t pad = 0) {
        auto c = std::make_unique<Conv1d>(in, out, k, pad);
        c->init(rng_);
        layers_.push_back(std::move(c));
    }
    void dense(std::size_t in, std::size_t out) {
        auto d = std::make_unique<Dense>(in, out);
        d->init(rng_);
        layers_.push_back(std::move(d));
    }
    void add(LayerPtr l) { layers_.push_back(std::move(l)); }
    void end_unit() { unit_ends_.push_back(layers_.size()); }
    Rng& rng() { return rng_; }

    std::vector<LayerPtr> layers_;
    std::vector<std::size_t> unit_ends_;

private:
    Rng rng_;
};

// Either a fresh Conv or the replacing TFconv as the first layer; returns its
// output channel count.
std::size_t first_layer(Builder& b, std::size_t in, std::size_t out, std::size_t k,
                        std::optional<TfConvLayer>& replacement) {
    if (replacement) {
        const std::size_t c = replacement->n_channels();
        b.add(std::make_unique<TfConv>(std::move(*replacement)));
        replacement.reset();
        return c;
    }
    b.conv(in, out, k);
    return out;
}

void paper_head(Builder& b, std::size_t features, std::size_t n_classes) {
    b.add(std::make_unique<Flatten>());
    b.end_unit();
    b.dense(features, 256);
    b.add(std::make_unique<ReLU>());
    b.dense(256, 64);
    b.add(std::make_unique<ReLU>());
    b.dense(64, n_classes);
    b.end_unit();
}

void conv_bn_relu(Builder& b, std::size_t in, std::size_t out, std::size_t k, std::size_t pad = 0) {
    b.conv(in, out, k, pad);
    b.add(std::make_unique<BatchNorm1d>(out));
    b.add(std::make_unique<ReLU>());
}

void build_paper_cnn(Builder& b, std::size_t in, std::size_t n_classes, bool residual,
                     std::optional<TfConvLayer>& replacement) {
    const std::size_t c1 = first_layer(b, in, 16, 15, replacement);
    b.add(std::make_unique<BatchNorm1d>(c1));
    b.add(std::make_unique<ReLU>());
    b.end_unit();
    conv_bn_relu(b, c1, 32, 3);
    b.add(std::make_unique<MaxPool1d>(2));
    b.end_unit();
    conv_bn_relu(b, 32, 64, 3);
    b.end_unit();
    if (residual) {
        for (int block = 0; block < 2; ++block) {
            std::vector<LayerPtr> body;
            auto conv_a = std::make_unique<Conv1d>(64, 64, 3, 1);
            conv_a->init(b.rng());
            body.push_back(std::move(conv_a));
            body.push_back(std::make_unique<BatchNorm1d>(64));
            body.push_back(std::make_unique<ReLU>());
            auto conv_b = std::make_unique<Conv1d>(64, 64, 3, 1);
            conv_b->init(b.rng());
            body.push_back(std::move(conv_b));
            body.push_back(std::make_unique<BatchNorm1d>(64));
            b.add(std::make_unique<Residual>(std::move(body)));
            b.add(std::make_unique<ReLU>());
            b.end_unit();
        }
    }
    conv_bn_relu(b, 64, 128, 3);
    b.add(std::make_unique<AdaptiveAvgPool1d>(4));
    b.end_unit();
    paper_head(b, 128 * 4, n_classes);
}

void build_lenet(Builder& b, std::size_t in, std::size_t n_classes, std::size_t input_length,
                 std::optional<TfConvLayer>& replacement) {
    const bool replaced = replacement.has_value();
    const std::size_t c1 = first_layer(b, in, 6, 5, replacement);
    b.add(std::make_unique<ReLU>());
    b.add(std::make_unique<MaxPool1d>(2));
    b.end_unit();
    b.conv(c1, 16, 5);
    b.add(std::make_unique<ReLU>());
    b.add(std::make_unique<MaxPool1d>(2));
    b.add(std::make_unique<AdaptiveAvgPool1d>(25));
    b.end_unit();
    std::size_t len = replaced ? input_length : input_length - 4;
    len /= 2;
    if (len < 54) throw std::invalid_argument("lenet-1d: input length " + std::to_string(input_length) + " too short");
    b.add(std::make_unique<Flatten>());
    b.end_unit();
    b.dense(16 * 25, 120);
    b.add(std::make_unique<ReLU>());
    b.dense(120, 84);
    b.add(std::make_unique<ReLU>());
    b.dense(84, n_classes);
    b.end_unit();
}

// Per-sample z-score; constant samples map to zero.
void standardize(Tensor& h) {
    for (std::size_t b = 0; b < h.batch(); ++b) {
        auto s = h.sample(b);
        double mean = 0.0;
        for (double v : s) mean += v;
        mean /= static_cast<double>(s.size());
        double var = 0.0;
        for (double v : s) var += (v - mean) * (v - mean);
        var /= static_cast<double>(s.size());
        const double inv = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
        for (double& v : s) v = (v - mean) * inv;
    }
}

Model finish(Builder& b, ModelSpec spec) {
    Model m(spec, std::move(b.layers_), std::move(b.unit_ends_));
    m.layer_shapes();  // validates the chain
    return m;
}

void build_into(Builder& b, BackboneKind kind, std::size_t n_classes, std::size_t in, std::size_t input_length,
                std::optional<TfConvLayer>& replacement) {
    switch (kind) {
        case BackboneKind::paper_cnn: build_paper_cnn(b, in, n_classes, false, replacement); break;
        case BackboneKind::resnet_1d: build_paper_cnn(b, in, n_classes, true, replacement); break;
        case BackboneKind::lenet_1d: build_lenet(b, in, n_classes, input_length, replacement); break;
    }
}

}  // namespace

std::string_view to_string(AssemblyMode mode) {
    switch (mode) {
        case AssemblyMode::backbone_only: return "backbone-only";
        case AssemblyMode::tfn_add: return "tfn-add";
        case AssemblyMode::tfn_replace: return "tfn-replace";
        case AssemblyMode::wkn_add: return "wkn-add";
        case AssemblyMode::wkn_replace: return "wkn-replace";
        case AssemblyMode::random_tfn: return "random-tfn";
    }
    return "?";
}

std::string_view to_string(BackboneKind kind) {
    switch (kind) {
        case BackboneKind::paper_cnn: return "paper-cnn";
        case BackboneKind::lenet_1d: return "lenet-1d";
        case BackboneKind::resnet_1d: return "resnet-1d";
    }
    return "?";
}

AssemblyMode parse_assembly_mode(std::string_view name) {
    for (auto m : {AssemblyMode::backbone_only, AssemblyMode::tfn_add, AssemblyMode::tfn_replace,
                   AssemblyMode::wkn_add, AssemblyMode::wkn_replace, AssemblyMode::random_tfn}) {
        if (name == to_string(m)) return m;
    }
    throw std::invalid_argument("unknown assembly mode '" + std::string(name) + "'");
}

BackboneKind parse_backbone(std::string_view name) {
    for (auto k : {BackboneKind::paper_cnn, BackboneKind::lenet_1d, BackboneKind::resnet_1d}) {
        if (name == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown backbone '" + std::string(name) + "'");
}

bool has_tfconv(AssemblyMode mode) { return mode != AssemblyMode::backbone_only; }

Model::Model(ModelSpec spec, std::vector<LayerPtr> layers, std::vector<std::size_t> unit_ends)
    : spec_(spec), layers_(std::move(layers)), unit_ends_(std::move(unit_ends)) {
    if (layers_.empty()) throw std::invalid_argument("Model: no layers");
}

Tensor Model::forward(const Tensor& x, bool training) {
    Tensor h = x;
    if (standardize_input) standardize(h);
    for (auto& l : layers_) h = l->forward(h, training);
    return h;
}

void Model::backward(const Tensor& grad_logits) {
    Tensor g = grad_logits;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

std::vector<ParamView> Model::parameters() {
    std::vector<ParamView> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        for (auto& p : layers_[i]->parameters()) {
            p.name = std::to_string(i) + "." + p.name;
            out.push_back(std::move(p));
        }
    return out;
}

std::vector<BufferView> Model::buffers() {
    std::vector<BufferView> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        for (auto& p : layers_[i]->buffers()) {
            p.name = std::to_string(i) + "." + p.name;
            out.push_back(std::move(p));
        }
    return out;
}

void Model::zero_grad() {
    for (auto& p : parameters()) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

void Model::project_constraints() {
    for (auto& l : layers_) l->project();
}

void Model::release_caches() {
    for (auto& l : layers_) l->release_cache();
}

std::size_t Model::parameter_count() {
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p.value.size();
    return n;
}

Tensor Model::features(const Tensor& x) {
    std::size_t flatten_at = layers_.size();
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (layers_[i]->kind() == LayerKind::flatten) {
            flatten_at = i;
            break;
        }
    }
    if (flatten_at == layers_.size()) throw std::invalid_argument("model has no Flatten layer");
    Tensor h = x;
    if (standardize_input) standardize(h);
    for (std::size_t i = 0; i <= flatten_at; ++i) h = layers_[i]->forward(h, false);
    return h;
}

std::vector<FeatureShape> Model::layer_shapes() const {
    std::vector<FeatureShape> shapes;
    FeatureShape s{1, spec_.input_length};
    for (const auto& l : layers_) {
        s = l->output_shape(s);
        shapes.push_back(s);
    }
    return shapes;
}

std::vector<FeatureShape> Model::unit_shapes() const {
    const auto all = layer_shapes();
    std::vector<FeatureShape> out;
    for (std::size_t end : unit_ends_) out.push_back(all.at(end - 1));
    return out;
}

TfConv* Model::tfconv() {
    return layers_.front()->kind() == LayerKind::tfconv ? static_cast<TfConv*>(layers_.front().get()) : nullptr;
}

const TfConv* Model::tfconv() const {
    return layers_.front()->kind() == LayerKind::tfconv ? static_cast<const TfConv*>(layers_.front().get())
                                                        : nullptr;
}

const Conv1d* Model::first_conv() const {
    for (const auto& l : layers_)
        if (l->kind() == LayerKind::conv1d) return static_cast<const Conv1d*>(l.get());
    return nullptr;
}

Model build_backbone(BackboneKind kind, std::size_t n_classes, std::uint64_t seed, std::size_t input_channels,
                     std::size_t input_length) {
    if (n_classes < 2) throw std::invalid_argument("build_backbone: need at least 2 classes");
    Builder b(seed);
    std::optional<TfConvLayer> none;
    build_into(b, kind, n_classes, input_channels, input_length, none);
    ModelSpec spec;
    spec.backbone = kind;
    spec.n_classes = n_classes;
    spec.input_length = input_length;
    return finish(b, spec);
}

Model assemble_model(const ModelSpec& spec, std::uint64_t seed) {
    if (spec.n_classes < 2) throw std::invalid_argument("assemble_model: need at least 2 classes");
    if (spec.mode == AssemblyMode::backbone_only) {
        Builder b(seed);
        std::optional<TfConvLayer> none;
        build_into(b, spec.backbone, spec.n_classes, 1, spec.input_length, none);
        return finish(b, spec);
    }
    const bool random_family = spec.family == KernelFamily::random;
    if ((spec.mode == AssemblyMode::random_tfn) != random_family) {
        throw std::invalid_argument("assembly mode " + std::string(to_string(spec.mode)) +
                                    " cannot use kernel family " + std::string(to_string(spec.family)));
    }
    if (spec.tfconv_channels < 1) throw std::invalid_argument("assemble_model: TFconv needs at least 1 channel");

    const bool modulus = !(spec.mode == AssemblyMode::wkn_add || spec.mode == AssemblyMode::wkn_replace);
    TfConvLayer tf = make_tfconv(spec.family, spec.tfconv_channels, derive_seed(seed, "tfconv"), modulus);

    Builder b(seed);
    std::optional<TfConvLayer> replacement;
    std::size_t backbone_in = 1;
    if (spec.mode == AssemblyMode::tfn_replace || spec.mode == AssemblyMode::wkn_replace) {
        replacement = std::move(tf);
    } else {
        backbone_in = spec.tfconv_channels;
        b.add(std::make_unique<TfConv>(std::move(tf)));
        b.end_unit();
    }
    build_into(b, spec.backbone, spec.n_classes, backbone_in, spec.input_length, replacement);
    return finish(b, spec);
}

}  // namespace tfn::nn
