#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tfn/kernels.hpp"
#include "tfn/nn/layers.hpp"

namespace tfn::nn {

enum class AssemblyMode { backbone_only, tfn_add, tfn_replace, wkn_add, wkn_replace, random_tfn };
enum class BackboneKind { paper_cnn, lenet_1d, resnet_1d };

std::string_view to_string(AssemblyMode mode);
std::string_view to_string(BackboneKind kind);
AssemblyMode parse_assembly_mode(std::string_view name);
BackboneKind parse_backbone(std::string_view name);

/// Whether the mode puts a TFconv (or its real-only variant) in front.
bool has_tfconv(AssemblyMode mode);

/// Everything needed to rebuild a model's architecture.
struct ModelSpec {
    AssemblyMode mode = AssemblyMode::backbone_only;
    BackboneKind backbone = BackboneKind::paper_cnn;
    std::size_t n_classes = 5;
    KernelFamily family = KernelFamily::sttf;
    std::size_t tfconv_channels = 8;
    std::size_t input_length = 1024;

    bool operator==(const ModelSpec&) const = default;
};

class Model {
public:
    Model(ModelSpec spec, std::vector<LayerPtr> layers, std::vector<std::size_t> unit_ends);

    const ModelSpec& spec() const { return spec_; }
    std::size_t size() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }
    const Layer& layer(std::size_t i) const { return *layers_[i]; }

    /// Input (batch, 1, length). Each sample is z-scored first when
    /// `standardize_input` is set.
    Tensor forward(const Tensor& x, bool training);
    /// Backpropagates dL/dlogits through every layer, accumulating gradients.
    void backward(const Tensor& grad_logits);

    std::vector<ParamView> parameters();
    std::vector<BufferView> buffers();
    void zero_grad();
    void project_constraints();
    /// Drops every layer's backward cache (see Layer::release_cache).
    void release_caches();
    std::size_t parameter_count();

    /// Inference-mode activations at the Flatten output. Throws
    /// std::invalid_argument if the model has no Flatten layer.
    Tensor features(const Tensor& x);

    /// Per-sample output shape after each layer for the configured input length.
    std::vector<FeatureShape> layer_shapes() const;
    /// Output shapes at the end of each architectural unit (a TFconv layer, a
    /// Conv-BN-ReLU[-Pool] group, Flatten, the dense head).
    std::vector<FeatureShape> unit_shapes() const;

    /// First layer's TFconv adapter, if the model starts with one.
    TfConv* tfconv();
    const TfConv* tfconv() const;
    /// First plain convolution in the model, if any.
    const Conv1d* first_conv() const;

    bool standardize_input = true;

private:
    ModelSpec spec_;
    std::vector<LayerPtr> layers_;
    std::vector<std::size_t> unit_ends_;
};

/// The plain backbone CNN. paper-cnn:
///   Conv(16@15)-BN-ReLU | Conv(32@3)-BN-ReLU-MaxPool(2) | Conv(64@3)-BN-ReLU |
///   Conv(128@3)-BN-ReLU-AdaptivePool(4) | Flatten | Dense 512-256-64-n
/// lenet-1d:
///   Conv(6@5)-ReLU-MaxPool(2) | Conv(16@5)-ReLU-MaxPool(2)-AdaptivePool(25) | Flatten |
///   Dense 120-84-n
/// resnet-1d: paper-cnn with two identity-skip blocks
///   [Conv(64@3)-BN-ReLU-Conv(64@3)-BN]-ReLU after the 64-channel unit.
Model build_backbone(BackboneKind kind, std::size_t n_classes, std::uint64_t seed = 0,
                     std::size_t input_channels = 1, std::size_t input_length = 1024);

/// Builds the model for an assembly mode:
///   backbone-only  the backbone as is
///   tfn-add        TFconv prepended, backbone input channels = TFconv channels
///   tfn-replace    the first Conv replaced by TFconv (its BN is kept)
///   wkn-add/-replace  as above with the real-only, no-modulus layer
///   random-tfn     tfn-add with a trainable random-tap kernel (family must be random)
/// Throws std::invalid_argument for an invalid mode/family combination.
Model assemble_model(const ModelSpec& spec, std::uint64_t seed);

}  // namespace tfn::nn
