#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tfn/core_math.hpp"
#include "tfn/kernels.hpp"
#include "tfn/tensor.hpp"

namespace tfn {

/// Time-frequency convolution: each channel correlates the input with the real
/// and imaginary parts of its kernel function and outputs the modulus
///   h = sqrt(h_real^2 + h_img^2 + eps).
/// With `modulus == false` only the real kernel is applied and h = h_real
/// (the wavelet-kernel comparison variant).
struct TfConvLayer {
    KernelParams params;
    bool modulus = true;
    double eps_modulus = 1e-12;

    std::size_t n_channels() const { return params.n_channels; }
    const KernelGrid& grid() const { return params.grid; }
};

TfConvLayer make_tfconv(KernelFamily family, std::size_t n_channels, std::uint64_t seed, bool modulus = true);

struct TfConvCache {
    Tensor input;
    Tensor h_real;
    Tensor h_img;  // empty when the layer has no modulus
    Tensor h;
};

struct TfConvGradients {
    Tensor grad_input;
    /// Same layout as KernelParams::values; summed over batch and time.
    std::vector<double> grad_theta;
};

/// x has shape (batch, 1, length); output (batch, n_channels, length), zero
/// "same" padding. Throws std::invalid_argument on non-finite input and
/// ConstraintError when a parameter is outside its box.
std::pair<Tensor, TfConvCache> tfconv_forward(const TfConvLayer& layer, const Tensor& x);

TfConvGradients tfconv_backward(const TfConvLayer& layer, const TfConvCache& cache, const Tensor& grad_out);

/// Inner-product time-frequency transform of one signal: row i is the
/// same-padded correlation of x with psi_{theta_i}. Computed with the scalar
/// correlation routines, independently of the layer's GEMM path.
std::vector<ComplexSeq> reference_tft(std::span<const double> x, KernelFamily family,
                                      std::span<const std::vector<double>> thetas, const KernelGrid& grid);

}  // namespace tfn
