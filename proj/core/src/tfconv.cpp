#include "tfn/tfconv.hpp"

#include <cmath>
#include <stdexcept>

#include "linalg.hpp"

namespace tfn {
namespace {

using detail::RowMatrix;

// Kernel bank: rows (Re psi_0, Im psi_0, Re psi_1, ...) with modulus, or
// (Re psi_0, Re psi_1, ...) without.
RowMatrix kernel_bank(const TfConvLayer& layer) {
    const std::size_t n = layer.grid().length;
    const std::size_t rows_per = layer.modulus ? 2 : 1;
    RowMatrix bank(static_cast<Eigen::Index>(rows_per * layer.n_channels()), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < layer.n_channels(); ++k) {
        const ComplexSeq psi = evaluate_kernel(layer.params.family, layer.params.channel(k), layer.grid());
        for (std::size_t m = 0; m < n; ++m) {
            bank(static_cast<Eigen::Index>(rows_per * k), static_cast<Eigen::Index>(m)) = psi[m].real();
            if (layer.modulus) {
                bank(static_cast<Eigen::Index>(2 * k + 1), static_cast<Eigen::Index>(m)) = psi[m].imag();
            }
        }
    }
    return bank;
}

}  // namespace

TfConvLayer make_tfconv(KernelFamily family, std::size_t n_channels, std::uint64_t seed, bool modulus) {
    TfConvLayer layer;
    layer.params = init_params(family, n_channels, seed);
    layer.modulus = modulus;
    return layer;
}

std::pair<Tensor, TfConvCache> tfconv_forward(const TfConvLayer& layer, const Tensor& x) {
    if (x.channels() != 1) {
        throw std::invalid_argument("tfconv_forward: expected a single input channel, got " +
                                    std::to_string(x.channels()));
    }
    if (!x.all_finite()) throw std::invalid_argument("tfconv_forward: non-finite input");
    if (!(layer.eps_modulus > 0.0)) throw std::invalid_argument("tfconv_forward: eps_modulus must be positive");

    const std::size_t batch = x.batch();
    const std::size_t len = x.length();
    const std::size_t channels = layer.n_channels();
    const std::size_t taps = layer.grid().length;
    const RowMatrix bank = kernel_bank(layer);

    TfConvCache cache;
    cache.input = x;
    cache.h_real = Tensor(batch, channels, len);
    if (layer.modulus) cache.h_img = Tensor(batch, channels, len);
    Tensor out(batch, channels, len);

    RowMatrix cols;
    RowMatrix resp(bank.rows(), static_cast<Eigen::Index>(len));
    for (std::size_t b = 0; b < batch; ++b) {
        detail::im2col(x.sample(b).data(), 1, len, taps, (taps - 1) / 2, len, cols);
        resp.noalias() = bank * cols;
        for (std::size_t k = 0; k < channels; ++k) {
            auto re_row = cache.h_real.row(b, k);
            auto h_row = out.row(b, k);
            if (layer.modulus) {
                auto im_row = cache.h_img.row(b, k);
                for (std::size_t t = 0; t < len; ++t) {
                    const double re = resp(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(t));
                    const double im = resp(static_cast<Eigen::Index>(2 * k + 1), static_cast<Eigen::Index>(t));
                    re_row[t] = re;
                    im_row[t] = im;
                    h_row[t] = std::sqrt(re * re + im * im + layer.eps_modulus);
                }
            } else {
                for (std::size_t t = 0; t < len; ++t) {
                    re_row[t] = h_row[t] = resp(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
                }
            }
        }
    }
    cache.h = out;
    return {std::move(out), std::move(cache)};
}

TfConvGradients tfconv_backward(const TfConvLayer& layer, const TfConvCache& cache, const Tensor& grad_out) {
    if (!(grad_out.shape() == cache.h.shape())) {
        throw std::invalid_argument("tfconv_backward: grad_out shape " + to_string(grad_out.shape()) +
                                    " does not match output shape " + to_string(cache.h.shape()));
    }
    const std::size_t batch = grad_out.batch();
    const std::size_t len = grad_out.length();
    const std::size_t channels = layer.n_channels();
    const std::size_t taps = layer.grid().length;
    const std::size_t rows_per = layer.modulus ? 2 : 1;
    const RowMatrix bank = kernel_bank(layer);

    TfConvGradients grads;
    grads.grad_input = Tensor(batch, 1, len);
    RowMatrix grad_bank = RowMatrix::Zero(bank.rows(), bank.cols());

    RowMatrix cols;
    RowMatrix g(bank.rows(), static_cast<Eigen::Index>(len));
    RowMatrix dcols;
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t k = 0; k < channels; ++k) {
            auto go = grad_out.row(b, k);
            auto re = cache.h_real.row(b, k);
            if (layer.modulus) {
                auto im = cache.h_img.row(b, k);
                auto h = cache.h.row(b, k);
                for (std::size_t t = 0; t < len; ++t) {
                    g(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(t)) = go[t] * re[t] / h[t];
                    g(static_cast<Eigen::Index>(2 * k + 1), static_cast<Eigen::Index>(t)) = go[t] * im[t] / h[t];
                }
            } else {
                for (std::size_t t = 0; t < len; ++t) g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = go[t];
            }
        }
        detail::im2col(cache.input.sample(b).data(), 1, len, taps, (taps - 1) / 2, len, cols);
        grad_bank.noalias() += g * cols.transpose();
        dcols.noalias() = bank.transpose() * g;
        detail::col2im_add(dcols, 1, len, taps, (taps - 1) / 2, grads.grad_input.sample(b).data());
    }

    const std::size_t per = layer.params.per_channel();
    grads.grad_theta.assign(layer.params.values.size(), 0.0);
    for (std::size_t k = 0; k < channels; ++k) {
        const auto dpsi = kernel_param_grad(layer.params.family, layer.params.channel(k), layer.grid());
        for (std::size_t p = 0; p < per; ++p) {
            double acc = 0.0;
            for (std::size_t m = 0; m < taps; ++m) {
                const auto mi = static_cast<Eigen::Index>(m);
                acc += grad_bank(static_cast<Eigen::Index>(rows_per * k), mi) * dpsi[p][m].real();
                if (layer.modulus) acc += grad_bank(static_cast<Eigen::Index>(2 * k + 1), mi) * dpsi[p][m].imag();
            }
            grads.grad_theta[k * per + p] = acc;
        }
    }
    return grads;
}

std::vector<ComplexSeq> reference_tft(std::span<const double> x, KernelFamily family,
                                      std::span<const std::vector<double>> thetas, const KernelGrid& grid) {
    if (x.size() < grid.length) {
        throw std::invalid_argument("reference_tft: signal length " + std::to_string(x.size()) +
                                    " is shorter than the kernel grid (" + std::to_string(grid.length) + ")");
    }
    std::vector<ComplexSeq> rows;
    rows.reserve(thetas.size());
    for (const auto& theta : thetas) {
        const ComplexSeq psi = evaluate_kernel(family, theta, grid);
        rows.push_back(cross_correlate_same(x, psi));
    }
    return rows;
}

}  // namespace tfn
