#pragma once

#include <cstddef>
#include <cstring>

#include <Eigen/Core>

namespace tfn::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

inline MatrixMap as_matrix(double* p, std::size_t rows, std::size_t cols) {
    return {p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}
inline ConstMatrixMap as_matrix(const double* p, std::size_t rows, std::size_t cols) {
    return {p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

// Valid range of output positions t for which t + shift lies in [0, len).
inline void overlap_range(std::ptrdiff_t shift, std::size_t len, std::size_t out_len, std::size_t& t0,
                          std::size_t& t1) {
    const auto slen = static_cast<std::ptrdiff_t>(len);
    std::ptrdiff_t lo = shift < 0 ? -shift : 0;
    std::ptrdiff_t hi = slen - shift;
    if (hi > static_cast<std::ptrdiff_t>(out_len)) hi = static_cast<std::ptrdiff_t>(out_len);
    if (hi < lo) hi = lo;
    t0 = static_cast<std::size_t>(lo);
    t1 = static_cast<std::size_t>(hi);
}

/// cols(c * taps + m, t) = x[c][t + m - pad_left] (zero outside the signal).
/// x is channel-major with `len` samples per channel.
inline void im2col(const double* x, std::size_t channels, std::size_t len, std::size_t taps, std::size_t pad_left,
                   std::size_t out_len, RowMatrix& cols) {
    cols.resize(static_cast<Eigen::Index>(channels * taps), static_cast<Eigen::Index>(out_len));
    for (std::size_t c = 0; c < channels; ++c) {
        const double* xc = x + c * len;
        for (std::size_t m = 0; m < taps; ++m) {
            double* dst = cols.data() + (c * taps + m) * out_len;
            const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(m) - static_cast<std::ptrdiff_t>(pad_left);
            std::size_t t0, t1;
            overlap_range(shift, len, out_len, t0, t1);
            if (t0 > 0) std::memset(dst, 0, t0 * sizeof(double));
            if (t1 > t0) std::memcpy(dst + t0, xc + static_cast<std::ptrdiff_t>(t0) + shift, (t1 - t0) * sizeof(double));
            if (out_len > t1) std::memset(dst + t1, 0, (out_len - t1) * sizeof(double));
        }
    }
}

/// Adjoint of im2col: scatters column gradients back onto dx.
inline void col2im_add(const RowMatrix& dcols, std::size_t channels, std::size_t len, std::size_t taps,
                       std::size_t pad_left, double* dx) {
    const std::size_t out_len = static_cast<std::size_t>(dcols.cols());
    for (std::size_t c = 0; c < channels; ++c) {
        double* dxc = dx + c * len;
        for (std::size_t m = 0; m < taps; ++m) {
            const double* src = dcols.data() + (c * taps + m) * out_len;
            const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(m) - static_cast<std::ptrdiff_t>(pad_left);
            std::size_t t0, t1;
            overlap_range(shift, len, out_len, t0, t1);
            double* dst = dxc + static_cast<std::ptrdiff_t>(t0) + shift;
            for (std::size_t t = t0; t < t1; ++t) *dst++ += src[t];
        }
    }
}

}  // namespace tfn::detail
