#include "tfn/core_math.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tfn {
namespace {

// In-place iterative radix-2 transform; `sign` is -1 for forward, +1 for inverse.
void fft_pow2(std::vector<Complex>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const std::size_t half = len / 2;
        // Twiddles computed directly rather than by repeated multiplication to
        // keep the error at O(eps log N).
        std::vector<Complex> w(half);
        for (std::size_t k = 0; k < half; ++k) w[k] = std::polar(1.0, ang * static_cast<double>(k));
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + half] * w[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

std::vector<Complex> bluestein(std::span<const Complex> x, int sign) {
    const std::size_t n = x.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    // chirp[k] = exp(sign * j pi k^2 / n); k^2 reduced mod 2n to keep the angle small.
    std::vector<Complex> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = (k * k) % (2 * n);
        chirp[k] = std::polar(1.0, sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n));
    }

    std::vector<Complex> a(m), b(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

    fft_pow2(a, -1);
    fft_pow2(b, -1);
    for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_pow2(a, +1);

    std::vector<Complex> out(n);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
    return out;
}

ComplexSeq transform(std::span<const Complex> x, int sign) {
    if (x.empty()) throw std::invalid_argument("dft: empty input");
    if (is_power_of_two(x.size())) {
        std::vector<Complex> a(x.begin(), x.end());
        fft_pow2(a, sign);
        return a;
    }
    return bluestein(x, sign);
}

void check_finite(std::span<const double> x, const char* who) {
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite input");
    }
}

}  // namespace

ComplexSeq dft(std::span<const Complex> x) { return transform(x, -1); }

ComplexSeq idft(std::span<const Complex> x) {
    ComplexSeq out = transform(x, +1);
    const double scale = 1.0 / static_cast<double>(out.size());
    for (auto& v : out) v *= scale;
    return out;
}

ComplexSeq dft(std::span<const double> x) {
    std::vector<Complex> c(x.begin(), x.end());
    return transform(c, -1);
}

ComplexSeq cross_correlate_valid(std::span<const double> x, std::span<const Complex> k) {
    if (k.empty()) throw std::invalid_argument("cross_correlate_valid: empty kernel");
    if (k.size() > x.size()) {
        throw std::invalid_argument("cross_correlate_valid: kernel length " + std::to_string(k.size()) +
                                    " exceeds signal length " + std::to_string(x.size()));
    }
    check_finite(x, "cross_correlate_valid");
    const std::size_t n_out = x.size() - k.size() + 1;
    ComplexSeq out(n_out);
    for (std::size_t t = 0; t < n_out; ++t) {
        double re = 0.0, im = 0.0;
        for (std::size_t m = 0; m < k.size(); ++m) {
            re += x[t + m] * k[m].real();
            im += x[t + m] * k[m].imag();
        }
        out[t] = {re, im};
    }
    return out;
}

ComplexSeq cross_correlate_same(std::span<const double> x, std::span<const Complex> k) {
    if (x.empty()) throw std::invalid_argument("cross_correlate_same: empty signal");
    if (k.empty()) throw std::invalid_argument("cross_correlate_same: empty kernel");
    const std::size_t left = (k.size() - 1) / 2;
    const std::size_t right = k.size() - 1 - left;
    std::vector<double> padded(left + x.size() + right, 0.0);
    std::copy(x.begin(), x.end(), padded.begin() + static_cast<std::ptrdiff_t>(left));
    return cross_correlate_valid(padded, k);
}

ComplexSeq zero_pad(std::span<const Complex> x, std::size_t target_len) {
    if (target_len < x.size()) {
        throw std::invalid_argument("zero_pad: target length " + std::to_string(target_len) +
                                    " is shorter than input length " + std::to_string(x.size()));
    }
    ComplexSeq out(target_len, Complex{0.0, 0.0});
    std::copy(x.begin(), x.end(), out.begin());
    return out;
}

std::vector<double> half_spectrum_magnitude(std::span<const Complex> x, std::size_t fft_len) {
    const ComplexSeq spectrum = dft(zero_pad(x, fft_len));
    std::vector<double> mag(fft_len / 2 + 1);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(spectrum[k]);
    return mag;
}

std::vector<double> half_spectrum_freqs(std::size_t fft_len) {
    std::vector<double> f(fft_len / 2 + 1);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = static_cast<double>(k) / static_cast<double>(fft_len);
    return f;
}

}  // namespace tfn
