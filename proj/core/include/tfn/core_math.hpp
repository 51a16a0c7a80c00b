#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tfn {

using Complex = std::complex<double>;
using ComplexSeq = std::vector<Complex>;
using Signal = std::vector<double>;

/// Forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N). Radix-2 for powers of
/// two, Bluestein's chirp-z otherwise. Throws std::invalid_argument on empty input.
ComplexSeq dft(std::span<const Complex> x);

/// Inverse DFT including the 1/N factor.
ComplexSeq idft(std::span<const Complex> x);

/// DFT of a real sequence (full spectrum).
ComplexSeq dft(std::span<const double> x);

/// out[t] = sum_m x[t + m] * k[m]; length x.size() - k.size() + 1. No kernel flip.
ComplexSeq cross_correlate_valid(std::span<const double> x, std::span<const Complex> k);

/// Zero-pads x by floor((K-1)/2) on the left and ceil((K-1)/2) on the right,
/// then correlates; the output has the same length as x.
ComplexSeq cross_correlate_same(std::span<const double> x, std::span<const Complex> k);

ComplexSeq zero_pad(std::span<const Complex> x, std::size_t target_len);

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// Magnitudes of bins 0..L/2 of the DFT of `x` zero-padded to `fft_len`.
std::vector<double> half_spectrum_magnitude(std::span<const Complex> x, std::size_t fft_len);

/// Normalized frequency axis k / fft_len for k = 0..fft_len/2.
std::vector<double> half_spectrum_freqs(std::size_t fft_len);

}  // namespace tfn
