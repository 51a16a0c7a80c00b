#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfn/core_math.hpp"

namespace tfn {

/// Kernel function families of the TFconv layer. `random` carries raw tap
/// weights and is only used by the random-kernel ablation.
enum class KernelFamily { sttf, chirplet, morlet, laplace, random };

std::string_view to_string(KernelFamily family);
/// Accepts the names printed by to_string(); throws std::invalid_argument otherwise.
KernelFamily parse_kernel_family(std::string_view name);

/// Discrete time indices n = first, first + 1, ..., first + length - 1.
struct KernelGrid {
    int first = 0;
    std::size_t length = 0;

    int index(std::size_t i) const { return first + static_cast<int>(i); }
    bool operator==(const KernelGrid&) const = default;
};

/// STTF/Chirplet: -25..25, Morlet: -150..150, Laplace: 0..150, random: -25..25.
KernelGrid grid_for(KernelFamily family);

// Box limits on the control parameters. The frequency box is closed at
// kMaxFrequency so that the half-open interval [0, 0.5) holds after projection.
inline constexpr double kMinFrequency = 0.0;
inline constexpr double kMaxFrequency = 0.5 - 1e-6;
inline constexpr double kMaxChirpRate = 0.005;
inline constexpr double kMinScale = 0.4;
inline constexpr double kMaxScale = 10.0;

// Fixed shape constants of the discrete kernel functions.
inline constexpr double kEnvelopeWidth = 10.0;
inline constexpr double kWaveletCenter = 0.2;

std::size_t params_per_channel(KernelFamily family, const KernelGrid& grid);
std::vector<std::string> param_names(KernelFamily family, const KernelGrid& grid);

/// Per-channel control parameters, stored channel-major in one flat buffer so
/// the optimizer can treat them like any other weight tensor.
struct KernelParams {
    KernelFamily family = KernelFamily::sttf;
    KernelGrid grid;
    std::size_t n_channels = 0;
    std::vector<double> values;

    std::size_t per_channel() const { return params_per_channel(family, grid); }
    std::span<const double> channel(std::size_t k) const {
        return std::span<const double>(values).subspan(k * per_channel(), per_channel());
    }
    std::span<double> channel(std::size_t k) {
        return std::span<double>(values).subspan(k * per_channel(), per_channel());
    }
};

/// Throws ConstraintError if any parameter is non-finite or outside its box.
void check_limits(KernelFamily family, std::span<const double> theta);
bool within_limits(const KernelParams& params);

/// Samples psi_theta[n] over the grid.
///   STTF:     exp(-(n/10)^2 / 2) exp(j 2 pi f n)
///   Chirplet: exp(-(n/10)^2 / 2) exp(j 2 pi (alpha/2 n^2 + f n))
///   Morlet:   s^-1/2 Psi(n/s),  Psi(m) = exp(-(m/10)^2 / 2) exp(j 2 pi 0.2 m)
///   Laplace:  as Morlet, on the one-sided grid 0..150
///   random:   theta[i] + j theta[N + i]
ComplexSeq evaluate_kernel(KernelFamily family, std::span<const double> theta, const KernelGrid& grid);

/// Analytic d psi / d theta_p for every control parameter p, same layout as
/// evaluate_kernel. For `random` each derivative is a unit tap.
std::vector<ComplexSeq> kernel_param_grad(KernelFamily family, std::span<const double> theta,
                                          const KernelGrid& grid);

/// Projects every parameter onto its closed box; total and idempotent.
KernelParams clamp_params(KernelParams params);
void clamp_in_place(KernelParams& params);

/// Channel focusing frequencies spread uniformly over the admissible band.
/// Only `random` consumes the seed.
KernelParams init_params(KernelFamily family, std::size_t n_channels, std::uint64_t seed);

/// Nominal focusing frequency of one channel (f for STTF/Chirplet, 0.2/s for wavelets).
double center_frequency(KernelFamily family, std::span<const double> theta);

}  // namespace tfn
