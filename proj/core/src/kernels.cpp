#include "tfn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tfn/errors.hpp"
#include "tfn/random.hpp"

namespace tfn {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double envelope(double m) {
    const double u = m / kEnvelopeWidth;
    return std::exp(-0.5 * u * u);
}

void check_grid(KernelFamily family, const KernelGrid& grid) {
    if (!(grid == grid_for(family))) {
        throw std::invalid_argument("kernel grid does not match family " + std::string(to_string(family)));
    }
}

void check_arity(KernelFamily family, std::span<const double> theta, const KernelGrid& grid) {
    if (theta.size() != params_per_channel(family, grid)) {
        throw std::invalid_argument("expected " + std::to_string(params_per_channel(family, grid)) +
                                    " parameters for " + std::string(to_string(family)) + ", got " +
                                    std::to_string(theta.size()));
    }
}

std::string fmt_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::sttf: return "sttf";
        case KernelFamily::chirplet: return "chirplet";
        case KernelFamily::morlet: return "morlet";
        case KernelFamily::laplace: return "laplace";
        case KernelFamily::random: return "random";
    }
    return "?";
}

KernelFamily parse_kernel_family(std::string_view name) {
    for (auto f : {KernelFamily::sttf, KernelFamily::chirplet, KernelFamily::morlet, KernelFamily::laplace,
                   KernelFamily::random}) {
        if (name == to_string(f)) return f;
    }
    throw std::invalid_argument("unknown kernel family '" + std::string(name) + "'");
}

KernelGrid grid_for(KernelFamily family) {
    switch (family) {
        case KernelFamily::sttf:
        case KernelFamily::chirplet:
        case KernelFamily::random: return {-25, 51};
        case KernelFamily::morlet: return {-150, 301};
        case KernelFamily::laplace: return {0, 151};
    }
    throw std::invalid_argument("unknown kernel family");
}

std::size_t params_per_channel(KernelFamily family, const KernelGrid& grid) {
    switch (family) {
        case KernelFamily::sttf: return 1;
        case KernelFamily::chirplet: return 2;
        case KernelFamily::morlet:
        case KernelFamily::laplace: return 1;
        case KernelFamily::random: return 2 * grid.length;
    }
    return 0;
}

std::vector<std::string> param_names(KernelFamily family, const KernelGrid& grid) {
    switch (family) {
        case KernelFamily::sttf: return {"f"};
        case KernelFamily::chirplet: return {"f", "alpha"};
        case KernelFamily::morlet:
        case KernelFamily::laplace: return {"s"};
        case KernelFamily::random: {
            std::vector<std::string> names;
            for (std::size_t i = 0; i < grid.length; ++i) names.push_back("re" + std::to_string(grid.index(i)));
            for (std::size_t i = 0; i < grid.length; ++i) names.push_back("im" + std::to_string(grid.index(i)));
            return names;
        }
    }
    return {};
}

void check_limits(KernelFamily family, std::span<const double> theta) {
    for (double v : theta) {
        if (!std::isfinite(v)) throw ConstraintError("non-finite kernel parameter");
    }
    auto require = [](bool ok, const char* name, double v, const char* box) {
        if (!ok) throw ConstraintError(std::string(name) + " = " + fmt_value(v) + " outside " + box);
    };
    switch (family) {
        case KernelFamily::chirplet:
            require(theta.size() > 1 && theta[1] >= -kMaxChirpRate && theta[1] <= kMaxChirpRate, "alpha",
                    theta.size() > 1 ? theta[1] : 0.0, "[-0.005, 0.005]");
            [[fallthrough]];
        case KernelFamily::sttf:
            require(!theta.empty() && theta[0] >= kMinFrequency && theta[0] < 0.5, "f",
                    theta.empty() ? 0.0 : theta[0], "[0, 0.5)");
            break;
        case KernelFamily::morlet:
        case KernelFamily::laplace:
            require(!theta.empty() && theta[0] >= kMinScale && theta[0] <= kMaxScale, "s",
                    theta.empty() ? 0.0 : theta[0], "[0.4, 10]");
            break;
        case KernelFamily::random: break;
    }
}

bool within_limits(const KernelParams& params) {
    for (std::size_t k = 0; k < params.n_channels; ++k) {
        try {
            check_limits(params.family, params.channel(k));
        } catch (const ConstraintError&) {
            return false;
        }
    }
    return true;
}

ComplexSeq evaluate_kernel(KernelFamily family, std::span<const double> theta, const KernelGrid& grid) {
    check_grid(family, grid);
    check_arity(family, theta, grid);
    check_limits(family, theta);

    ComplexSeq psi(grid.length);
    for (std::size_t i = 0; i < grid.length; ++i) {
        const double n = grid.index(i);
        switch (family) {
            case KernelFamily::sttf:
                psi[i] = envelope(n) * std::polar(1.0, kTwoPi * (theta[0] * n));
                break;
            case KernelFamily::chirplet:
                psi[i] = envelope(n) * std::polar(1.0, kTwoPi * (0.5 * theta[1] * n * n + theta[0] * n));
                break;
            case KernelFamily::morlet:
            case KernelFamily::laplace: {
                const double s = theta[0];
                const double m = n / s;
                psi[i] = envelope(m) * std::polar(1.0, kTwoPi * kWaveletCenter * m) / std::sqrt(s);
                break;
            }
            case KernelFamily::random:
                psi[i] = {theta[i], theta[grid.length + i]};
                break;
        }
    }
    return psi;
}

std::vector<ComplexSeq> kernel_param_grad(KernelFamily family, std::span<const double> theta,
                                          const KernelGrid& grid) {
    const ComplexSeq psi = evaluate_kernel(family, theta, grid);
    const Complex j{0.0, 1.0};
    std::vector<ComplexSeq> grads;

    switch (family) {
        case KernelFamily::sttf:
        case KernelFamily::chirplet: {
            ComplexSeq df(grid.length);
            for (std::size_t i = 0; i < grid.length; ++i) df[i] = j * (kTwoPi * grid.index(i)) * psi[i];
            grads.push_back(std::move(df));
            if (family == KernelFamily::chirplet) {
                ComplexSeq da(grid.length);
                for (std::size_t i = 0; i < grid.length; ++i) {
                    const double n = grid.index(i);
                    da[i] = j * (std::numbers::pi * n * n) * psi[i];
                }
                grads.push_back(std::move(da));
            }
            break;
        }
        case KernelFamily::morlet:
        case KernelFamily::laplace: {
            // psi_s[n] = s^-1/2 Psi(n/s):
            //   d/ds = -psi / (2s) - (n / s^2) s^-1/2 Psi'(n/s),
            //   Psi'(m) = (-m / 100 + j 2 pi 0.2) Psi(m).
            const double s = theta[0];
            ComplexSeq ds(grid.length);
            for (std::size_t i = 0; i < grid.length; ++i) {
                const double n = grid.index(i);
                const double m = n / s;
                const Complex dmother =
                    Complex{-m / (kEnvelopeWidth * kEnvelopeWidth), kTwoPi * kWaveletCenter} * psi[i];
                ds[i] = -psi[i] / (2.0 * s) - (n / (s * s)) * dmother;
            }
            grads.push_back(std::move(ds));
            break;
        }
        case KernelFamily::random: {
            grads.assign(2 * grid.length, ComplexSeq(grid.length));
            for (std::size_t i = 0; i < grid.length; ++i) {
                grads[i][i] = {1.0, 0.0};
                grads[grid.length + i][i] = {0.0, 1.0};
            }
            break;
        }
    }
    return grads;
}

void clamp_in_place(KernelParams& params) {
    const std::size_t p = params.per_channel();
    for (std::size_t k = 0; k < params.n_channels; ++k) {
        double* theta = params.values.data() + k * p;
        switch (params.family) {
            case KernelFamily::chirplet:
                theta[1] = std::clamp(theta[1], -kMaxChirpRate, kMaxChirpRate);
                [[fallthrough]];
            case KernelFamily::sttf:
                theta[0] = std::clamp(theta[0], kMinFrequency, kMaxFrequency);
                break;
            case KernelFamily::morlet:
            case KernelFamily::laplace:
                theta[0] = std::clamp(theta[0], kMinScale, kMaxScale);
                break;
            case KernelFamily::random: break;
        }
    }
}

KernelParams clamp_params(KernelParams params) {
    clamp_in_place(params);
    return params;
}

KernelParams init_params(KernelFamily family, std::size_t n_channels, std::uint64_t seed) {
    if (n_channels < 1) throw std::invalid_argument("init_params: n_channels must be >= 1");

    KernelParams params;
    params.family = family;
    params.grid = grid_for(family);
    params.n_channels = n_channels;
    params.values.assign(n_channels * params.per_channel(), 0.0);

    const double n = static_cast<double>(n_channels);
    switch (family) {
        case KernelFamily::sttf:
        case KernelFamily::chirplet:
            for (std::size_t i = 0; i < n_channels; ++i) {
                params.channel(i)[0] = 0.5 * (static_cast<double>(i) + 0.5) / n;
            }
            break;
        case KernelFamily::morlet:
        case KernelFamily::laplace: {
            // Center frequency 0.2 / s spread uniformly over [0.02, 0.5].
            constexpr double lo = kWaveletCenter / kMaxScale;
            constexpr double hi = kWaveletCenter / kMinScale;
            for (std::size_t i = 0; i < n_channels; ++i) {
                const double f = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / n;
                params.channel(i)[0] = kWaveletCenter / f;
            }
            break;
        }
        case KernelFamily::random: {
            Rng rng(derive_seed(seed, "tfconv.random-kernel"));
            const double bound = std::sqrt(6.0 / static_cast<double>(params.grid.length));
            for (double& v : params.values) v = rng.uniform(-bound, bound);
            break;
        }
    }
    return params;
}

double center_frequency(KernelFamily family, std::span<const double> theta) {
    switch (family) {
        case KernelFamily::sttf:
        case KernelFamily::chirplet: return theta[0];
        case KernelFamily::morlet:
        case KernelFamily::laplace: return kWaveletCenter / theta[0];
        case KernelFamily::random: break;
    }
    throw std::invalid_argument("random kernels have no nominal center frequency");
}

}  // namespace tfn
