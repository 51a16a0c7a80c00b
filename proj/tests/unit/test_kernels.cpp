#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "tfn/errors.hpp"
#include "tfn/kernels.hpp"
#include "tfn/random.hpp"

using namespace tfn;

namespace {

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<double> random_theta(KernelFamily family, Rng& rng) {
    switch (family) {
        case KernelFamily::sttf: return {rng.uniform(0.0, kMaxFrequency)};
        case KernelFamily::chirplet:
            return {rng.uniform(0.0, kMaxFrequency), rng.uniform(-kMaxChirpRate, kMaxChirpRate)};
        case KernelFamily::morlet:
        case KernelFamily::laplace: return {rng.uniform(kMinScale, kMaxScale)};
        case KernelFamily::random: {
            std::vector<double> t(2 * grid_for(family).length);
            for (auto& v : t) v = rng.uniform(-0.3, 0.3);
            return t;
        }
    }
    return {};
}

constexpr KernelFamily kFamilies[] = {KernelFamily::sttf, KernelFamily::chirplet, KernelFamily::morlet,
                                      KernelFamily::laplace};

}  // namespace

TEST(Kernels, GridsAndNames) {
    EXPECT_EQ(grid_for(KernelFamily::sttf), (KernelGrid{-25, 51}));
    EXPECT_EQ(grid_for(KernelFamily::chirplet), (KernelGrid{-25, 51}));
    EXPECT_EQ(grid_for(KernelFamily::morlet), (KernelGrid{-150, 301}));
    EXPECT_EQ(grid_for(KernelFamily::laplace), (KernelGrid{0, 151}));
    for (auto f : {KernelFamily::sttf, KernelFamily::chirplet, KernelFamily::morlet, KernelFamily::laplace,
                   KernelFamily::random})
        EXPECT_EQ(parse_kernel_family(to_string(f)), f);
    EXPECT_THROW(parse_kernel_family("gabor"), std::invalid_argument);
}

TEST(Kernels, SttfZeroFrequencyIsRealWithUnitCenter) {
    const auto g = grid_for(KernelFamily::sttf);
    const auto k = evaluate_kernel(KernelFamily::sttf, std::vector<double>{0.0}, g);
    EXPECT_EQ(k[25], Complex(1.0, 0.0));
    for (const auto& v : k) EXPECT_EQ(v.imag(), 0.0);
}

TEST(Kernels, ChirpletWithZeroRateEqualsSttfBitForBit) {
    const auto g = grid_for(KernelFamily::sttf);
    for (double f : {0.0, 0.1, 0.2, 0.37, kMaxFrequency}) {
        const auto a = evaluate_kernel(KernelFamily::sttf, std::vector<double>{f}, g);
        const auto b = evaluate_kernel(KernelFamily::chirplet, std::vector<double>{f, 0.0}, g);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].real(), b[i].real());
            EXPECT_EQ(a[i].imag(), b[i].imag());
        }
    }
}

TEST(Kernels, MorletCenterSample) {
    const auto g = grid_for(KernelFamily::morlet);
    const auto k = evaluate_kernel(KernelFamily::morlet, std::vector<double>{1.0}, g);
    EXPECT_EQ(k[150], Complex(1.0, 0.0));
}

TEST(Kernels, MorletScaleTwoHalvesPeakFrequency) {
    const auto g = grid_for(KernelFamily::morlet);
    const auto k1 = evaluate_kernel(KernelFamily::morlet, std::vector<double>{1.0}, g);
    const auto k2 = evaluate_kernel(KernelFamily::morlet, std::vector<double>{2.0}, g);
    const double f1 = argmax(half_spectrum_magnitude(k1, 1024)) / 1024.0;
    const double f2 = argmax(half_spectrum_magnitude(k2, 1024)) / 1024.0;
    EXPECT_NEAR(f1, 0.2, 1.0 / 1024);
    EXPECT_NEAR(f2, 0.1, 1.0 / 1024);
}

TEST(Kernels, SttfPeakWithinOneBin) {
    const auto g = grid_for(KernelFamily::sttf);
    for (double f : {0.1, 0.2, 0.3, 0.4}) {
        const auto k = evaluate_kernel(KernelFamily::sttf, std::vector<double>{f}, g);
        const auto mag = half_spectrum_magnitude(k, 1024);
        EXPECT_LE(std::abs(static_cast<double>(argmax(mag)) - f * 1024), 1.0) << f;
    }
}

TEST(Kernels, GlobalPeakLiesOnNonNegativeHalf) {
    Rng rng(17);
    for (auto fam : kFamilies) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto theta = random_theta(fam, rng);
            const auto k = evaluate_kernel(fam, theta, grid_for(fam));
            const auto spec = dft(zero_pad(k, 1024));
            std::vector<double> mag(spec.size());
            for (std::size_t i = 0; i < spec.size(); ++i) mag[i] = std::abs(spec[i]);
            const std::size_t peak = argmax(mag);
            // Bin 512 is the shared Nyquist bin; above it are negative frequencies.
            const double pos = *std::max_element(mag.begin(), mag.begin() + 513);
            EXPECT_GE(pos, mag[peak] * (1.0 - 1e-12)) << to_string(fam) << " theta0=" << theta[0];
        }
    }
}

TEST(Kernels, EvaluateRejectsOutOfLimitAndWrongGrid) {
    EXPECT_THROW(evaluate_kernel(KernelFamily::sttf, std::vector<double>{0.6}, grid_for(KernelFamily::sttf)),
                 ConstraintError);
    EXPECT_THROW(evaluate_kernel(KernelFamily::chirplet, std::vector<double>{0.1, 0.01},
                                 grid_for(KernelFamily::chirplet)),
                 ConstraintError);
    EXPECT_THROW(evaluate_kernel(KernelFamily::morlet, std::vector<double>{0.2}, grid_for(KernelFamily::morlet)),
                 ConstraintError);
    EXPECT_THROW(evaluate_kernel(KernelFamily::sttf, std::vector<double>{NAN}, grid_for(KernelFamily::sttf)),
                 ConstraintError);
    EXPECT_THROW(evaluate_kernel(KernelFamily::morlet, std::vector<double>{1.0}, grid_for(KernelFamily::laplace)),
                 std::invalid_argument);
    EXPECT_THROW(evaluate_kernel(KernelFamily::sttf, std::vector<double>{0.1, 0.2}, grid_for(KernelFamily::sttf)),
                 std::invalid_argument);
}

TEST(KernelGrad, SttfMatchesFiniteDifferenceAllTaps) {
    const auto g = grid_for(KernelFamily::sttf);
    std::vector<double> theta{0.1};
    const auto grad = kernel_param_grad(KernelFamily::sttf, theta, g)[0];
    for (std::size_t i = 0; i < g.length; ++i) {
        for (int part = 0; part < 2; ++part) {
            auto f = [&] {
                const auto k = evaluate_kernel(KernelFamily::sttf, theta, g)[i];
                return part == 0 ? k.real() : k.imag();
            };
            const double fd = oracle::central_difference(f, theta[0]);
            const double an = part == 0 ? grad[i].real() : grad[i].imag();
            EXPECT_LT(oracle::relative_error(an, fd, 1e-3), 1e-7) << "tap " << i;
        }
    }
    EXPECT_EQ(grad[25], Complex(0.0, 0.0));
}

TEST(KernelGrad, MorletMatchesFiniteDifference) {
    const auto g = grid_for(KernelFamily::morlet);
    std::vector<double> theta{1.5};
    const auto grad = kernel_param_grad(KernelFamily::morlet, theta, g)[0];
    for (std::size_t i = 0; i < g.length; ++i) {
        for (int part = 0; part < 2; ++part) {
            auto f = [&] {
                const auto k = evaluate_kernel(KernelFamily::morlet, theta, g)[i];
                return part == 0 ? k.real() : k.imag();
            };
            const double fd = oracle::central_difference(f, theta[0]);
            const double an = part == 0 ? grad[i].real() : grad[i].imag();
            EXPECT_LT(oracle::relative_error(an, fd, 1e-3), 1e-6) << "tap " << i;
        }
    }
}

TEST(KernelGrad, FiftyRandomThetasPerFamily) {
    Rng rng(23);
    for (auto fam : kFamilies) {
        const auto g = grid_for(fam);
        for (int trial = 0; trial < 50; ++trial) {
            auto theta = random_theta(fam, rng);
            // keep the perturbation inside the box
            if (fam == KernelFamily::sttf || fam == KernelFamily::chirplet)
                theta[0] = std::clamp(theta[0], 1e-3, kMaxFrequency - 1e-3);
            if (fam == KernelFamily::chirplet) theta[1] = std::clamp(theta[1], -0.0049, 0.0049);
            const auto grads = kernel_param_grad(fam, theta, g);
            ASSERT_EQ(grads.size(), theta.size());
            double worst = 0.0;
            for (std::size_t p = 0; p < theta.size(); ++p) {
                for (std::size_t i = 0; i < g.length; ++i) {
                    for (int part = 0; part < 2; ++part) {
                        auto f = [&] {
                            const auto k = evaluate_kernel(fam, theta, g)[i];
                            return part == 0 ? k.real() : k.imag();
                        };
                        // chirp-rate derivatives scale with n^2, so use a smaller step for alpha
                        const double h = p == 1 ? 1e-8 : 1e-6;
                        const double fd = oracle::central_difference(f, theta[p], h);
                        const double an = part == 0 ? grads[p][i].real() : grads[p][i].imag();
                        worst = std::max(worst, oracle::relative_error(an, fd, 1e-2));
                    }
                }
            }
            EXPECT_LT(worst, 1e-6) << to_string(fam) << " trial " << trial;
        }
    }
}

TEST(KernelGrad, RandomFamilyHasUnitTaps) {
    const auto g = grid_for(KernelFamily::random);
    std::vector<double> theta(2 * g.length, 0.1);
    const auto grads = kernel_param_grad(KernelFamily::random, theta, g);
    ASSERT_EQ(grads.size(), 2 * g.length);
    EXPECT_EQ(grads[3][3], Complex(1.0, 0.0));
    EXPECT_EQ(grads[g.length + 3][3], Complex(0.0, 1.0));
    EXPECT_EQ(grads[3][4], Complex(0.0, 0.0));
}

TEST(Clamp, Examples) {
    KernelParams p = init_params(KernelFamily::sttf, 3, 0);
    p.values = {0.7, 0.3, -0.1};
    const auto c = clamp_params(p);
    EXPECT_EQ(c.values[0], 0.5 - 1e-6);
    EXPECT_EQ(c.values[1], 0.3);
    EXPECT_EQ(c.values[2], 0.0);

    KernelParams s = init_params(KernelFamily::morlet, 2, 0);
    s.values = {0.1, 12.0};
    EXPECT_EQ(clamp_params(s).values, (std::vector<double>{0.4, 10.0}));

    KernelParams ch = init_params(KernelFamily::chirplet, 1, 0);
    ch.values = {0.2, -0.02};
    EXPECT_EQ(clamp_params(ch).values, (std::vector<double>{0.2, -0.005}));
}

TEST(Clamp, Idempotent) {
    Rng rng(4);
    for (auto fam : kFamilies) {
        KernelParams p = init_params(fam, 6, 0);
        for (auto& v : p.values) v = rng.uniform(-20.0, 20.0);
        const auto once = clamp_params(p);
        EXPECT_TRUE(within_limits(once));
        EXPECT_EQ(clamp_params(once).values, once.values);
    }
}

TEST(Init, SttfUniformGrid) {
    const auto p = init_params(KernelFamily::sttf, 8, 0);
    ASSERT_EQ(p.values.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(p.values[i], 0.5 * (i + 0.5) / 8.0);
    EXPECT_DOUBLE_EQ(p.values.front(), 0.03125);
    EXPECT_DOUBLE_EQ(p.values.back(), 0.46875);
}

TEST(Init, ChirpletStartsWithZeroRate) {
    const auto p = init_params(KernelFamily::chirplet, 4, 0);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(p.channel(c)[1], 0.0);
}

TEST(Init, MorletSingleChannelAtBandMidpoint) {
    const auto p = init_params(KernelFamily::morlet, 1, 0);
    EXPECT_NEAR(p.values[0], 0.2 / 0.26, 1e-12);
    EXPECT_NEAR(center_frequency(KernelFamily::morlet, p.channel(0)), 0.26, 1e-12);
}

TEST(Init, DeterministicAndValid) {
    for (auto fam : {KernelFamily::sttf, KernelFamily::chirplet, KernelFamily::morlet, KernelFamily::laplace,
                     KernelFamily::random}) {
        const auto a = init_params(fam, 8, 99);
        const auto b = init_params(fam, 8, 99);
        EXPECT_EQ(a.values, b.values);
        EXPECT_TRUE(within_limits(a));
    }
    const auto r = init_params(KernelFamily::random, 2, 5);
    const double bound = std::sqrt(6.0 / 51.0);
    for (double v : r.values) EXPECT_LE(std::abs(v), bound);
    EXPECT_THROW(init_params(KernelFamily::sttf, 0, 0), std::invalid_argument);
}

TEST(Kernels, ConjugationLeavesCorrelationModulusUnchanged) {
    Rng rng(31);
    Signal x(200);
    for (auto& v : x) v = rng.normal();
    for (auto fam : kFamilies) {
        const auto k = evaluate_kernel(fam, random_theta(fam, rng), grid_for(fam));
        ComplexSeq kc(k.size());
        for (std::size_t i = 0; i < k.size(); ++i) kc[i] = std::conj(k[i]);
        const auto a = cross_correlate_same(x, k);
        const auto b = cross_correlate_same(x, kc);
        for (std::size_t t = 0; t < x.size(); ++t) EXPECT_NEAR(std::abs(a[t]), std::abs(b[t]), 1e-12);
    }
}
