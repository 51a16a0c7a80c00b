#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tfn/errors.hpp"
#include "tfn/random.hpp"
#include "tfn/tfconv.hpp"

using namespace tfn;

namespace {

Tensor random_batch(std::size_t batch, std::size_t len, std::uint64_t seed) {
    Rng rng(seed);
    Tensor x(batch, 1, len);
    for (double& v : x.values()) v = rng.normal();
    return x;
}

Tensor cosine(double f, std::size_t len) {
    Tensor x(1, 1, len);
    for (std::size_t t = 0; t < len; ++t) x.at(0, 0, t) = std::cos(2.0 * std::numbers::pi * f * t);
    return x;
}

TfConvLayer sttf_layer(std::vector<double> freqs) {
    TfConvLayer layer = make_tfconv(KernelFamily::sttf, freqs.size(), 0);
    layer.params.values = std::move(freqs);
    return layer;
}

std::vector<std::vector<double>> thetas_of(const KernelParams& p) {
    std::vector<std::vector<double>> out;
    for (std::size_t c = 0; c < p.n_channels; ++c) out.emplace_back(p.channel(c).begin(), p.channel(c).end());
    return out;
}

constexpr KernelFamily kFamilies[] = {KernelFamily::sttf, KernelFamily::chirplet, KernelFamily::morlet,
                                      KernelFamily::laplace};

}  // namespace

TEST(TfConv, ZeroInputGivesSqrtEps) {
    const TfConvLayer layer = make_tfconv(KernelFamily::sttf, 4, 0);
    const auto [h, cache] = tfconv_forward(layer, Tensor(2, 1, 64));
    EXPECT_EQ(h.shape(), (Shape{2, 4, 64}));
    for (double v : h.values()) EXPECT_DOUBLE_EQ(v, std::sqrt(layer.eps_modulus));
}

TEST(TfConv, ZeroFrequencyChannelIsSmoothedMagnitude) {
    const TfConvLayer layer = sttf_layer({0.0});
    const Tensor x = random_batch(1, 128, 1);
    const auto [h, cache] = tfconv_forward(layer, x);
    const auto k = evaluate_kernel(KernelFamily::sttf, std::vector<double>{0.0}, layer.grid());
    const auto ref = oracle::naive_correlate_same(x.row(0, 0), k);
    for (std::size_t t = 0; t < 128; ++t) {
        EXPECT_NEAR(cache.h_img.at(0, 0, t), 0.0, 1e-15);
        EXPECT_NEAR(h.at(0, 0, t), std::abs(ref[t].real()), 1e-9);
    }
}

TEST(TfConv, BandPassSelectivity) {
    const TfConvLayer layer = sttf_layer({0.1, 0.2, 0.3});
    const auto [h, cache] = tfconv_forward(layer, cosine(0.2, 512));
    double mean[3] = {0, 0, 0};
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t t = 100; t < 412; ++t) mean[c] += h.at(0, c, t);
    }
    EXPECT_GT(mean[1], mean[0]);
    EXPECT_GT(mean[1], mean[2]);
}

TEST(TfConv, MatchesReferenceTftAllFamilies) {
    for (auto fam : kFamilies) {
        const TfConvLayer layer = make_tfconv(fam, 8, 0);
        const Tensor x = random_batch(1, 400, 2);
        const auto [h, cache] = tfconv_forward(layer, x);
        const auto ref = reference_tft(x.row(0, 0), fam, thetas_of(layer.params), layer.grid());
        double worst = 0.0;
        for (std::size_t c = 0; c < 8; ++c)
            for (std::size_t t = 0; t < 400; ++t) {
                const double hh = h.at(0, c, t);
                const double modulus = std::sqrt(std::max(0.0, hh * hh - layer.eps_modulus));
                worst = std::max(worst, std::abs(modulus - std::abs(ref[c][t])));
            }
        EXPECT_LT(worst, 1e-9) << to_string(fam);
    }
}

TEST(TfConv, ReferenceTftOfImpulseIsKernelEnvelope) {
    const std::size_t len = 101;
    Signal x(len, 0.0);
    x[50] = 1.0;
    const std::vector<std::vector<double>> thetas{{0.2}};
    const auto g = grid_for(KernelFamily::sttf);
    const auto tf = reference_tft(x, KernelFamily::sttf, thetas, g);
    const auto k = evaluate_kernel(KernelFamily::sttf, thetas[0], g);
    // out[t] = x[50] k[50 - t + 25], so |out| traces the envelope around t = 50
    for (std::size_t m = 0; m < k.size(); ++m) {
        const std::size_t t = 50 + 25 - m;
        EXPECT_NEAR(std::abs(tf[0][t]), std::abs(k[m]), 1e-15);
    }
    EXPECT_THROW(reference_tft(Signal(10, 1.0), KernelFamily::sttf, thetas, g), std::invalid_argument);
}

TEST(TfConv, ReferenceTftSelectsMatchingFrequency) {
    const auto x = cosine(0.2, 512);
    const std::vector<std::vector<double>> thetas{{0.1}, {0.2}, {0.3}};
    const auto tf = reference_tft(x.row(0, 0), KernelFamily::sttf, thetas, grid_for(KernelFamily::sttf));
    double mean[3] = {0, 0, 0};
    for (std::size_t c = 0; c < 3; ++c)
        for (const auto& v : tf[c]) mean[c] += std::abs(v);
    EXPECT_GT(mean[1], mean[0]);
    EXPECT_GT(mean[1], mean[2]);
}

TEST(TfConv, ShapeAndPositivity) {
    for (auto fam : kFamilies) {
        const TfConvLayer layer = make_tfconv(fam, 3, 0);
        const auto [h, cache] = tfconv_forward(layer, random_batch(2, 333, 3));
        EXPECT_EQ(h.shape(), (Shape{2, 3, 333}));
        for (double v : h.values()) EXPECT_GE(v, std::sqrt(layer.eps_modulus));
    }
}

TEST(TfConv, ModulusScaleEquivariance) {
    const TfConvLayer layer = make_tfconv(KernelFamily::chirplet, 4, 0);
    const Tensor x = random_batch(1, 256, 4);
    const auto [h, c0] = tfconv_forward(layer, x);
    for (double scale : {-2.0, 0.5}) {
        Tensor xs = x;
        for (double& v : xs.values()) v *= scale;
        const auto [hs, c1] = tfconv_forward(layer, xs);
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double a = std::sqrt(std::max(0.0, h.values()[i] * h.values()[i] - layer.eps_modulus));
            const double b = std::sqrt(std::max(0.0, hs.values()[i] * hs.values()[i] - layer.eps_modulus));
            EXPECT_NEAR(b, std::abs(scale) * a, 1e-9);
        }
    }
}

TEST(TfConv, RejectsBadInput) {
    const TfConvLayer layer = make_tfconv(KernelFamily::sttf, 2, 0);
    Tensor x = random_batch(1, 64, 5);
    x.at(0, 0, 3) = NAN;
    EXPECT_THROW(tfconv_forward(layer, x), std::invalid_argument);
    EXPECT_THROW(tfconv_forward(layer, Tensor(1, 2, 64)), std::invalid_argument);
    TfConvLayer bad = layer;
    bad.params.values[0] = 0.9;
    EXPECT_THROW(tfconv_forward(bad, random_batch(1, 64, 5)), ConstraintError);
    const auto [h, cache] = tfconv_forward(layer, random_batch(1, 64, 5));
    EXPECT_THROW(tfconv_backward(layer, cache, Tensor(1, 3, 64)), std::invalid_argument);
}

TEST(TfConvBackward, ZeroUpstreamGivesZeroGradients) {
    const TfConvLayer layer = make_tfconv(KernelFamily::morlet, 3, 0);
    const auto [h, cache] = tfconv_forward(layer, random_batch(2, 400, 6));
    const auto g = tfconv_backward(layer, cache, Tensor(h.shape()));
    for (double v : g.grad_theta) EXPECT_EQ(v, 0.0);
    for (double v : g.grad_input.values()) EXPECT_EQ(v, 0.0);
}

namespace {

// L = sum(w .* h) for fixed random weights w.
double weighted_loss(const TfConvLayer& layer, const Tensor& x, const Tensor& w) {
    const auto [h, cache] = tfconv_forward(layer, x);
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) s += h.values()[i] * w.values()[i];
    return s;
}

void check_theta_grad(TfConvLayer layer, double tolerance, bool weighted) {
    const Tensor x = random_batch(2, 350, 7);
    Tensor w(2, layer.n_channels(), 350, 1.0);
    if (weighted) {
        Rng rng(8);
        for (double& v : w.values()) v = rng.normal();
    }
    const auto [h, cache] = tfconv_forward(layer, x);
    const auto g = tfconv_backward(layer, cache, w);
    for (std::size_t p = 0; p < layer.params.values.size(); ++p) {
        const double fd =
            oracle::central_difference([&] { return weighted_loss(layer, x, w); }, layer.params.values[p]);
        EXPECT_LT(oracle::relative_error(g.grad_theta[p], fd), tolerance)
            << to_string(layer.params.family) << " param " << p << " analytic " << g.grad_theta[p] << " fd " << fd;
    }
}

}  // namespace

TEST(TfConvBackward, SttfSumLossMatchesFiniteDifference) { check_theta_grad(sttf_layer({0.17}), 1e-5, false); }

TEST(TfConvBackward, MorletSumLossMatchesFiniteDifference) {
    TfConvLayer layer = make_tfconv(KernelFamily::morlet, 1, 0);
    layer.params.values = {2.3};
    check_theta_grad(layer, 1e-5, false);
}

TEST(TfConvBackward, AllFamiliesWeightedLoss) {
    for (auto fam : kFamilies) check_theta_grad(make_tfconv(fam, 3, 0), 1e-4, true);
    TfConvLayer chirp = make_tfconv(KernelFamily::chirplet, 2, 0);
    chirp.params.values = {0.12, 0.002, 0.31, -0.003};
    check_theta_grad(chirp, 1e-4, true);
}

TEST(TfConvBackward, WithoutModulusAndRandomFamily) {
    check_theta_grad(make_tfconv(KernelFamily::morlet, 2, 0, false), 1e-4, true);
    TfConvLayer random = make_tfconv(KernelFamily::random, 1, 3);
    const Tensor x = random_batch(1, 120, 9);
    Rng rng(10);
    Tensor w(1, 1, 120);
    for (double& v : w.values()) v = rng.normal();
    const auto [h, cache] = tfconv_forward(random, x);
    const auto g = tfconv_backward(random, cache, w);
    for (std::size_t p : {0u, 10u, 25u, 51u, 77u, 101u}) {
        const double fd = oracle::central_difference([&] { return weighted_loss(random, x, w); }, random.params.values[p]);
        EXPECT_LT(oracle::relative_error(g.grad_theta[p], fd), 1e-4) << p;
    }
}

TEST(TfConvBackward, InputGradientMatchesFiniteDifference) {
    const TfConvLayer layer = make_tfconv(KernelFamily::sttf, 3, 0);
    Tensor x = random_batch(1, 80, 11);
    Rng rng(12);
    Tensor w(1, 3, 80);
    for (double& v : w.values()) v = rng.normal();
    const auto [h, cache] = tfconv_forward(layer, x);
    const auto g = tfconv_backward(layer, cache, w);
    for (std::size_t t : {0u, 1u, 20u, 40u, 79u}) {
        const double fd = oracle::central_difference([&] { return weighted_loss(layer, x, w); }, x.at(0, 0, t));
        EXPECT_LT(oracle::relative_error(g.grad_input.at(0, 0, t), fd), 1e-5) << t;
    }
}
