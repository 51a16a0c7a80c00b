#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "tfn/nn/layers.hpp"

using namespace tfn;
using namespace tfn::nn;

namespace {

Tensor random_tensor(Shape s, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t(s);
    for (double& v : t.values()) v = rng.normal();
    return t;
}

}  // namespace

TEST(Conv1d, PaperFirstLayerShape) {
    Conv1d conv(1, 16, 15);
    EXPECT_EQ(conv.output_shape({1, 1024}), (FeatureShape{16, 1010}));
    Rng rng(0);
    conv.init(rng);
    EXPECT_EQ(conv.forward(Tensor(2, 1, 1024), false).shape(), (Shape{2, 16, 1010}));
}

TEST(Conv1d, IdentityKernel) {
    Conv1d conv(1, 1, 1);
    conv.weight()[0] = 1.0;
    const Tensor x = random_tensor({2, 1, 20}, 1);
    const Tensor y = conv.forward(x, false);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y.values()[i], x.values()[i]);
}

TEST(Conv1d, MatchesDirectLoop) {
    Conv1d conv(3, 2, 4, 1);
    Rng rng(2);
    conv.init(rng);
    for (double& b : conv.bias()) b = rng.normal();
    const Tensor x = random_tensor({1, 3, 12}, 3);
    const Tensor y = conv.forward(x, false);
    ASSERT_EQ(y.length(), 12u - 4 + 1 + 2);
    for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t t = 0; t < y.length(); ++t) {
            double s = conv.bias()[o];
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t m = 0; m < 4; ++m) {
                    const long src = static_cast<long>(t + m) - 1;
                    if (src >= 0 && src < 12) s += conv.kernel(o, i)[m] * x.at(0, i, src);
                }
            EXPECT_NEAR(y.at(0, o, t), s, 1e-12);
        }
}

TEST(Conv1d, GradientsMatchFiniteDifferences) {
    Conv1d conv(2, 3, 5);
    Rng rng(4);
    conv.init(rng);
    for (double& b : conv.bias()) b = rng.normal();
    const auto r = gradcheck::check_layer(conv, random_tensor({2, 2, 32}, 5), true);
    EXPECT_LT(r.worst, 1e-5) << r.where;
}

TEST(Conv1d, ShapeMismatchThrows) {
    Conv1d conv(2, 3, 5);
    EXPECT_THROW(conv.forward(Tensor(1, 1, 32), false), std::invalid_argument);
    EXPECT_THROW(conv.forward(Tensor(1, 2, 4), false), std::invalid_argument);
    EXPECT_THROW(conv.output_shape({3, 32}), std::invalid_argument);
}

TEST(BatchNorm, ConstantChannelMapsToZero) {
    BatchNorm1d bn(2);
    Tensor x(3, 2, 5, 4.0);
    const Tensor y = bn.forward(x, true);
    for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(BatchNorm, TrainingOutputIsStandardized) {
    BatchNorm1d bn(3);
    Tensor x = random_tensor({4, 3, 8}, 6);
    for (double& v : x.values()) v = 10.0 * v + 1.5;
    const Tensor y = bn.forward(x, true);
    for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t t = 0; t < 8; ++t) mean += y.at(b, c, t);
        mean /= 32.0;
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t t = 0; t < 8; ++t) var += (y.at(b, c, t) - mean) * (y.at(b, c, t) - mean);
        var /= 32.0;
        EXPECT_NEAR(mean, 0.0, 1e-6);
        EXPECT_NEAR(var, 1.0, 1e-6);
    }
}

TEST(BatchNorm, GradientsMatchFiniteDifferences) {
    BatchNorm1d bn(3);
    Rng rng(7);
    for (double& g : bn.gamma()) g = rng.uniform(0.5, 1.5);
    for (double& b : bn.beta()) b = rng.normal();
    const auto r = gradcheck::check_layer(bn, random_tensor({4, 3, 8}, 8), true, 9, 1000);
    EXPECT_LT(r.worst, 1e-5) << r.where;
}

TEST(BatchNorm, InferenceUsesRunningStatistics) {
    BatchNorm1d bn(1, 1e-5, 1.0);
    Tensor x(2, 1, 2);
    x.values()[0] = 1;
    x.values()[1] = 3;
    x.values()[2] = 5;
    x.values()[3] = 7;
    bn.forward(x, true);
    EXPECT_DOUBLE_EQ(bn.running_mean()[0], 4.0);
    EXPECT_NEAR(bn.running_var()[0], 20.0 / 3.0, 1e-12);
    const Tensor y = bn.forward(Tensor(1, 1, 1, 4.0), false);
    EXPECT_NEAR(y.values()[0], 0.0, 1e-12);
}

TEST(BatchNorm, BatchOfOneInTrainingThrows) {
    BatchNorm1d bn(2);
    EXPECT_THROW(bn.forward(Tensor(1, 2, 5), true), std::invalid_argument);
    EXPECT_NO_THROW(bn.forward(Tensor(1, 2, 5), false));
}

TEST(ReLU, Example) {
    ReLU relu;
    Tensor x(1, 1, 3);
    x.values()[0] = -1;
    x.values()[1] = 0;
    x.values()[2] = 2;
    const Tensor y = relu.forward(x, false);
    EXPECT_EQ(y.values()[0], 0.0);
    EXPECT_EQ(y.values()[1], 0.0);
    EXPECT_EQ(y.values()[2], 2.0);
    const auto r = gradcheck::check_layer(relu, random_tensor({2, 2, 10}, 10), true);
    EXPECT_LT(r.worst, 1e-6) << r.where;
}

TEST(MaxPool, HalvesLengthWithFloor) {
    MaxPool1d pool(2);
    EXPECT_EQ(pool.output_shape({32, 1008}), (FeatureShape{32, 504}));
    EXPECT_EQ(pool.output_shape({4, 9}), (FeatureShape{4, 4}));
    const auto r = gradcheck::check_layer(pool, random_tensor({2, 3, 11}, 11), true);
    EXPECT_LT(r.worst, 1e-6) << r.where;
    EXPECT_THROW(pool.output_shape({1, 1}), std::invalid_argument);
}

TEST(AdaptiveAvgPool, ExactlyFourBins) {
    AdaptiveAvgPool1d pool(4);
    EXPECT_EQ(pool.output_shape({128, 502}), (FeatureShape{128, 4}));
    Tensor x(1, 1, 10);
    for (std::size_t t = 0; t < 10; ++t) x.at(0, 0, t) = static_cast<double>(t);
    const Tensor y = pool.forward(x, false);
    // bins [0,3) [2,5) [5,8) [7,10)
    EXPECT_DOUBLE_EQ(y.at(0, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 1), 3.0);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 2), 6.0);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 3), 8.0);
    const auto r = gradcheck::check_layer(pool, random_tensor({2, 3, 13}, 12), true);
    EXPECT_LT(r.worst, 1e-6) << r.where;
}

TEST(Flatten, ShapeAndRoundTrip) {
    Flatten flat;
    EXPECT_EQ(flat.output_shape({128, 4}), (FeatureShape{512, 1}));
    const Tensor x = random_tensor({2, 3, 4}, 13);
    const Tensor y = flat.forward(x, false);
    EXPECT_EQ(y.shape(), (Shape{2, 12, 1}));
    const Tensor g = flat.backward(y);
    EXPECT_EQ(g.shape(), x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(g.values()[i], x.values()[i]);
}

TEST(Dense, AffineAndGradients) {
    Dense d(6, 4);
    Rng rng(14);
    d.init(rng);
    for (double& b : d.bias()) b = rng.normal();
    const auto r = gradcheck::check_layer(d, random_tensor({3, 6, 1}, 15), true);
    EXPECT_LT(r.worst, 1e-6) << r.where;
    EXPECT_THROW(d.forward(Tensor(1, 5, 1), false), std::invalid_argument);
}

TEST(Residual, AddsSkipAndChecksShape) {
    std::vector<LayerPtr> body;
    auto conv = std::make_unique<Conv1d>(3, 3, 3, 1);
    Rng rng(16);
    conv->init(rng);
    body.push_back(std::move(conv));
    body.push_back(std::make_unique<BatchNorm1d>(3));
    Residual res(std::move(body));
    EXPECT_EQ(res.output_shape({3, 20}), (FeatureShape{3, 20}));
    const auto r = gradcheck::check_layer(res, random_tensor({3, 3, 20}, 17), true, 3, 200);
    EXPECT_LT(r.worst, 1e-4) << r.where;

    std::vector<LayerPtr> shrinking;
    shrinking.push_back(std::make_unique<Conv1d>(3, 3, 3, 0));
    Residual bad(std::move(shrinking));
    EXPECT_THROW(bad.output_shape({3, 20}), std::invalid_argument);
}

TEST(TfConvAdapter, GradientsAndProjection) {
    TfConv layer(make_tfconv(KernelFamily::chirplet, 2, 0));
    layer.layer().params.values = {0.1, 0.001, 0.3, -0.002};
    const auto r = gradcheck::check_layer(layer, random_tensor({2, 1, 90}, 18), true);
    EXPECT_LT(r.worst, 1e-4) << r.where;
    layer.layer().params.values[0] = 0.8;
    layer.layer().params.values[1] = 0.5;
    layer.project();
    EXPECT_EQ(layer.layer().params.values[0], kMaxFrequency);
    EXPECT_EQ(layer.layer().params.values[1], kMaxChirpRate);
}
