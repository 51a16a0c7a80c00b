#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tfn/nn/layers.hpp"
#include "tfn/nn/model.hpp"
#include "tfn/random.hpp"

namespace gradcheck {

struct Report {
    double worst = 0.0;
    std::string where;
    std::size_t checked = 0;

    void add(double err, const std::string& name) {
        ++checked;
        if (err > worst) {
            worst = err;
            where = name;
        }
    }
};

inline long double weighted_sum(const tfn::Tensor& y, const tfn::Tensor& w) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i)
        s += static_cast<long double>(y.values()[i]) * static_cast<long double>(w.values()[i]);
    return s;
}

/// Checks every parameter entry (up to `max_per_param` evenly spaced ones) and
/// the input gradient of L = sum(w .* layer(x)) against central differences.
inline Report check_layer(tfn::nn::Layer& layer, tfn::Tensor x, bool training, std::uint64_t seed = 1,
                          std::size_t max_per_param = 64, double h = 1e-6) {
    tfn::Rng rng(seed);
    const tfn::Tensor y = layer.forward(x, training);
    tfn::Tensor w(y.shape());
    for (double& v : w.values()) v = rng.normal();

    for (auto& p : layer.parameters()) std::fill(p.grad.begin(), p.grad.end(), 0.0);
    layer.forward(x, training);
    const tfn::Tensor gx = layer.backward(w);

    auto loss = [&] { return weighted_sum(layer.forward(x, training), w); };
    Report r;
    for (auto& p : layer.parameters()) {
        const std::size_t n = p.value.size();
        const std::size_t stride = std::max<std::size_t>(1, n / max_per_param);
        for (std::size_t i = 0; i < n; i += stride) {
            const double fd = oracle::central_difference(loss, p.value[i], h);
            r.add(oracle::relative_error(p.grad[i], fd), std::string(to_string(layer.kind())) + "." + p.name + "[" +
                                                             std::to_string(i) + "]");
        }
    }
    const std::size_t stride = std::max<std::size_t>(1, x.size() / max_per_param);
    for (std::size_t i = 0; i < x.size(); i += stride) {
        const double fd = oracle::central_difference(loss, x.values()[i], h);
        r.add(oracle::relative_error(gx.values()[i], fd), std::string(to_string(layer.kind())) + ".input[" +
                                                              std::to_string(i) + "]");
    }
    return r;
}

/// Same check for a whole model under the loss
/// L = sum(w .* logits), covering every trainable parameter entry.
inline Report check_model(tfn::nn::Model& model, const tfn::Tensor& x, std::uint64_t seed = 2,
                          std::size_t max_per_param = 1u << 30, double h = 1e-6) {
    tfn::Rng rng(seed);
    const tfn::Tensor y = model.forward(x, true);
    tfn::Tensor w(y.shape());
    for (double& v : w.values()) v = rng.normal();
    model.zero_grad();
    model.forward(x, true);
    model.backward(w);

    auto loss = [&] { return weighted_sum(model.forward(x, true), w); };
    Report r;
    for (auto& p : model.parameters()) {
        const std::vector<double> analytic(p.grad.begin(), p.grad.end());
        const std::size_t n = p.value.size();
        const std::size_t stride = std::max<std::size_t>(1, n / max_per_param);
        for (std::size_t i = 0; i < n; i += stride) {
            const double fd = oracle::central_difference(loss, p.value[i], h);
            r.add(oracle::relative_error(analytic[i], fd), p.name + "[" + std::to_string(i) + "]");
        }
    }
    return r;
}

}  // namespace gradcheck
