#pragma once

#include <cstddef>
#include <vector>

#include "tfn/nn/layers.hpp"

namespace tfn::nn {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. State is keyed by position in the parameter
/// list, so the same list (same order and sizes) must be passed every step.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    void step(const std::vector<ParamView>& params, double lr);

    std::size_t steps() const { return t_; }
    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace tfn::nn
