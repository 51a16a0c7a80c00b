#include "tfn/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace tfn::nn {

void Adam::step(const std::vector<ParamView>& params, double lr) {
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.value.size(), 0.0);
            v_.emplace_back(p.value.size(), 0.0);
        }
    }
    if (params.size() != m_.size()) throw std::invalid_argument("Adam::step: parameter list changed between steps");
    ++t_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& p = params[i];
        auto& m = m_[i];
        auto& v = v_[i];
        if (p.value.size() != m.size() || p.grad.size() != m.size()) {
            throw std::invalid_argument("Adam::step: size mismatch for " + p.name);
        }
        for (std::size_t j = 0; j < m.size(); ++j) {
            const double g = p.grad[j];
            m[j] = b1 * m[j] + (1.0 - b1) * g;
            v[j] = b2 * v[j] + (1.0 - b2) * g * g;
            const double mhat = m[j] / c1;
            const double vhat = v[j] / c2;
            p.value[j] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

}  // namespace tfn::nn
