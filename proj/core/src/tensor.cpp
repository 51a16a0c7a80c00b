#include "tfn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tfn {

std::string to_string(const Shape& s) {
    return std::to_string(s.batch) + "x" + std::to_string(s.channels) + "x" + std::to_string(s.length);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::reshape(Shape shape) {
    if (shape.size() != data_.size()) {
        throw std::invalid_argument("reshape " + to_string(shape_) + " -> " + to_string(shape) +
                                    " changes element count");
    }
    shape_ = shape;
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace tfn
