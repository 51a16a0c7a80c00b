#pragma once

#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace tfn {

/// Allocates on 64-byte boundaries so that vectorized reductions see the same
/// alignment (and therefore the same summation order) on every run.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlignment{64};

    AlignedAllocator() noexcept = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const noexcept {
        return true;
    }
};

using AlignedVector = std::vector<double, AlignedAllocator<double>>;

/// (batch, channels, length). Flat feature vectors use length 1.
struct Shape {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t length = 0;

    std::size_t size() const { return batch * channels * length; }
    bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Dense row-major 3-axis array of doubles.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0) : shape_(shape), data_(shape.size(), fill) {}
    Tensor(std::size_t batch, std::size_t channels, std::size_t length, double fill = 0.0)
        : Tensor(Shape{batch, channels, length}, fill) {}

    const Shape& shape() const { return shape_; }
    std::size_t batch() const { return shape_.batch; }
    std::size_t channels() const { return shape_.channels; }
    std::size_t length() const { return shape_.length; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    double& at(std::size_t b, std::size_t c, std::size_t t) {
        return data_[(b * shape_.channels + c) * shape_.length + t];
    }
    double at(std::size_t b, std::size_t c, std::size_t t) const {
        return data_[(b * shape_.channels + c) * shape_.length + t];
    }

    /// Contiguous (channels * length) block of one sample.
    std::span<double> sample(std::size_t b) {
        return std::span<double>(data_).subspan(b * shape_.channels * shape_.length,
                                                shape_.channels * shape_.length);
    }
    std::span<const double> sample(std::size_t b) const {
        return std::span<const double>(data_).subspan(b * shape_.channels * shape_.length,
                                                      shape_.channels * shape_.length);
    }
    std::span<double> row(std::size_t b, std::size_t c) {
        return std::span<double>(data_).subspan((b * shape_.channels + c) * shape_.length, shape_.length);
    }
    std::span<const double> row(std::size_t b, std::size_t c) const {
        return std::span<const double>(data_).subspan((b * shape_.channels + c) * shape_.length, shape_.length);
    }

    void fill(double v);
    /// Reinterprets the buffer; the element count must not change.
    void reshape(Shape shape);
    bool all_finite() const;

private:
    Shape shape_;
    AlignedVector data_;
};

}  // namespace tfn
