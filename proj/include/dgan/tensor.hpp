#pragma once

#include <cstdint>
#include <new>
#include <string>
#include <vector>

namespace dgan {

// 64-byte-aligned storage keeps the vectorized kernels' scalar/vector split
// independent of heap layout, which keeps training runs bit-reproducible
// across thread arenas and allocation order.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};
    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) {}
    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
    template <class U>
    bool operator==(const AlignedAllocator<U>&) const { return true; }
};

// Dense row-major double tensor. Rank is dynamic; layout conventions:
// feature maps {N,C,H,W}, single images {C,H,W}, matrices {rows,cols}.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, double v);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int64_t size() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // Index helpers for the common ranks.
    double& at2(int a, int b) { return data_[static_cast<size_t>(a) * shape_[1] + b]; }
    double at2(int a, int b) const { return data_[static_cast<size_t>(a) * shape_[1] + b]; }
    double& at3(int c, int h, int w) {
        return data_[(static_cast<size_t>(c) * shape_[1] + h) * shape_[2] + w];
    }
    double at3(int c, int h, int w) const {
        return data_[(static_cast<size_t>(c) * shape_[1] + h) * shape_[2] + w];
    }
    double& at4(int n, int c, int h, int w) {
        return data_[((static_cast<size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }
    double at4(int n, int c, int h, int w) const {
        return data_[((static_cast<size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }

    void fill(double v);
    Tensor reshaped(std::vector<int> shape) const;  // same element count

    Tensor& operator+=(const Tensor& o);
    Tensor& operator-=(const Tensor& o);
    Tensor& operator*=(double s);

    double min() const;
    double max() const;
    double abs_max() const;
    double sum() const;
    double mean() const;

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

private:
    std::vector<int> shape_;
    std::vector<double, AlignedAllocator<double>> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(Tensor a, double s);

std::string shape_str(const std::vector<int>& s);

// Throws std::invalid_argument naming expected/actual dims on mismatch.
void require_shape(const Tensor& t, const std::vector<int>& expect, const std::string& what);

// Channel-axis concat/split for {N,C,H,W} tensors.
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& ab, int c_first, Tensor& a, Tensor& b);

}  // namespace dgan
