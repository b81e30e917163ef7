#include "dgan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dgan {

namespace {
int64_t count_of(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) {
        if (d < 0) throw std::invalid_argument("tensor dim must be nonnegative");
        n *= d;
    }
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(count_of(shape_)), 0.0);
}

Tensor Tensor::zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(std::vector<int> shape) const {
    if (count_of(shape) != size())
        throw std::invalid_argument("reshape: element count mismatch, have " +
                                    shape_str(shape_) + " want " + shape_str(shape));
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
}

Tensor& Tensor::operator+=(const Tensor& o) {
    if (!same_shape(o)) throw std::invalid_argument("tensor += shape mismatch");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
    if (!same_shape(o)) throw std::invalid_argument("tensor -= shape mismatch");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double Tensor::min() const { return *std::min_element(data_.begin(), data_.end()); }
double Tensor::max() const { return *std::max_element(data_.begin(), data_.end()); }

double Tensor::abs_max() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

double Tensor::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double Tensor::mean() const { return data_.empty() ? 0.0 : sum() / static_cast<double>(size()); }

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(Tensor a, double s) { return a *= s; }

std::string shape_str(const std::vector<int>& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

void require_shape(const Tensor& t, const std::vector<int>& expect, const std::string& what) {
    if (t.shape() != expect)
        throw std::invalid_argument(what + ": expected shape " + shape_str(expect) +
                                    ", got " + shape_str(t.shape()));
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.rank() != 4 || b.rank() != 4)
        throw std::invalid_argument("concat_channels wants rank-4 tensors");
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
        throw std::invalid_argument("concat_channels: incompatible shapes " +
                                    shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    const int n = a.dim(0), ca = a.dim(1), cb = b.dim(1), h = a.dim(2), w = a.dim(3);
    Tensor out({n, ca + cb, h, w});
    const int64_t plane = static_cast<int64_t>(h) * w;
    for (int i = 0; i < n; ++i) {
        std::copy(a.data() + i * ca * plane, a.data() + (i + 1) * ca * plane,
                  out.data() + static_cast<int64_t>(i) * (ca + cb) * plane);
        std::copy(b.data() + i * cb * plane, b.data() + (i + 1) * cb * plane,
                  out.data() + static_cast<int64_t>(i) * (ca + cb) * plane + ca * plane);
    }
    return out;
}

void split_channels(const Tensor& ab, int c_first, Tensor& a, Tensor& b) {
    if (ab.rank() != 4) throw std::invalid_argument("split_channels wants a rank-4 tensor");
    const int n = ab.dim(0), c = ab.dim(1), h = ab.dim(2), w = ab.dim(3);
    if (c_first <= 0 || c_first >= c) throw std::invalid_argument("split_channels: bad split point");
    const int cb = c - c_first;
    a = Tensor({n, c_first, h, w});
    b = Tensor({n, cb, h, w});
    const int64_t plane = static_cast<int64_t>(h) * w;
    for (int i = 0; i < n; ++i) {
        const double* src = ab.data() + static_cast<int64_t>(i) * c * plane;
        std::copy(src, src + c_first * plane, a.data() + static_cast<int64_t>(i) * c_first * plane);
        std::copy(src + c_first * plane, src + c * plane,
                  b.data() + static_cast<int64_t>(i) * cb * plane);
    }
}

}  // namespace dgan
