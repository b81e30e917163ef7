#include "dgan/nn.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace dgan {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

// Gathers k*k patches of src {C,Hsrc,Wsrc} at the (Hpos,Wpos) grid of
// stride/pad positions into cols {C*k*k, Hpos*Wpos}. Out-of-range taps are 0.
void im2col(const double* src, int C, int Hsrc, int Wsrc, int k, int s, int p,
            int Hpos, int Wpos, double* cols) {
    const int P = Hpos * Wpos;
    for (int c = 0; c < C; ++c) {
        const double* plane = src + static_cast<int64_t>(c) * Hsrc * Wsrc;
        for (int kh = 0; kh < k; ++kh) {
            for (int kw = 0; kw < k; ++kw) {
                double* row = cols + (static_cast<int64_t>(c) * k * k + kh * k + kw) * P;
                for (int hp = 0; hp < Hpos; ++hp) {
                    const int hs = hp * s - p + kh;
                    if (hs < 0 || hs >= Hsrc) {
                        for (int wp = 0; wp < Wpos; ++wp) row[hp * Wpos + wp] = 0.0;
                        continue;
                    }
                    for (int wp = 0; wp < Wpos; ++wp) {
                        const int ws = wp * s - p + kw;
                        row[hp * Wpos + wp] = (ws < 0 || ws >= Wsrc) ? 0.0 : plane[hs * Wsrc + ws];
                    }
                }
            }
        }
    }
}

// Scatter-adds cols {C*k*k, Hpos*Wpos} back into dst {C,Hdst,Wdst}.
void col2im(const double* cols, int C, int Hdst, int Wdst, int k, int s, int p,
            int Hpos, int Wpos, double* dst) {
    const int P = Hpos * Wpos;
    for (int c = 0; c < C; ++c) {
        double* plane = dst + static_cast<int64_t>(c) * Hdst * Wdst;
        for (int kh = 0; kh < k; ++kh) {
            for (int kw = 0; kw < k; ++kw) {
                const double* row = cols + (static_cast<int64_t>(c) * k * k + kh * k + kw) * P;
                for (int hp = 0; hp < Hpos; ++hp) {
                    const int hd = hp * s - p + kh;
                    if (hd < 0 || hd >= Hdst) continue;
                    for (int wp = 0; wp < Wpos; ++wp) {
                        const int wd = wp * s - p + kw;
                        if (wd < 0 || wd >= Wdst) continue;
                        plane[hd * Wdst + wd] += row[hp * Wpos + wp];
                    }
                }
            }
        }
    }
}

Tensor gaussian_init(std::vector<int> shape, Rng& rng, double sigma = 0.02) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = sigma * rng.normal();
    return t;
}

void check_rank4(const Tensor& x, int ch, const char* what) {
    if (x.rank() != 4)
        throw std::invalid_argument(std::string(what) + ": expected rank-4 input, got " +
                                    shape_str(x.shape()));
    if (x.dim(1) != ch)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(ch) +
                                    " input channels, got " + shape_str(x.shape()));
}

}  // namespace

std::vector<ParamRef> trainable_only(std::vector<ParamRef> refs) {
    std::vector<ParamRef> out;
    for (auto& r : refs)
        if (r.grad) out.push_back(r);
    return out;
}

std::vector<Tensor> snapshot_params(const std::vector<ParamRef>& refs) {
    std::vector<Tensor> snap;
    snap.reserve(refs.size());
    for (const auto& r : refs) snap.push_back(*r.value);
    return snap;
}

double max_abs_param_delta(const std::vector<ParamRef>& refs, const std::vector<Tensor>& snap) {
    double m = 0.0;
    for (size_t i = 0; i < refs.size(); ++i) {
        const Tensor& a = *refs[i].value;
        const Tensor& b = snap[i];
        for (int64_t j = 0; j < a.size(); ++j) m = std::max(m, std::fabs(a[j] - b[j]));
    }
    return m;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_ch, int out_ch, int k, int stride, int pad, Rng& rng)
    : in_ch(in_ch), out_ch(out_ch), k(k), stride(stride), pad(pad) {
    w = gaussian_init({out_ch, in_ch, k, k}, rng);
    b = Tensor({out_ch});
    gw = Tensor({out_ch, in_ch, k, k});
    gb = Tensor({out_ch});
}

static Tensor conv2d_run(const Tensor& x, const Tensor& w, const Tensor& b,
                         int k, int s, int p) {
    const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int co = w.dim(0);
    const int ho = (h + 2 * p - k) / s + 1;
    const int wo = (wd + 2 * p - k) / s + 1;
    if (ho <= 0 || wo <= 0)
        throw std::invalid_argument("conv2d: input " + shape_str(x.shape()) + " too small");
    Tensor y({n, co, ho, wo});
    const int ckk = ci * k * k;
    Tensor cols({ckk, ho * wo});
    CMapMat wm(w.data(), co, ckk);
    for (int i = 0; i < n; ++i) {
        im2col(x.data() + static_cast<int64_t>(i) * ci * h * wd, ci, h, wd, k, s, p, ho, wo,
               cols.data());
        MapMat ym(y.data() + static_cast<int64_t>(i) * co * ho * wo, co, ho * wo);
        CMapMat cm(cols.data(), ckk, ho * wo);
        ym.noalias() = wm * cm;
        for (int c = 0; c < co; ++c) ym.row(c).array() += b[c];
    }
    return y;
}

Tensor Conv2d::forward(const Tensor& x) {
    check_rank4(x, in_ch, "conv2d");
    x_cache_ = x;
    return conv2d_run(x, w, b, k, stride, pad);
}

Tensor Conv2d::infer(const Tensor& x) const {
    check_rank4(x, in_ch, "conv2d");
    return conv2d_run(x, w, b, k, stride, pad);
}

Tensor Conv2d::backward(const Tensor& dy) {
    const Tensor& x = x_cache_;
    const int n = x.dim(0), h = x.dim(2), wd = x.dim(3);
    const int ho = dy.dim(2), wo = dy.dim(3);
    const int ckk = in_ch * k * k;
    Tensor dx({n, in_ch, h, wd});
    Tensor cols({ckk, ho * wo});
    Tensor dcols({ckk, ho * wo});
    CMapMat wm(w.data(), out_ch, ckk);
    MapMat gwm(gw.data(), out_ch, ckk);
    for (int i = 0; i < n; ++i) {
        im2col(x.data() + static_cast<int64_t>(i) * in_ch * h * wd, in_ch, h, wd, k, stride, pad,
               ho, wo, cols.data());
        CMapMat dym(dy.data() + static_cast<int64_t>(i) * out_ch * ho * wo, out_ch, ho * wo);
        CMapMat cm(cols.data(), ckk, ho * wo);
        gwm.noalias() += dym * cm.transpose();
        for (int c = 0; c < out_ch; ++c) gb[c] += dym.row(c).sum();
        MapMat dcm(dcols.data(), ckk, ho * wo);
        dcm.noalias() = wm.transpose() * dym;
        col2im(dcols.data(), in_ch, h, wd, k, stride, pad, ho, wo,
               dx.data() + static_cast<int64_t>(i) * in_ch * h * wd);
    }
    return dx;
}

void Conv2d::zero_grad() {
    gw.fill(0.0);
    gb.fill(0.0);
}

void Conv2d::params(std::vector<ParamRef>& out, const std::string& prefix) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
}

// ------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_ch, int out_ch, int k, int stride, int pad, Rng& rng)
    : in_ch(in_ch), out_ch(out_ch), k(k), stride(stride), pad(pad) {
    w = gaussian_init({in_ch, out_ch, k, k}, rng);
    b = Tensor({out_ch});
    gw = Tensor({in_ch, out_ch, k, k});
    gb = Tensor({out_ch});
}

static Tensor deconv2d_run(const Tensor& x, const Tensor& w, const Tensor& b,
                           int co, int k, int s, int p) {
    const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int ho = (h - 1) * s - 2 * p + k;
    const int wo = (wd - 1) * s - 2 * p + k;
    if (ho <= 0 || wo <= 0)
        throw std::invalid_argument("deconv2d: input " + shape_str(x.shape()) + " too small");
    Tensor y({n, co, ho, wo});
    const int ckk = co * k * k;
    Tensor cols({ckk, h * wd});
    CMapMat wm(w.data(), ci, ckk);
    for (int i = 0; i < n; ++i) {
        CMapMat xm(x.data() + static_cast<int64_t>(i) * ci * h * wd, ci, h * wd);
        MapMat cm(cols.data(), ckk, h * wd);
        cm.noalias() = wm.transpose() * xm;
        double* yp = y.data() + static_cast<int64_t>(i) * co * ho * wo;
        col2im(cols.data(), co, ho, wo, k, s, p, h, wd, yp);
        for (int c = 0; c < co; ++c) {
            double* plane = yp + static_cast<int64_t>(c) * ho * wo;
            for (int j = 0; j < ho * wo; ++j) plane[j] += b[c];
        }
    }
    return y;
}

Tensor ConvTranspose2d::forward(const Tensor& x) {
    check_rank4(x, in_ch, "deconv2d");
    x_cache_ = x;
    return deconv2d_run(x, w, b, out_ch, k, stride, pad);
}

Tensor ConvTranspose2d::infer(const Tensor& x) const {
    check_rank4(x, in_ch, "deconv2d");
    return deconv2d_run(x, w, b, out_ch, k, stride, pad);
}

Tensor ConvTranspose2d::backward(const Tensor& dy) {
    const Tensor& x = x_cache_;
    const int n = x.dim(0), h = x.dim(2), wd = x.dim(3);
    const int ho = dy.dim(2), wo = dy.dim(3);
    const int ckk = out_ch * k * k;
    Tensor dx({n, in_ch, h, wd});
    Tensor cols_dy({ckk, h * wd});
    CMapMat wm(w.data(), in_ch, ckk);
    MapMat gwm(gw.data(), in_ch, ckk);
    for (int i = 0; i < n; ++i) {
        im2col(dy.data() + static_cast<int64_t>(i) * out_ch * ho * wo, out_ch, ho, wo, k, stride,
               pad, h, wd, cols_dy.data());
        CMapMat cm(cols_dy.data(), ckk, h * wd);
        CMapMat xm(x.data() + static_cast<int64_t>(i) * in_ch * h * wd, in_ch, h * wd);
        gwm.noalias() += xm * cm.transpose();
        MapMat dxm(dx.data() + static_cast<int64_t>(i) * in_ch * h * wd, in_ch, h * wd);
        dxm.noalias() = wm * cm;
        const double* dyp = dy.data() + static_cast<int64_t>(i) * out_ch * ho * wo;
        for (int c = 0; c < out_ch; ++c) {
            const double* plane = dyp + static_cast<int64_t>(c) * ho * wo;
            for (int j = 0; j < ho * wo; ++j) gb[c] += plane[j];
        }
    }
    return dx;
}

void ConvTranspose2d::zero_grad() {
    gw.fill(0.0);
    gb.fill(0.0);
}

void ConvTranspose2d::params(std::vector<ParamRef>& out, const std::string& prefix) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
}

// ----------------------------------------------------------------- Dense

Dense::Dense(int in_dim, int out_dim, Rng& rng) : in_dim(in_dim), out_dim(out_dim) {
    w = gaussian_init({out_dim, in_dim}, rng);
    b = Tensor({out_dim});
    gw = Tensor({out_dim, in_dim});
    gb = Tensor({out_dim});
}

static Tensor dense_run(const Tensor& x, const Tensor& w, const Tensor& b) {
    const int n = x.dim(0), in = x.dim(1), out = w.dim(0);
    Tensor y({n, out});
    CMapMat xm(x.data(), n, in);
    CMapMat wm(w.data(), out, in);
    MapMat ym(y.data(), n, out);
    ym.noalias() = xm * wm.transpose();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < out; ++j) ym(i, j) += b[j];
    return y;
}

Tensor Dense::forward(const Tensor& x) {
    if (x.rank() != 2 || x.dim(1) != in_dim)
        throw std::invalid_argument("dense: expected {N," + std::to_string(in_dim) + "}, got " +
                                    shape_str(x.shape()));
    x_cache_ = x;
    return dense_run(x, w, b);
}

Tensor Dense::infer(const Tensor& x) const {
    if (x.rank() != 2 || x.dim(1) != in_dim)
        throw std::invalid_argument("dense: expected {N," + std::to_string(in_dim) + "}, got " +
                                    shape_str(x.shape()));
    return dense_run(x, w, b);
}

Tensor Dense::backward(const Tensor& dy) {
    const int n = x_cache_.dim(0);
    Tensor dx({n, in_dim});
    CMapMat dym(dy.data(), n, out_dim);
    CMapMat xm(x_cache_.data(), n, in_dim);
    CMapMat wm(w.data(), out_dim, in_dim);
    MapMat gwm(gw.data(), out_dim, in_dim);
    MapMat dxm(dx.data(), n, in_dim);
    gwm.noalias() += dym.transpose() * xm;
    for (int j = 0; j < out_dim; ++j) gb[j] += dym.col(j).sum();
    dxm.noalias() = dym * wm;
    return dx;
}

void Dense::zero_grad() {
    gw.fill(0.0);
    gb.fill(0.0);
}

void Dense::params(std::vector<ParamRef>& out, const std::string& prefix) {
    out.push_back({prefix + ".w", &w, &gw});
    out.push_back({prefix + ".b", &b, &gb});
}

// ----------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels) : channels(channels) {
    gamma = Tensor::full({channels}, 1.0);
    beta = Tensor({channels});
    run_mean = Tensor({channels});
    run_var = Tensor::full({channels}, 1.0);
    ggamma = Tensor({channels});
    gbeta = Tensor({channels});
}

Tensor BatchNorm2d::forward(const Tensor& x) {
    check_rank4(x, channels, "batchnorm");
    const int n = x.dim(0), h = x.dim(2), wd = x.dim(3);
    const int64_t m = static_cast<int64_t>(n) * h * wd;
    Tensor y(x.shape());
    x_hat_ = Tensor(x.shape());
    inv_std_ = Tensor({channels});
    for (int c = 0; c < channels; ++c) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < h * wd; ++p) mean += x.data()[(static_cast<int64_t>(i) * channels + c) * h * wd + p];
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < h * wd; ++p) {
                double d = x.data()[(static_cast<int64_t>(i) * channels + c) * h * wd + p] - mean;
                var += d * d;
            }
        var /= static_cast<double>(m);
        const double istd = 1.0 / std::sqrt(var + eps);
        inv_std_[c] = istd;
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < h * wd; ++p) {
                const int64_t idx = (static_cast<int64_t>(i) * channels + c) * h * wd + p;
                const double xh = (x.data()[idx] - mean) * istd;
                x_hat_[idx] = xh;
                y[idx] = gamma[c] * xh + beta[c];
            }
        run_mean[c] = momentum * run_mean[c] + (1.0 - momentum) * mean;
        run_var[c] = momentum * run_var[c] + (1.0 - momentum) * var;
    }
    return y;
}

Tensor BatchNorm2d::infer(const Tensor& x) const {
    check_rank4(x, channels, "batchnorm");
    const int n = x.dim(0), h = x.dim(2), wd = x.dim(3);
    Tensor y(x.shape());
    for (int c = 0; c < channels; ++c) {
        const double istd = 1.0 / std::sqrt(run_var[c] + eps);
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < h * wd; ++p) {
                const int64_t idx = (static_cast<int64_t>(i) * channels + c) * h * wd + p;
                y[idx] = gamma[c] * (x.data()[idx] - run_mean[c]) * istd + beta[c];
            }
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
    const int n = dy.dim(0), h = dy.dim(2), wd = dy.dim(3);
    const int64_t m = static_cast<int64_t>(n) * h * wd;
    Tensor dx(dy.shape());
    for (int c = 0; c < channels; ++c) {
        double sum_dy = 0.0, sum_dy_xh = 0.0;
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < h * wd; ++p) {
                const int64_t idx = (static_cast<int64_t>(i) * channels + c) * h * wd + p;
                sum_dy += dy[idx];
                sum_dy_xh += dy[idx] * x_hat_[idx];
            }
        gbeta[c] += sum_dy;
        ggamma[c] += sum_dy_xh;
        const double scale = gamma[c] * inv_std_[c];
        const double mean_dy = sum_dy / static_cast<double>(m);
        const double mean_dy_xh = sum_dy_xh / static_cast<double>(m);
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < h * wd; ++p) {
                const int64_t idx = (static_cast<int64_t>(i) * channels + c) * h * wd + p;
                dx[idx] = scale * (dy[idx] - mean_dy - x_hat_[idx] * mean_dy_xh);
            }
    }
    return dx;
}

void BatchNorm2d::zero_grad() {
    ggamma.fill(0.0);
    gbeta.fill(0.0);
}

void BatchNorm2d::params(std::vector<ParamRef>& out, const std::string& prefix) {
    out.push_back({prefix + ".gamma", &gamma, &ggamma});
    out.push_back({prefix + ".beta", &beta, &gbeta});
    out.push_back({prefix + ".run_mean", &run_mean, nullptr});
    out.push_back({prefix + ".run_var", &run_var, nullptr});
}

// ------------------------------------------------------------ activations

Tensor LeakyReLU::forward(const Tensor& x) {
    x_cache_ = x;
    return infer(x);
}

Tensor LeakyReLU::infer(const Tensor& x) const {
    Tensor y(x.shape());
    for (int64_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0 ? x[i] : slope * x[i];
    return y;
}

Tensor LeakyReLU::backward(const Tensor& dy) const {
    Tensor dx(dy.shape());
    for (int64_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * (x_cache_[i] > 0 ? 1.0 : slope);
    return dx;
}

Tensor ReLU::forward(const Tensor& x) {
    x_cache_ = x;
    return infer(x);
}

Tensor ReLU::infer(const Tensor& x) const {
    Tensor y(x.shape());
    for (int64_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0 ? x[i] : 0.0;
    return y;
}

Tensor ReLU::backward(const Tensor& dy) const {
    Tensor dx(dy.shape());
    for (int64_t i = 0; i < dy.size(); ++i) dx[i] = x_cache_[i] > 0 ? dy[i] : 0.0;
    return dx;
}

Tensor Tanh::forward(const Tensor& x) {
    y_cache_ = infer(x);
    return y_cache_;
}

Tensor Tanh::infer(const Tensor& x) const {
    Tensor y(x.shape());
    for (int64_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
    return y;
}

Tensor Tanh::backward(const Tensor& dy) const {
    Tensor dx(dy.shape());
    for (int64_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * (1.0 - y_cache_[i] * y_cache_[i]);
    return dx;
}

Tensor Sigmoid::forward(const Tensor& x) {
    y_cache_ = infer(x);
    return y_cache_;
}

Tensor Sigmoid::infer(const Tensor& x) const {
    Tensor y(x.shape());
    for (int64_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    return y;
}

Tensor Sigmoid::backward(const Tensor& dy) const {
    Tensor dx(dy.shape());
    for (int64_t i = 0; i < dy.size(); ++i)
        dx[i] = dy[i] * y_cache_[i] * (1.0 - y_cache_[i]);
    return dx;
}

Tensor Dropout::forward(const Tensor& x, Rng& rng) {
    mask_ = Tensor(x.shape());
    const double keep = 1.0 - rate;
    for (int64_t i = 0; i < x.size(); ++i)
        mask_[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
    Tensor y(x.shape());
    for (int64_t i = 0; i < x.size(); ++i) y[i] = x[i] * mask_[i];
    return y;
}

Tensor Dropout::infer(const Tensor& x, Rng* rng) const {
    if (!rng) return x;
    const double keep = 1.0 - rate;
    Tensor y(x.shape());
    for (int64_t i = 0; i < x.size(); ++i)
        y[i] = rng->uniform() < keep ? x[i] / keep : 0.0;
    return y;
}

Tensor Dropout::backward(const Tensor& dy) const {
    Tensor dx(dy.shape());
    for (int64_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask_[i];
    return dx;
}

// ------------------------------------------------------------------ Adam

AdamGroup::AdamGroup(std::vector<ParamRef> trainable, AdamParams hp) : hp(hp) {
    rebind(std::move(trainable));
    for (const auto& r : refs_) {
        m.emplace_back(r.value->shape());
        v.emplace_back(r.value->shape());
    }
}

void AdamGroup::rebind(std::vector<ParamRef> trainable) {
    for (const auto& r : trainable)
        if (!r.grad) throw std::invalid_argument("AdamGroup: non-trainable param " + r.name);
    refs_ = std::move(trainable);
    if (!m.empty() && m.size() != refs_.size())
        throw std::invalid_argument("AdamGroup: rebind with mismatched param count");
}

void AdamGroup::step() {
    ++t;
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
    for (size_t i = 0; i < refs_.size(); ++i) {
        Tensor& p = *refs_[i].value;
        const Tensor& g = *refs_[i].grad;
        Tensor& mi = m[i];
        Tensor& vi = v[i];
        for (int64_t j = 0; j < p.size(); ++j) {
            mi[j] = hp.beta1 * mi[j] + (1.0 - hp.beta1) * g[j];
            vi[j] = hp.beta2 * vi[j] + (1.0 - hp.beta2) * g[j] * g[j];
            const double mhat = mi[j] / bc1;
            const double vhat = vi[j] / bc2;
            p[j] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
        }
    }
}

}  // namespace dgan
