#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgan/rng.hpp"
#include "dgan/tensor.hpp"

namespace dgan {

// Named handle onto a parameter tensor. grad == nullptr marks a
// non-trainable buffer (batchnorm running statistics) that still
// participates in checkpoints.
struct ParamRef {
    std::string name;
    Tensor* value = nullptr;
    Tensor* grad = nullptr;
};

std::vector<Tensor> snapshot_params(const std::vector<ParamRef>& refs);
double max_abs_param_delta(const std::vector<ParamRef>& refs, const std::vector<Tensor>& snap);
// Drops buffers (running statistics), keeping optimizer-updated parameters.
std::vector<ParamRef> trainable_only(std::vector<ParamRef> refs);

// Layers keep their own forward caches: forward()/backward() form the
// single-writer training path, infer() is const and cache-free so read-only
// synthesis can run concurrently.

class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_ch, int out_ch, int k, int stride, int pad, Rng& rng);

    Tensor forward(const Tensor& x);
    Tensor infer(const Tensor& x) const;
    Tensor backward(const Tensor& dy);

    void zero_grad();
    void params(std::vector<ParamRef>& out, const std::string& prefix);
    int out_hw(int in_hw) const { return (in_hw + 2 * pad - k) / stride + 1; }

    int in_ch = 0, out_ch = 0, k = 0, stride = 0, pad = 0;
    Tensor w, b, gw, gb;  // w: {out_ch, in_ch, k, k}

private:
    Tensor x_cache_;
};

class ConvTranspose2d {
public:
    ConvTranspose2d() = default;
    ConvTranspose2d(int in_ch, int out_ch, int k, int stride, int pad, Rng& rng);

    Tensor forward(const Tensor& x);
    Tensor infer(const Tensor& x) const;
    Tensor backward(const Tensor& dy);

    void zero_grad();
    void params(std::vector<ParamRef>& out, const std::string& prefix);
    int out_hw(int in_hw) const { return (in_hw - 1) * stride - 2 * pad + k; }

    int in_ch = 0, out_ch = 0, k = 0, stride = 0, pad = 0;
    Tensor w, b, gw, gb;  // w: {in_ch, out_ch, k, k}

private:
    Tensor x_cache_;
};

class Dense {
public:
    Dense() = default;
    Dense(int in_dim, int out_dim, Rng& rng);

    Tensor forward(const Tensor& x);  // {N,in} -> {N,out}
    Tensor infer(const Tensor& x) const;
    Tensor backward(const Tensor& dy);

    void zero_grad();
    void params(std::vector<ParamRef>& out, const std::string& prefix);

    int in_dim = 0, out_dim = 0;
    Tensor w, b, gw, gb;  // w: {out,in}

private:
    Tensor x_cache_;
};

// Per-channel batch normalization over {N,C,H,W}. Train mode normalizes by
// batch statistics and folds them into the running averages (momentum 0.9);
// inference uses the running averages.
class BatchNorm2d {
public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(int channels);

    Tensor forward(const Tensor& x);
    Tensor infer(const Tensor& x) const;
    Tensor backward(const Tensor& dy);

    void zero_grad();
    void params(std::vector<ParamRef>& out, const std::string& prefix);

    int channels = 0;
    double momentum = 0.9;
    double eps = 1e-5;
    Tensor gamma, beta, run_mean, run_var, ggamma, gbeta;

private:
    Tensor x_hat_;
    Tensor inv_std_;
};

class LeakyReLU {
public:
    explicit LeakyReLU(double slope = 0.2) : slope(slope) {}
    Tensor forward(const Tensor& x);
    Tensor infer(const Tensor& x) const;
    Tensor backward(const Tensor& dy) const;
    double slope;

private:
    Tensor x_cache_;
};

class ReLU {
public:
    Tensor forward(const Tensor& x);
    Tensor infer(const Tensor& x) const;
    Tensor backward(const Tensor& dy) const;

private:
    Tensor x_cache_;
};

class Tanh {
public:
    Tensor forward(const Tensor& x);
    Tensor infer(const Tensor& x) const;
    Tensor backward(const Tensor& dy) const;

private:
    Tensor y_cache_;
};

class Sigmoid {
public:
    Tensor forward(const Tensor& x);
    Tensor infer(const Tensor& x) const;
    Tensor backward(const Tensor& dy) const;

private:
    Tensor y_cache_;
};

// Inverted dropout; the same mask-and-rescale runs at synthesis time when a
// generator is asked for stochastic outputs.
class Dropout {
public:
    explicit Dropout(double rate = 0.5) : rate(rate) {}
    Tensor forward(const Tensor& x, Rng& rng);
    Tensor infer(const Tensor& x, Rng* rng) const;  // rng == nullptr -> identity
    Tensor backward(const Tensor& dy) const;
    double rate;

private:
    Tensor mask_;
};

struct AdamParams {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adaptive-moment optimizer over one parameter group. Moment tensors are
// shape-congruent with their parameters and are checkpointed by name.
class AdamGroup {
public:
    AdamGroup() = default;
    AdamGroup(std::vector<ParamRef> trainable, AdamParams hp);

    void step();
    void rebind(std::vector<ParamRef> trainable);  // after a load re-wires pointers

    int64_t t = 0;
    std::vector<Tensor> m, v;
    AdamParams hp;
    const std::vector<ParamRef>& refs() const { return refs_; }

private:
    std::vector<ParamRef> refs_;
};

}  // namespace dgan
