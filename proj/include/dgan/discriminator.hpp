#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dgan/config.hpp"
#include "dgan/nn.hpp"
#include "dgan/rng.hpp"
#include "dgan/tensor.hpp"

namespace dgan {

// Five-layer convolutional classifier (at 64x64): four stride-2 4x4 convs
// take 64 -> 32 -> 16 -> 8 -> 4, then a 4x4 valid conv maps to 1x1x1 and a
// sigmoid yields one probability. The standard and differential
// discriminators are two instances of this one structure; inputs are never
// range-clamped, so differential images in [-2,2] pass through untouched.
struct DiscArch {
    int image_size = 64;
    int base_width = 64;
    int in_channels = 3;

    static DiscArch from_config(const RunConfig& cfg);
    void validate() const;
    int stride_blocks() const;           // image_size -> 4x4
    int conv_layer_count() const;        // stride blocks + head
    std::vector<int> widths() const;     // stride block output widths
};

struct DiscBlockInfo {
    std::string name;
    int in_ch = 0;
    int out_ch = 0;
    bool batchnorm = false;
    std::string activation;
};

class DiscriminatorNet {
public:
    DiscriminatorNet() = default;
    DiscriminatorNet(const DiscArch& arch, Rng& rng);

    // Training path: batch statistics, caches kept. Returns {N} scores in (0,1).
    Tensor forward(const Tensor& x);
    // Read-only scoring with running statistics.
    Tensor infer(const Tensor& x) const;
    // dscore is {N}; accumulates parameter grads, returns grad wrt input.
    Tensor backward(const Tensor& dscore);

    void zero_grad();
    void params(std::vector<ParamRef>& out, const std::string& prefix);
    std::vector<DiscBlockInfo> structure() const;
    const DiscArch& arch() const { return arch_; }

private:
    struct Block {
        Conv2d conv;
        bool has_bn = false;
        std::optional<BatchNorm2d> bn;
        LeakyReLU act{0.2};
    };

    void check_input(const Tensor& x) const;

    DiscArch arch_;
    std::vector<Block> blocks_;
    Conv2d head_;
    Sigmoid sig_;
};

// Scores one {3,H,W} image (or differential image) with inference-mode
// statistics; result is strictly inside (0,1).
double discriminator_forward(const DiscriminatorNet& d, const Tensor& img);

}  // namespace dgan
