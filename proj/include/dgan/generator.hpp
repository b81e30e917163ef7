#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dgan/config.hpp"
#include "dgan/nn.hpp"
#include "dgan/rng.hpp"
#include "dgan/tensor.hpp"

namespace dgan {

// U-Net generator: `depth` stride-2 4x4 conv blocks down to the bottleneck,
// mirrored by transposed convolutions back up, with encoder activations
// concatenated onto the matching decoder inputs. Input is the image plus the
// label channel (4 channels), output 3-channel tanh.
struct GenArch {
    int image_size = 64;
    int depth = 6;
    int base_width = 64;
    int in_channels = 4;
    int out_channels = 3;

    static GenArch from_config(const RunConfig& cfg);
    void validate() const;
    std::vector<int> encoder_widths() const;  // depth entries
    std::vector<int> decoder_widths() const;  // depth entries, last = out_channels
};

struct GenBlockInfo {
    std::string name;
    int in_ch = 0;
    int out_ch = 0;
    bool batchnorm = false;
    bool dropout = false;
    std::string activation;
};

struct GenForwardOpts {
    Rng* dropout_rng = nullptr;  // null -> deterministic forward
    int zero_skip_level = 0;     // 1-based encoder level whose skip is zeroed (test probe)
};

class Generator {
public:
    Generator() = default;
    Generator(const GenArch& arch, Rng& rng);

    // Training path: dropout always active, batch statistics, caches kept.
    Tensor forward(const Tensor& x4, Rng& rng);
    // Read-only path: running statistics; dropout only when opts carries an rng.
    Tensor infer(const Tensor& x4, const GenForwardOpts& opts = {}) const;
    // Backprop through the cached training forward; returns grad wrt x4.
    Tensor backward(const Tensor& dy);

    void zero_grad();
    void params(std::vector<ParamRef>& out, const std::string& prefix);
    std::vector<GenBlockInfo> structure() const;
    const GenArch& arch() const { return arch_; }

private:
    struct EncBlock {
        bool has_act = false;
        bool has_bn = false;
        LeakyReLU act{0.2};
        Conv2d conv;
        std::optional<BatchNorm2d> bn;
    };
    struct DecBlock {
        bool has_bn = false;
        bool has_dropout = false;
        bool has_tanh = false;
        ReLU act;
        ConvTranspose2d deconv;
        std::optional<BatchNorm2d> bn;
        Dropout drop{0.5};
        Tanh tanh;
    };

    void check_input(const Tensor& x4) const;

    GenArch arch_;
    std::vector<EncBlock> enc_;
    std::vector<DecBlock> dec_;
    std::vector<Tensor> enc_acts_;  // training cache
};

}  // namespace dgan
