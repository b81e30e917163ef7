#pragma once

#include <vector>

#include "dgan/image.hpp"
#include "dgan/nn.hpp"
#include "dgan/rng.hpp"
#include "dgan/tensor.hpp"

namespace dgan {

// Two leaky-rectified fully connected layers turn a label code (or the
// concatenation of several codes) into the spatial label channel that is
// stacked onto the generator input. code_dim -> 256 -> size*size, reshaped
// row-major to {1,size,size}.
struct EmbedArch {
    int code_dim = 7;
    int image_size = 64;
    int hidden_dim = 256;
    void validate() const;
};

class LabelEmbed {
public:
    LabelEmbed() = default;
    LabelEmbed(const EmbedArch& arch, Rng& rng);

    // {N,code_dim} -> {N,1,size,size}
    Tensor forward(const Tensor& codes);
    Tensor infer(const Tensor& codes) const;
    // {N,1,size,size} -> {N,code_dim}
    Tensor backward(const Tensor& dchannel);

    void zero_grad();
    void params(std::vector<ParamRef>& out, const std::string& prefix);
    const EmbedArch& arch() const { return arch_; }

private:
    EmbedArch arch_;
    Dense fc1_, fc2_;
    LeakyReLU act1_{0.2}, act2_{0.2};
};

// Concatenates the given codes and embeds them; the combined length must
// equal the code_dim the parameters were built for. Returns {1,size,size}.
Tensor embed_label_code(const LabelEmbed& embed, const std::vector<LabelCode>& codes);

// out = mask ? a : b, elementwise. mask is {H,W} with entries in {0,1};
// channels are {1,H,W}. Binary select keeps the identity bitwise exact.
Tensor compose_label_channels(const Tensor& a, const Tensor& b, const Tensor& mask);

// Returns a copy of code with values[label_index] = intensity.
LabelCode scale_intensity(const LabelCode& code, int label_index, double intensity);

}  // namespace dgan
