#include "dgan/label_embed.hpp"

#include <stdexcept>
#include <string>

namespace dgan {

void EmbedArch::validate() const {
    if (code_dim < 1) throw std::invalid_argument("embed: code_dim must be >= 1");
    if (hidden_dim < 1) throw std::invalid_argument("embed: hidden_dim must be >= 1");
    if (image_size < 1) throw std::invalid_argument("embed: image_size must be >= 1");
}

LabelEmbed::LabelEmbed(const EmbedArch& arch, Rng& rng) : arch_(arch) {
    arch_.validate();
    fc1_ = Dense(arch_.code_dim, arch_.hidden_dim, rng);
    fc2_ = Dense(arch_.hidden_dim, arch_.image_size * arch_.image_size, rng);
}

Tensor LabelEmbed::forward(const Tensor& codes) {
    if (codes.rank() != 2 || codes.dim(1) != arch_.code_dim)
        throw std::invalid_argument("embed: expected {N," + std::to_string(arch_.code_dim) +
                                    "} codes, got " + shape_str(codes.shape()));
    Tensor h = act1_.forward(fc1_.forward(codes));
    Tensor flat = act2_.forward(fc2_.forward(h));
    return flat.reshaped({codes.dim(0), 1, arch_.image_size, arch_.image_size});
}

Tensor LabelEmbed::infer(const Tensor& codes) const {
    if (codes.rank() != 2 || codes.dim(1) != arch_.code_dim)
        throw std::invalid_argument("embed: expected {N," + std::to_string(arch_.code_dim) +
                                    "} codes, got " + shape_str(codes.shape()));
    Tensor h = act1_.infer(fc1_.infer(codes));
    Tensor flat = act2_.infer(fc2_.infer(h));
    return flat.reshaped({codes.dim(0), 1, arch_.image_size, arch_.image_size});
}

Tensor LabelEmbed::backward(const Tensor& dchannel) {
    Tensor dflat = dchannel.reshaped(
        {dchannel.dim(0), arch_.image_size * arch_.image_size});
    Tensor d2 = fc2_.backward(act2_.backward(dflat));
    return fc1_.backward(act1_.backward(d2));
}

void LabelEmbed::zero_grad() {
    fc1_.zero_grad();
    fc2_.zero_grad();
}

void LabelEmbed::params(std::vector<ParamRef>& out, const std::string& prefix) {
    fc1_.params(out, prefix + ".fc1");
    fc2_.params(out, prefix + ".fc2");
}

Tensor embed_label_code(const LabelEmbed& embed, const std::vector<LabelCode>& codes) {
    if (codes.empty()) throw std::invalid_argument("embed_label_code: no codes given");
    LabelCode joined;
    for (const auto& c : codes) {
        validate_label_code(c);
        joined.insert(joined.end(), c.begin(), c.end());
    }
    const int want = embed.arch().code_dim;
    if (static_cast<int>(joined.size()) != want)
        throw std::invalid_argument("embed_label_code: concatenated code length " +
                                    std::to_string(joined.size()) + " does not match expected N=" +
                                    std::to_string(want));
    Tensor batch({1, want});
    for (int i = 0; i < want; ++i) batch.at2(0, i) = joined[static_cast<size_t>(i)];
    Tensor channel = embed.infer(batch);
    const int s = embed.arch().image_size;
    return channel.reshaped({1, s, s});
}

Tensor compose_label_channels(const Tensor& a, const Tensor& b, const Tensor& mask) {
    if (!a.same_shape(b))
        throw std::invalid_argument("compose_label_channels: channel shape mismatch " +
                                    shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    if (a.rank() != 3 || a.dim(0) != 1)
        throw std::invalid_argument("compose_label_channels: expected {1,H,W} channels, got " +
                                    shape_str(a.shape()));
    if (mask.rank() != 2 || mask.dim(0) != a.dim(1) || mask.dim(1) != a.dim(2))
        throw std::invalid_argument("compose_label_channels: mask shape " +
                                    shape_str(mask.shape()) + " does not match channel " +
                                    shape_str(a.shape()));
    Tensor out(a.shape());
    for (int64_t i = 0; i < mask.size(); ++i) {
        const double mv = mask[i];
        if (mv != 0.0 && mv != 1.0)
            throw std::invalid_argument("compose_label_channels: mask entries must be 0 or 1");
        out[i] = (mv == 1.0) ? a[i] : b[i];
    }
    return out;
}

LabelCode scale_intensity(const LabelCode& code, int label_index, double intensity) {
    if (label_index < 0 || label_index >= static_cast<int>(code.size()))
        throw std::out_of_range("scale_intensity: label index " + std::to_string(label_index) +
                                " out of range for code length " + std::to_string(code.size()));
    if (!(intensity >= 0.0 && intensity <= 1.0))
        throw std::invalid_argument("scale_intensity: intensity must be in [0,1]");
    LabelCode out = code;
    out[static_cast<size_t>(label_index)] = intensity;
    return out;
}

}  // namespace dgan
