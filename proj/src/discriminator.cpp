#include "dgan/discriminator.hpp"

#include <algorithm>
#include <stdexcept>

namespace dgan {

DiscArch DiscArch::from_config(const RunConfig& cfg) {
    DiscArch a;
    a.image_size = cfg.image_size;
    a.base_width = cfg.base_width;
    a.validate();
    return a;
}

void DiscArch::validate() const {
    if (image_size != 8 && image_size != 16 && image_size != 32 && image_size != 64)
        throw std::invalid_argument("discriminator: unsupported image size " +
                                    std::to_string(image_size));
    if (base_width < 1) throw std::invalid_argument("discriminator: base_width must be >= 1");
    if (in_channels < 1) throw std::invalid_argument("discriminator: bad in_channels");
}

int DiscArch::stride_blocks() const {
    int n = 0;
    for (int s = image_size; s > 4; s /= 2) ++n;
    return n;
}

int DiscArch::conv_layer_count() const { return stride_blocks() + 1; }

std::vector<int> DiscArch::widths() const {
    std::vector<int> w(static_cast<size_t>(stride_blocks()));
    for (size_t i = 0; i < w.size(); ++i)
        w[i] = base_width * std::min(1 << i, 8);
    return w;
}

DiscriminatorNet::DiscriminatorNet(const DiscArch& arch, Rng& rng) : arch_(arch) {
    arch_.validate();
    const auto w = arch_.widths();
    blocks_.resize(w.size());
    for (size_t i = 0; i < w.size(); ++i) {
        const int cin = (i == 0) ? arch_.in_channels : w[i - 1];
        blocks_[i].conv = Conv2d(cin, w[i], 4, 2, 1, rng);
        blocks_[i].has_bn = (i != 0);
        if (blocks_[i].has_bn) blocks_[i].bn.emplace(w[i]);
    }
    head_ = Conv2d(w.back(), 1, 4, 1, 0, rng);
}

void DiscriminatorNet::check_input(const Tensor& x) const {
    if (x.rank() != 4 || x.dim(1) != arch_.in_channels || x.dim(2) != arch_.image_size ||
        x.dim(3) != arch_.image_size)
        throw std::invalid_argument(
            "discriminator: expected {N," + std::to_string(arch_.in_channels) + "," +
            std::to_string(arch_.image_size) + "," + std::to_string(arch_.image_size) +
            "} input, got " + shape_str(x.shape()));
}

Tensor DiscriminatorNet::forward(const Tensor& x) {
    check_input(x);
    Tensor h = x;
    for (auto& blk : blocks_) {
        h = blk.conv.forward(h);
        if (blk.has_bn) h = blk.bn->forward(h);
        h = blk.act.forward(h);
    }
    h = head_.forward(h);           // {N,1,1,1}
    h = sig_.forward(h);
    return h.reshaped({h.dim(0)});  // {N}
}

Tensor DiscriminatorNet::infer(const Tensor& x) const {
    check_input(x);
    Tensor h = x;
    for (const auto& blk : blocks_) {
        h = blk.conv.infer(h);
        if (blk.has_bn) h = blk.bn->infer(h);
        h = blk.act.infer(h);
    }
    h = head_.infer(h);
    h = sig_.infer(h);
    return h.reshaped({h.dim(0)});
}

Tensor DiscriminatorNet::backward(const Tensor& dscore) {
    Tensor d = dscore.reshaped({dscore.dim(0), 1, 1, 1});
    d = sig_.backward(d);
    d = head_.backward(d);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
        d = it->act.backward(d);
        if (it->has_bn) d = it->bn->backward(d);
        d = it->conv.backward(d);
    }
    return d;
}

void DiscriminatorNet::zero_grad() {
    for (auto& blk : blocks_) {
        blk.conv.zero_grad();
        if (blk.has_bn) blk.bn->zero_grad();
    }
    head_.zero_grad();
}

void DiscriminatorNet::params(std::vector<ParamRef>& out, const std::string& prefix) {
    for (size_t i = 0; i < blocks_.size(); ++i) {
        const std::string p = prefix + ".conv" + std::to_string(i + 1);
        blocks_[i].conv.params(out, p);
        if (blocks_[i].has_bn) blocks_[i].bn->params(out, p + ".bn");
    }
    head_.params(out, prefix + ".head");
}

std::vector<DiscBlockInfo> DiscriminatorNet::structure() const {
    std::vector<DiscBlockInfo> info;
    for (size_t i = 0; i < blocks_.size(); ++i) {
        DiscBlockInfo b;
        b.name = "conv" + std::to_string(i + 1);
        b.in_ch = blocks_[i].conv.in_ch;
        b.out_ch = blocks_[i].conv.out_ch;
        b.batchnorm = blocks_[i].has_bn;
        b.activation = "leaky_relu";
        info.push_back(b);
    }
    DiscBlockInfo h;
    h.name = "head";
    h.in_ch = head_.in_ch;
    h.out_ch = 1;
    h.batchnorm = false;
    h.activation = "sigmoid";
    info.push_back(h);
    return info;
}

double discriminator_forward(const DiscriminatorNet& d, const Tensor& img) {
    if (img.rank() != 3)
        throw std::invalid_argument("discriminator_forward: expected {C,H,W}, got " +
                                    shape_str(img.shape()));
    Tensor batch = img.reshaped({1, img.dim(0), img.dim(1), img.dim(2)});
    Tensor s = d.infer(batch);
    return s[0];
}

}  // namespace dgan
