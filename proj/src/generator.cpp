#include "dgan/generator.hpp"

#include <algorithm>
#include <stdexcept>

namespace dgan {

GenArch GenArch::from_config(const RunConfig& cfg) {
    GenArch a;
    a.image_size = cfg.image_size;
    a.base_width = cfg.base_width;
    int d = 0;
    for (int s = cfg.image_size; s > 1; s /= 2) ++d;
    a.depth = d;  // bottleneck at 1x1
    a.validate();
    return a;
}

void GenArch::validate() const {
    if (image_size != 16 && image_size != 32 && image_size != 64)
        throw std::invalid_argument("generator: unsupported image size " +
                                    std::to_string(image_size) + " (supported: 16, 32, 64)");
    int max_depth = 0;
    for (int s = image_size; s > 1; s /= 2) ++max_depth;
    if (depth < 2 || depth > max_depth)
        throw std::invalid_argument("generator: depth " + std::to_string(depth) +
                                    " invalid for image size " + std::to_string(image_size));
    if (base_width < 1) throw std::invalid_argument("generator: base_width must be >= 1");
    if (in_channels < 1 || out_channels < 1)
        throw std::invalid_argument("generator: bad channel counts");
}

std::vector<int> GenArch::encoder_widths() const {
    std::vector<int> w(static_cast<size_t>(depth));
    for (int i = 0; i < depth; ++i) w[static_cast<size_t>(i)] = base_width * std::min(1 << i, 8);
    return w;
}

std::vector<int> GenArch::decoder_widths() const {
    const auto enc = encoder_widths();
    std::vector<int> w(static_cast<size_t>(depth));
    for (int k = 0; k + 1 < depth; ++k) w[static_cast<size_t>(k)] = enc[static_cast<size_t>(depth - 2 - k)];
    w[static_cast<size_t>(depth - 1)] = out_channels;
    return w;
}

Generator::Generator(const GenArch& arch, Rng& rng) : arch_(arch) {
    arch_.validate();
    const auto encw = arch_.encoder_widths();
    const auto decw = arch_.decoder_widths();
    const int L = arch_.depth;

    enc_.resize(static_cast<size_t>(L));
    for (int i = 0; i < L; ++i) {
        EncBlock& blk = enc_[static_cast<size_t>(i)];
        const int cin = (i == 0) ? arch_.in_channels : encw[static_cast<size_t>(i - 1)];
        blk.has_act = (i != 0);
        blk.conv = Conv2d(cin, encw[static_cast<size_t>(i)], 4, 2, 1, rng);
        blk.has_bn = (i != 0);
        if (blk.has_bn) blk.bn.emplace(encw[static_cast<size_t>(i)]);
    }

    dec_.resize(static_cast<size_t>(L));
    for (int k = 0; k < L; ++k) {
        DecBlock& blk = dec_[static_cast<size_t>(k)];
        const int cin = (k == 0) ? encw[static_cast<size_t>(L - 1)]
                                 : decw[static_cast<size_t>(k - 1)] + encw[static_cast<size_t>(L - 1 - k)];
        blk.deconv = ConvTranspose2d(cin, decw[static_cast<size_t>(k)], 4, 2, 1, rng);
        blk.has_bn = (k != 0 && k != L - 1);
        if (blk.has_bn) blk.bn.emplace(decw[static_cast<size_t>(k)]);
        blk.has_dropout = (k < 2 && k != L - 1);
        blk.has_tanh = (k == L - 1);
    }
}

void Generator::check_input(const Tensor& x4) const {
    if (x4.rank() != 4 || x4.dim(1) != arch_.in_channels || x4.dim(2) != arch_.image_size ||
        x4.dim(3) != arch_.image_size)
        throw std::invalid_argument(
            "generator: expected {N," + std::to_string(arch_.in_channels) + "," +
            std::to_string(arch_.image_size) + "," + std::to_string(arch_.image_size) +
            "} input, got " + shape_str(x4.shape()));
}

Tensor Generator::forward(const Tensor& x4, Rng& rng) {
    check_input(x4);
    const int L = arch_.depth;
    enc_acts_.assign(static_cast<size_t>(L), Tensor());
    Tensor h = x4;
    for (int i = 0; i < L; ++i) {
        EncBlock& blk = enc_[static_cast<size_t>(i)];
        if (blk.has_act) h = blk.act.forward(h);
        h = blk.conv.forward(h);
        if (blk.has_bn) h = blk.bn->forward(h);
        enc_acts_[static_cast<size_t>(i)] = h;
    }
    Tensor d = enc_acts_[static_cast<size_t>(L - 1)];
    for (int k = 0; k < L; ++k) {
        DecBlock& blk = dec_[static_cast<size_t>(k)];
        Tensor in = (k == 0) ? d : concat_channels(d, enc_acts_[static_cast<size_t>(L - 1 - k)]);
        Tensor t = blk.act.forward(in);
        t = blk.deconv.forward(t);
        if (blk.has_bn) t = blk.bn->forward(t);
        if (blk.has_dropout) t = blk.drop.forward(t, rng);
        if (blk.has_tanh) t = blk.tanh.forward(t);
        d = t;
    }
    return d;
}

Tensor Generator::infer(const Tensor& x4, const GenForwardOpts& opts) const {
    check_input(x4);
    const int L = arch_.depth;
    std::vector<Tensor> acts(static_cast<size_t>(L));
    Tensor h = x4;
    for (int i = 0; i < L; ++i) {
        const EncBlock& blk = enc_[static_cast<size_t>(i)];
        if (blk.has_act) h = blk.act.infer(h);
        h = blk.conv.infer(h);
        if (blk.has_bn) h = blk.bn->infer(h);
        acts[static_cast<size_t>(i)] = h;
    }
    Tensor d = acts[static_cast<size_t>(L - 1)];
    for (int k = 0; k < L; ++k) {
        const DecBlock& blk = dec_[static_cast<size_t>(k)];
        Tensor in;
        if (k == 0) {
            in = d;
        } else {
            Tensor skip = acts[static_cast<size_t>(L - 1 - k)];
            if (opts.zero_skip_level == L - k) skip.fill(0.0);
            in = concat_channels(d, skip);
        }
        Tensor t = blk.act.infer(in);
        t = blk.deconv.infer(t);
        if (blk.has_bn) t = blk.bn->infer(t);
        if (blk.has_dropout) t = blk.drop.infer(t, opts.dropout_rng);
        if (blk.has_tanh) t = blk.tanh.infer(t);
        d = t;
    }
    return d;
}

Tensor Generator::backward(const Tensor& dy) {
    const int L = arch_.depth;
    std::vector<Tensor> dskip(static_cast<size_t>(L));  // grads flowing into enc_acts via skips
    Tensor d = dy;
    for (int k = L - 1; k >= 0; --k) {
        DecBlock& blk = dec_[static_cast<size_t>(k)];
        Tensor t = d;
        if (blk.has_tanh) t = blk.tanh.backward(t);
        if (blk.has_dropout) t = blk.drop.backward(t);
        if (blk.has_bn) t = blk.bn->backward(t);
        t = blk.deconv.backward(t);
        t = blk.act.backward(t);
        if (k == 0) {
            d = t;  // grad on the bottleneck activation
        } else {
            Tensor dprev, ds;
            const int c_prev = arch_.decoder_widths()[static_cast<size_t>(k - 1)];
            split_channels(t, c_prev, dprev, ds);
            dskip[static_cast<size_t>(L - 1 - k)] = ds;
            d = dprev;
        }
    }
    // d now holds the grad on enc_acts_[L-1]; walk the encoder backwards,
    // adding the skip contributions at each level.
    for (int i = L - 1; i >= 0; --i) {
        if (!dskip[static_cast<size_t>(i)].empty()) d += dskip[static_cast<size_t>(i)];
        EncBlock& blk = enc_[static_cast<size_t>(i)];
        Tensor t = d;
        if (blk.has_bn) t = blk.bn->backward(t);
        t = blk.conv.backward(t);
        if (blk.has_act) t = blk.act.backward(t);
        d = t;
    }
    return d;
}

void Generator::zero_grad() {
    for (auto& blk : enc_) {
        blk.conv.zero_grad();
        if (blk.has_bn) blk.bn->zero_grad();
    }
    for (auto& blk : dec_) {
        blk.deconv.zero_grad();
        if (blk.has_bn) blk.bn->zero_grad();
    }
}

void Generator::params(std::vector<ParamRef>& out, const std::string& prefix) {
    for (size_t i = 0; i < enc_.size(); ++i) {
        const std::string p = prefix + ".enc" + std::to_string(i + 1);
        enc_[i].conv.params(out, p + ".conv");
        if (enc_[i].has_bn) enc_[i].bn->params(out, p + ".bn");
    }
    for (size_t k = 0; k < dec_.size(); ++k) {
        const std::string p = prefix + ".dec" + std::to_string(k + 1);
        dec_[k].deconv.params(out, p + ".deconv");
        if (dec_[k].has_bn) dec_[k].bn->params(out, p + ".bn");
    }
}

std::vector<GenBlockInfo> Generator::structure() const {
    std::vector<GenBlockInfo> info;
    for (size_t i = 0; i < enc_.size(); ++i) {
        GenBlockInfo b;
        b.name = "enc" + std::to_string(i + 1);
        b.in_ch = enc_[i].conv.in_ch;
        b.out_ch = enc_[i].conv.out_ch;
        b.batchnorm = enc_[i].has_bn;
        b.activation = enc_[i].has_act ? "leaky_relu" : "none";
        info.push_back(b);
    }
    for (size_t k = 0; k < dec_.size(); ++k) {
        GenBlockInfo b;
        b.name = "dec" + std::to_string(k + 1);
        b.in_ch = dec_[k].deconv.in_ch;
        b.out_ch = dec_[k].deconv.out_ch;
        b.batchnorm = dec_[k].has_bn;
        b.dropout = dec_[k].has_dropout;
        b.activation = dec_[k].has_tanh ? "relu+tanh" : "relu";
        info.push_back(b);
    }
    return info;
}

}  // namespace dgan
