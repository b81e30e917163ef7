#include "dgan/synthesis.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "dgan/label_embed.hpp"

namespace dgan {

namespace {

SynthOptions resolve(const TrainState& s, const std::optional<SynthOptions>& opts) {
    if (opts) return *opts;
    SynthOptions o;
    o.dropout = s.cfg.dropout_at_synthesis;
    return o;
}

Tensor run_generator(const TrainState& s, const Tensor& x, const Tensor& channel,
                     const SynthOptions& o) {
    const int hw = s.cfg.image_size;
    require_shape(x, {3, hw, hw}, "synthesize: input image");
    Tensor x4 = concat_channels(x.reshaped({1, 3, hw, hw}), channel.reshaped({1, 1, hw, hw}));
    GenForwardOpts fo;
    Rng dropout_rng(derive_seed(o.dropout_seed, 0xD120ull));
    if (o.dropout) fo.dropout_rng = &dropout_rng;
    Tensor out = s.gen.infer(x4, fo);
    return out.reshaped({3, hw, hw});
}

}  // namespace

Tensor synthesize(const TrainState& s, const Tensor& x, const LabelCode& code,
                  const std::optional<SynthOptions>& opts) {
    const SynthOptions o = resolve(s, opts);
    Tensor channel = embed_label_code(s.embed, {code});
    return run_generator(s, x, channel, o);
}

std::vector<double> sweep_intensities(int steps, bool from_zero) {
    if (steps < 2) throw std::invalid_argument("sweep: steps must be >= 2");
    const double lo = from_zero ? 0.0 : 0.1;
    std::vector<double> ts(static_cast<size_t>(steps));
    for (int i = 0; i < steps; ++i)
        ts[static_cast<size_t>(i)] = lo + (1.0 - lo) * i / (steps - 1);
    return ts;
}

std::vector<Tensor> intensity_sweep(const TrainState& s, const Tensor& x, int label_index,
                                    int steps, bool from_zero,
                                    const std::optional<SynthOptions>& opts) {
    const SynthOptions o = resolve(s, opts);
    LabelCode zero(static_cast<size_t>(s.cfg.label_count()), 0.0);
    std::vector<Tensor> frames;
    for (double t : sweep_intensities(steps, from_zero))
        frames.push_back(synthesize(s, x, scale_intensity(zero, label_index, t), o));
    return frames;
}

std::vector<Tensor> compound_sweep(const TrainState& s, const Tensor& x, int label_a,
                                   int label_b, int steps,
                                   const std::optional<SynthOptions>& opts) {
    if (label_a == label_b)
        throw std::invalid_argument("compound_sweep: the two labels must differ");
    const SynthOptions o = resolve(s, opts);
    LabelCode zero(static_cast<size_t>(s.cfg.label_count()), 0.0);
    std::vector<Tensor> frames;
    for (int i = 0; i < steps; ++i) {
        const double t = steps > 1 ? static_cast<double>(i) / (steps - 1) : 0.0;
        LabelCode code = scale_intensity(zero, label_a, 1.0 - t);
        code = scale_intensity(code, label_b, t);
        frames.push_back(synthesize(s, x, code, o));
    }
    return frames;
}

Tensor region_compose_synthesis(const TrainState& s, const Tensor& x, const LabelCode& code_a,
                                const LabelCode& code_b, const Tensor& mask,
                                const std::optional<SynthOptions>& opts) {
    const SynthOptions o = resolve(s, opts);
    Tensor ch_a = embed_label_code(s.embed, {code_a});
    Tensor ch_b = embed_label_code(s.embed, {code_b});
    Tensor channel = compose_label_channels(ch_a, ch_b, mask);
    return run_generator(s, x, channel, o);
}

Tensor make_mask(const std::string& kind, int h, int w) {
    Tensor m({h, w});
    if (kind == "upper-half") {
        for (int y = 0; y < h / 2; ++y)
            for (int x = 0; x < w; ++x) m.at2(y, x) = 1.0;
    } else if (kind == "lower-half") {
        for (int y = h / 2; y < h; ++y)
            for (int x = 0; x < w; ++x) m.at2(y, x) = 1.0;
    } else if (kind == "left-half") {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w / 2; ++x) m.at2(y, x) = 1.0;
    } else if (kind == "right-half") {
        for (int y = 0; y < h; ++y)
            for (int x = w / 2; x < w; ++x) m.at2(y, x) = 1.0;
    } else {
        throw std::invalid_argument("unknown mask kind \"" + kind +
                                    "\" (upper-half|lower-half|left-half|right-half)");
    }
    return m;
}

Tensor mask_from_image(const Tensor& img) {
    if (img.rank() != 3)
        throw std::invalid_argument("mask_from_image: expected {C,H,W}");
    const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
    Tensor m({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double mean = 0.0;
            for (int ch = 0; ch < c; ++ch) mean += img.at3(ch, y, x);
            m.at2(y, x) = (mean / c) > 0.0 ? 1.0 : 0.0;
        }
    return m;
}

Tensor filmstrip(const std::vector<Tensor>& frames) {
    if (frames.empty()) throw std::invalid_argument("filmstrip: no frames");
    const int c = frames[0].dim(0), h = frames[0].dim(1), w = frames[0].dim(2);
    for (const auto& f : frames) require_shape(f, {c, h, w}, "filmstrip frame");
    Tensor strip({c, h, w * static_cast<int>(frames.size())});
    for (size_t i = 0; i < frames.size(); ++i)
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    strip.at3(ch, y, static_cast<int>(i) * w + x) = frames[i].at3(ch, y, x);
    return strip;
}

std::vector<AugmentPlanEntry> missing_label_plan(const std::vector<ManifestRecord>& records,
                                                 const std::vector<std::string>& vocabulary) {
    std::vector<std::string> subject_order;
    std::set<std::pair<std::string, std::string>> have;
    for (const auto& r : records) {
        if (have.emplace(r.subject_id, r.label_name).second) {
            if (std::find(subject_order.begin(), subject_order.end(), r.subject_id) ==
                subject_order.end())
                subject_order.push_back(r.subject_id);
        }
    }
    std::vector<AugmentPlanEntry> plan;
    for (const auto& sid : subject_order)
        for (const auto& label : vocabulary)
            if (!have.count({sid, label})) plan.push_back({sid, label});
    return plan;
}

AugmentResult augment_dataset(const TrainState& s, const std::vector<ManifestRecord>& records,
                              const std::vector<Tensor>& images,
                              const std::vector<AugmentPlanEntry>& plan,
                              const std::vector<std::string>& vocabulary,
                              const std::optional<SynthOptions>& opts) {
    if (records.size() != images.size())
        throw std::invalid_argument("augment_dataset: records/images size mismatch");
    const SynthOptions o = resolve(s, opts);

    AugmentResult out;
    std::set<std::string> warned;
    for (const auto& entry : plan) {
        const Tensor* neutral = nullptr;
        for (size_t i = 0; i < records.size(); ++i)
            if (records[i].subject_id == entry.subject_id && records[i].label_name == "neutral") {
                neutral = &images[i];
                break;
            }
        if (!neutral) {
            if (warned.insert(entry.subject_id).second) ++out.skipped_subjects;
            continue;
        }
        Tensor img = synthesize(s, *neutral, one_hot_code(vocabulary, entry.label_name), o);
        ManifestRecord rec;
        rec.subject_id = entry.subject_id;
        rec.label_name = entry.label_name;
        rec.intensity = 1.0;
        rec.generated = true;
        out.new_records.push_back(rec);
        out.images.push_back(std::move(img));
    }
    return out;
}

}  // namespace dgan
