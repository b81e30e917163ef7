#include "dgan/synthetic_face.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace dgan {

namespace {

constexpr int kSupersample = 4;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

int find_label(const std::vector<std::string>& labels, const std::string& name) {
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == name) return static_cast<int>(i);
    return -1;
}

double magnitude_of(const std::vector<std::string>& labels,
                    const std::vector<double>& attributes, const std::string& name) {
    const int i = find_label(labels, name);
    return i < 0 ? 0.0 : attributes[static_cast<size_t>(i)];
}

struct Rgb {
    double r, g, b;
};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

// Scene description in normalized [0,1]^2 coordinates, v pointing down.
struct FaceScene {
    Rgb bg{0.13, 0.14, 0.17};
    Rgb skin;
    Rgb nose_color;
    Rgb brow_color{0.16, 0.10, 0.07};
    Rgb sclera{0.97, 0.97, 0.98};
    Rgb pupil{0.10, 0.08, 0.08};
    Rgb mouth_color{0.18, 0.07, 0.07};

    double face_cx = 0.5, face_cy = 0.53, face_rx = 0.33, face_ry = 0.42;
    double eye_y = 0.44, eye_dx = 0.13, eye_rx = 0.065, eye_ry = 0.042;
    double pupil_r = 0.014;
    double brow_y = 0.365, brow_half = 0.052, brow_r = 0.018;
    double brow_tilt_inner = 0.0;  // inner-tip v offset (positive = down)
    double brow_tilt_outer = 0.0;
    double nose_top = 0.56, nose_bot = 0.63, nose_r = 0.012;
    double mouth_cy = 0.74, mouth_half = 0.10;
    double mouth_curv = 0.0;       // centerline swing
    double mouth_thick = 0.02;
    double feather = 0.01;         // soft-edge width, set per render size
};

FaceScene build_scene(const SyntheticFaceSpec& spec) {
    const FaceGeometry g = face_geometry(spec.labels, spec.attributes);
    FaceScene sc;
    const Rgb light{0.90, 0.76, 0.62}, dark{0.72, 0.55, 0.42};
    sc.skin = lerp(light, dark, spec.skin_tone);
    const double hue = (spec.face_hue - 0.5);
    sc.skin.r = clamp01(sc.skin.r + hue * 0.05);
    sc.skin.b = clamp01(sc.skin.b - hue * 0.05);
    sc.nose_color = {sc.skin.r * 0.9, sc.skin.g * 0.9, sc.skin.b * 0.9};
    sc.face_rx = 0.31 + 0.05 * spec.face_aspect;
    sc.eye_dx = 0.115 + 0.03 * spec.eye_spacing;
    sc.eye_ry = 0.016 + 0.044 * g.eye_openness;
    sc.brow_y = 0.365 - 0.038 * g.brow_height;
    sc.brow_tilt_inner = -g.brow_angle * 0.036;
    sc.brow_tilt_outer = g.brow_angle * 0.012;
    sc.mouth_curv = g.mouth_curvature * 0.040;
    sc.mouth_thick = 0.020 + 0.050 * g.mouth_openness;
    return sc;
}

// Signed distances (positive outside) feed soft coverage so that any
// geometry change, however small, moves the rendered image continuously.
double coverage(double sdf, double feather) {
    return clamp01(0.5 - sdf / feather);
}

double sdf_ellipse(double u, double v, double cx, double cy, double rx, double ry) {
    const double du = (u - cx) / rx, dv = (v - cy) / ry;
    const double f = std::sqrt(du * du + dv * dv) - 1.0;
    // first-order distance estimate: f / |grad f|
    const double gu = du / rx, gv = dv / ry;
    const double g = std::sqrt(gu * gu + gv * gv) / std::max(1e-9, std::sqrt(du * du + dv * dv));
    return f / std::max(1e-6, g);
}

double sdf_capsule(double u, double v, double x0, double y0, double x1, double y1, double r) {
    const double dx = x1 - x0, dy = y1 - y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((u - x0) * dx + (v - y0) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double px = x0 + t * dx, py = y0 + t * dy;
    return std::sqrt((u - px) * (u - px) + (v - py) * (v - py)) - r;
}

double sdf_circle(double u, double v, double cx, double cy, double r) {
    return std::sqrt((u - cx) * (u - cx) + (v - cy) * (v - cy)) - r;
}

Rgb shade(const FaceScene& sc, double u, double v) {
    const double fe = sc.feather;
    Rgb c = sc.bg;
    const double face_a =
        coverage(sdf_ellipse(u, v, sc.face_cx, sc.face_cy, sc.face_rx, sc.face_ry), fe);
    c = lerp(c, sc.skin, face_a);
    if (face_a <= 0.0) return c;

    c = lerp(c, sc.nose_color,
             face_a * coverage(sdf_capsule(u, v, 0.5, sc.nose_top, 0.5, sc.nose_bot, sc.nose_r), fe));

    // brows: tilts mirrored so the inner tips move together
    for (int side = -1; side <= 1; side += 2) {
        const double cx = 0.5 + side * sc.eye_dx;
        const double xi = cx - side * sc.brow_half;  // inner end (toward nose)
        const double xo = cx + side * sc.brow_half;
        const double d = sdf_capsule(u, v, xi, sc.brow_y + sc.brow_tilt_inner, xo,
                                     sc.brow_y + sc.brow_tilt_outer, sc.brow_r);
        c = lerp(c, sc.brow_color, face_a * coverage(d, fe));
    }
    for (int side = -1; side <= 1; side += 2) {
        const double cx = 0.5 + side * sc.eye_dx;
        const double eye_a =
            coverage(sdf_ellipse(u, v, cx, sc.eye_y, sc.eye_rx, sc.eye_ry), fe);
        c = lerp(c, sc.sclera, eye_a);
        const double pupil_a = coverage(sdf_circle(u, v, cx, sc.eye_y, sc.pupil_r), fe);
        c = lerp(c, sc.pupil, eye_a * pupil_a);
    }

    const double s = (u - 0.5) / sc.mouth_half;
    const double scl = std::clamp(s, -1.0, 1.0);
    const double center = sc.mouth_cy + sc.mouth_curv * (0.5 - scl * scl);
    const double thick = sc.mouth_thick * std::sqrt(std::max(0.05, 1.0 - 0.6 * scl * scl));
    const double dv = std::fabs(v - center) - thick;
    const double duu = (std::fabs(s) - 1.0) * sc.mouth_half;
    const double d_mouth = std::max(dv, duu);
    c = lerp(c, sc.mouth_color, coverage(d_mouth, fe));
    return c;
}

// Measurement helpers ------------------------------------------------------

double lum01(const Tensor& img, int y, int x) {
    const double l = (img.at3(0, y, x) + img.at3(1, y, x) + img.at3(2, y, x)) / 3.0;
    return (l + 1.0) / 2.0;
}

struct Band {
    double u0, u1, v0, v1;
    bool contains(double u, double v) const { return u >= u0 && u < u1 && v >= v0 && v < v1; }
};

// Smooth, untruncated weights: the anti-aliased tails carry the sub-pixel
// position of a feature, so no hard darkness cutoff is applied. Squaring
// boosts the feature-to-skin contrast without introducing a cliff.
double dark_weight(double lum) { return (1.0 - lum) * (1.0 - lum); }

double bright_weight(double lum) {
    const double d = std::max(0.0, lum - 0.70);
    return d * d;
}

// Darkness-weighted center of mass of v over the given bands.
double dark_com_v(const Tensor& img, const std::vector<Band>& bands) {
    const int h = img.dim(1), w = img.dim(2);
    double mass = 1e-9, moment = 0.0;
    double vmid = 0.0;
    for (const auto& b : bands) vmid += (b.v0 + b.v1) / 2.0;
    vmid /= static_cast<double>(bands.size());
    moment = vmid * 1e-9;
    for (int y = 0; y < h; ++y) {
        const double v = (y + 0.5) / h;
        for (int x = 0; x < w; ++x) {
            const double u = (x + 0.5) / w;
            bool inside = false;
            for (const auto& b : bands)
                if (b.contains(u, v)) {
                    inside = true;
                    break;
                }
            if (!inside) continue;
            const double wgt = dark_weight(lum01(img, y, x));
            mass += wgt;
            moment += wgt * v;
        }
    }
    return moment / mass;
}

double dark_mass(const Tensor& img, const Band& b) {
    const int h = img.dim(1), w = img.dim(2);
    double mass = 0.0;
    int count = 0;
    for (int y = 0; y < h; ++y) {
        const double v = (y + 0.5) / h;
        for (int x = 0; x < w; ++x) {
            const double u = (x + 0.5) / w;
            if (!b.contains(u, v)) continue;
            mass += dark_weight(lum01(img, y, x));
            ++count;
        }
    }
    return count > 0 ? mass / count : 0.0;
}

double bright_mass(const Tensor& img, const std::vector<Band>& bands) {
    const int h = img.dim(1), w = img.dim(2);
    double mass = 0.0;
    int count = 0;
    for (int y = 0; y < h; ++y) {
        const double v = (y + 0.5) / h;
        for (int x = 0; x < w; ++x) {
            const double u = (x + 0.5) / w;
            bool inside = false;
            for (const auto& b : bands)
                if (b.contains(u, v)) {
                    inside = true;
                    break;
                }
            if (!inside) continue;
            mass += bright_weight(lum01(img, y, x));
            ++count;
        }
    }
    return count > 0 ? mass / count : 0.0;
}

// smile: corner dark mass rises above the center dark mass
double measure_mouth_curvature(const Tensor& img) {
    const std::vector<Band> center = {{0.5 - 0.045, 0.5 + 0.045, 0.655, 0.825}};
    const std::vector<Band> corners = {{0.5 - 0.115, 0.5 - 0.050, 0.655, 0.825},
                                       {0.5 + 0.050, 0.5 + 0.115, 0.655, 0.825}};
    return dark_com_v(img, center) - dark_com_v(img, corners);
}

double measure_mouth_mass(const Tensor& img) {
    return dark_mass(img, {0.39, 0.61, 0.655, 0.825});
}

double measure_sclera(const Tensor& img) {
    return bright_mass(img, {{0.28, 0.47, 0.40, 0.48}, {0.53, 0.72, 0.40, 0.48}});
}

double measure_brow_tilt(const Tensor& img) {
    const std::vector<Band> inner = {{0.39, 0.47, 0.27, 0.41}, {0.53, 0.61, 0.27, 0.41}};
    const std::vector<Band> outer = {{0.27, 0.36, 0.27, 0.41}, {0.64, 0.73, 0.27, 0.41}};
    return dark_com_v(img, inner) - dark_com_v(img, outer);
}

const char* kMeasurableLabels[] = {"anger", "disgust", "fear", "happiness", "sadness", "surprise"};

}  // namespace

void SyntheticFaceSpec::validate() const {
    auto chk = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument(std::string("synthetic face: ") + name +
                                        " outside [0,1]: " + std::to_string(v));
    };
    chk(face_hue, "face_hue");
    chk(face_aspect, "face_aspect");
    chk(eye_spacing, "eye_spacing");
    chk(skin_tone, "skin_tone");
    if (labels.size() != attributes.size())
        throw std::invalid_argument("synthetic face: labels/attributes size mismatch");
    for (double a : attributes) chk(a, "attribute magnitude");
}

FaceGeometry face_geometry(const std::vector<std::string>& labels,
                           const std::vector<double>& attributes) {
    if (labels.size() != attributes.size())
        throw std::invalid_argument("face_geometry: labels/attributes size mismatch");
    const double hap = magnitude_of(labels, attributes, "happiness");
    const double sad = magnitude_of(labels, attributes, "sadness");
    const double sur = magnitude_of(labels, attributes, "surprise");
    const double fea = magnitude_of(labels, attributes, "fear");
    const double dis = magnitude_of(labels, attributes, "disgust");
    const double ang = magnitude_of(labels, attributes, "anger");

    FaceGeometry g;
    g.mouth_curvature = std::clamp(hap * 1.0 - sad * 0.9 - dis * 0.3 - ang * 0.2, -1.0, 1.0);
    g.mouth_openness = clamp01(0.15 + sur * 0.85 + fea * 0.20 + hap * 0.10);
    g.eye_openness = std::clamp(0.60 + sur * 0.35 + fea * 0.40 - dis * 0.45, 0.05, 1.0);
    g.brow_angle = std::clamp(-ang * 1.0 + sad * 0.40 + fea * 0.20, -1.0, 1.0);
    g.brow_height = clamp01(0.30 + sur * 0.60 + fea * 0.30);
    return g;
}

Tensor render_synthetic_face(const SyntheticFaceSpec& spec, int size) {
    spec.validate();
    if (size < 8) throw std::invalid_argument("render_synthetic_face: size too small");
    FaceScene sc = build_scene(spec);
    sc.feather = 0.75 / size;
    Tensor img({3, size, size});
    const int ss = kSupersample;
    const double inv = 1.0 / (size * ss);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            Rgb acc{0, 0, 0};
            for (int sy = 0; sy < ss; ++sy)
                for (int sx = 0; sx < ss; ++sx) {
                    const double u = (x * ss + sx + 0.5) * inv;
                    const double v = (y * ss + sy + 0.5) * inv;
                    const Rgb c = shade(sc, u, v);
                    acc.r += c.r;
                    acc.g += c.g;
                    acc.b += c.b;
                }
            const double n = ss * ss;
            img.at3(0, y, x) = acc.r / n * 2.0 - 1.0;
            img.at3(1, y, x) = acc.g / n * 2.0 - 1.0;
            img.at3(2, y, x) = acc.b / n * 2.0 - 1.0;
        }
    }
    return img;
}

double measure_attribute(const Tensor& img, const std::string& label) {
    if (img.rank() != 3 || img.dim(0) != 3)
        throw std::invalid_argument("measure_attribute: expected {3,H,W}, got " +
                                    shape_str(img.shape()));
    if (label == "happiness") return measure_mouth_curvature(img);
    if (label == "sadness") return -measure_mouth_curvature(img);
    if (label == "surprise") return measure_mouth_mass(img);
    if (label == "fear") return measure_sclera(img);
    if (label == "disgust") return -measure_sclera(img);
    if (label == "anger") return measure_brow_tilt(img);
    if (label == "neutral") return 0.0;
    throw std::invalid_argument("measure_attribute: no measurement for label \"" + label + "\"");
}

SyntheticOracle::SyntheticOracle(std::vector<SyntheticIdentity> identities,
                                 std::vector<std::string> labels, int image_size)
    : identities_(std::move(identities)), labels_(std::move(labels)), image_size_(image_size) {}

Tensor SyntheticOracle::render(int subject, const LabelCode& code) const {
    if (subject < 0 || subject >= subject_count())
        throw std::out_of_range("oracle: subject index out of range");
    if (code.size() != labels_.size())
        throw std::invalid_argument("oracle: code length " + std::to_string(code.size()) +
                                    " != label count " + std::to_string(labels_.size()));
    const SyntheticIdentity& id = identities_[static_cast<size_t>(subject)];
    SyntheticFaceSpec spec;
    spec.face_hue = id.face_hue;
    spec.face_aspect = id.face_aspect;
    spec.eye_spacing = id.eye_spacing;
    spec.skin_tone = id.skin_tone;
    spec.labels = labels_;
    spec.attributes = code;
    return render_synthetic_face(spec, image_size_);
}

Tensor SyntheticOracle::render_label(int subject, const std::string& label,
                                     double intensity) const {
    LabelCode code(labels_.size(), 0.0);
    const int idx = find_label(labels_, label);
    if (idx < 0) throw std::invalid_argument("oracle: unknown label \"" + label + "\"");
    code[static_cast<size_t>(idx)] = intensity;
    return render(subject, code);
}

double SyntheticOracle::measure(const std::string& label, const Tensor& img) const {
    return measure_attribute(img, label);
}

bool SyntheticOracle::probe(int subject, const std::string& label, const Tensor& img) const {
    const double threshold = measure(label, render_label(subject, label, 0.5));
    return measure(label, img) >= threshold;
}

SyntheticDataset gen_synthetic_dataset(int n_subjects, const std::vector<std::string>& labels,
                                       uint64_t seed, int image_size) {
    if (n_subjects < 1) throw std::invalid_argument("gen_synthetic_dataset: n_subjects must be >= 1");
    std::vector<std::string> vocab = labels;
    if (find_label(vocab, "neutral") < 0) vocab.insert(vocab.begin(), "neutral");
    for (const auto& l : vocab)
        if (l != "neutral" && find_label(std::vector<std::string>(std::begin(kMeasurableLabels),
                                                                  std::end(kMeasurableLabels)),
                                         l) < 0)
            throw std::invalid_argument("gen_synthetic_dataset: no renderer profile for label \"" +
                                        l + "\"");

    Rng rng(derive_seed(seed, 0xFACEull));
    std::vector<SyntheticIdentity> ids;
    ids.reserve(static_cast<size_t>(n_subjects));
    for (int i = 0; i < n_subjects; ++i) {
        SyntheticIdentity id;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "s%03d", i);
        id.subject_id = buf;
        id.face_hue = rng.uniform();
        id.face_aspect = rng.uniform();
        id.eye_spacing = rng.uniform();
        id.skin_tone = rng.uniform();
        ids.push_back(id);
    }

    SyntheticDataset ds;
    ds.oracle = SyntheticOracle(ids, vocab, image_size);
    for (int s = 0; s < n_subjects; ++s) {
        for (const auto& label : vocab) {
            Tensor img = ds.oracle.render_label(s, label, 1.0);
            // quantize onto the 8-bit lattice so in-memory and on-disk flows match
            Tensor quant = normalize_image(denormalize_image(img), image_size, image_size, 3);
            ManifestRecord rec;
            rec.subject_id = ids[static_cast<size_t>(s)].subject_id;
            rec.label_name = label;
            rec.intensity = 1.0;
            ds.records.push_back(rec);
            ds.images.push_back(std::move(quant));
        }
    }
    return ds;
}

void write_synthetic_dataset(SyntheticDataset& ds, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (size_t i = 0; i < ds.records.size(); ++i) {
        auto& rec = ds.records[i];
        const std::string name = rec.subject_id + "_" + rec.label_name + ".png";
        save_image_tensor(out_dir + "/" + name, ds.images[i]);
        rec.image_path = name;
    }
    write_manifest(out_dir + "/manifest.csv", ds.records);
}

}  // namespace dgan
