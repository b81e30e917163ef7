#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "dgan/datapipe.hpp"
#include "dgan/rng.hpp"
#include "dgan/synthetic_face.hpp"

using namespace dgan;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kVocab = RunConfig::default_labels();

SyntheticFaceSpec spec_with(const std::string& label, double magnitude,
                            double hue = 0.5, double aspect = 0.5, double spacing = 0.5,
                            double tone = 0.5) {
    SyntheticFaceSpec s;
    s.face_hue = hue;
    s.face_aspect = aspect;
    s.eye_spacing = spacing;
    s.skin_tone = tone;
    s.labels = kVocab;
    s.attributes.assign(kVocab.size(), 0.0);
    if (!label.empty())
        for (size_t i = 0; i < kVocab.size(); ++i)
            if (kVocab[i] == label) s.attributes[i] = magnitude;
    return s;
}

}  // namespace

TEST_CASE("rendering is a pure function of the spec") {
    SyntheticFaceSpec s = spec_with("happiness", 0.7, 0.3, 0.8, 0.2, 0.6);
    Tensor a = render_synthetic_face(s, 64);
    Tensor b = render_synthetic_face(s, 64);
    CHECK(a.shape() == std::vector<int>{3, 64, 64});
    CHECK((a - b).abs_max() == 0.0);
    CHECK(a.min() >= -1.0);
    CHECK(a.max() <= 1.0);
}

TEST_CASE("out-of-range spec fields are rejected") {
    SyntheticFaceSpec s = spec_with("anger", 0.5);
    s.skin_tone = 1.5;
    CHECK_THROWS_AS(render_synthetic_face(s), std::invalid_argument);
    s = spec_with("anger", 0.5);
    s.attributes[1] = -0.1;
    CHECK_THROWS_AS(render_synthetic_face(s), std::invalid_argument);
}

TEST_CASE("mouth arc height grows strictly with curvature magnitude") {
    const double m0 = measure_attribute(render_synthetic_face(spec_with("happiness", 0.0)), "happiness");
    const double m5 = measure_attribute(render_synthetic_face(spec_with("happiness", 0.5)), "happiness");
    const double m1 = measure_attribute(render_synthetic_face(spec_with("happiness", 1.0)), "happiness");
    CHECK(m0 < m5);
    CHECK(m5 < m1);
}

TEST_CASE("attribute measurements are strictly monotone across random identities") {
    Rng rng(101);
    const std::vector<std::string> probe = {"anger", "disgust", "fear",
                                            "happiness", "sadness", "surprise"};
    const double mags[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int trial = 0; trial < 100; ++trial) {
        const std::string& label = probe[static_cast<size_t>(trial % 6)];
        const double hue = rng.uniform(), aspect = rng.uniform();
        const double spacing = rng.uniform(), tone = rng.uniform();
        double prev = -1e9;
        for (double m : mags) {
            Tensor img = render_synthetic_face(spec_with(label, m, hue, aspect, spacing, tone), 32);
            const double meas = measure_attribute(img, label);
            CHECK(meas > prev);
            prev = meas;
        }
    }
}

TEST_CASE("identity changes concentrate outside the attribute regions") {
    Tensor a = render_synthetic_face(spec_with("", 0, 0.2, 0.3, 0.4, 0.25), 64);
    Tensor b = render_synthetic_face(spec_with("", 0, 0.8, 0.7, 0.6, 0.75), 64);
    double inside = 0.0, outside = 0.0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            const double u = (x + 0.5) / 64.0, v = (y + 0.5) / 64.0;
            const bool mouth = u >= 0.39 && u < 0.61 && v >= 0.655 && v < 0.825;
            const bool eyes = ((u >= 0.28 && u < 0.47) || (u >= 0.53 && u < 0.72)) &&
                              v >= 0.40 && v < 0.48;
            double d = 0.0;
            for (int c = 0; c < 3; ++c) d += std::fabs(a.at3(c, y, x) - b.at3(c, y, x));
            (mouth || eyes ? inside : outside) += d;
        }
    CHECK(outside > inside);
}

TEST_CASE("oracle renders at intensity zero equal the neutral render") {
    auto ds = gen_synthetic_dataset(3, kVocab, 42, 32);
    for (int s = 0; s < 3; ++s) {
        Tensor neutral = ds.oracle.render_label(s, "neutral", 1.0);
        Tensor zero = ds.oracle.render_label(s, "happiness", 0.0);
        CHECK((neutral - zero).abs_max() == 0.0);
    }
}

TEST_CASE("half-intensity renders measure between the endpoints") {
    auto ds = gen_synthetic_dataset(4, kVocab, 7, 32);
    for (int s = 0; s < 4; ++s)
        for (const auto& label : {"happiness", "surprise", "anger"}) {
            const double lo = ds.oracle.measure(label, ds.oracle.render_label(s, label, 0.0));
            const double mid = ds.oracle.measure(label, ds.oracle.render_label(s, label, 0.5));
            const double hi = ds.oracle.measure(label, ds.oracle.render_label(s, label, 1.0));
            CHECK(lo < mid);
            CHECK(mid < hi);
        }
}

TEST_CASE("10 subjects and 7 labels yield 70 images") {
    auto ds = gen_synthetic_dataset(10, kVocab, 3, 32);
    CHECK(ds.records.size() == 70);
    CHECK(ds.images.size() == 70);
    CHECK(ds.oracle.subject_count() == 10);
    // every (subject,label) cell appears exactly once
    std::set<std::pair<std::string, std::string>> cells;
    for (const auto& r : ds.records) cells.emplace(r.subject_id, r.label_name);
    CHECK(cells.size() == 70);
}

TEST_CASE("dataset generation is deterministic in the seed") {
    auto a = gen_synthetic_dataset(2, kVocab, 5, 32);
    auto b = gen_synthetic_dataset(2, kVocab, 5, 32);
    auto c = gen_synthetic_dataset(2, kVocab, 6, 32);
    CHECK((a.images[0] - b.images[0]).abs_max() == 0.0);
    CHECK((a.images[0] - c.images[0]).abs_max() > 0.0);
}

TEST_CASE("probe sanity: full-intensity renders pass, neutral renders fail") {
    auto ds = gen_synthetic_dataset(5, kVocab, 11, 32);
    int full_pass = 0, neutral_pass = 0, total = 0;
    for (int s = 0; s < 5; ++s) {
        Tensor neutral = ds.oracle.render_label(s, "neutral", 1.0);
        for (const auto& label : {"anger", "disgust", "fear", "happiness", "sadness", "surprise"}) {
            if (ds.oracle.probe(s, label, ds.oracle.render_label(s, label, 1.0))) ++full_pass;
            if (ds.oracle.probe(s, label, neutral)) ++neutral_pass;
            ++total;
        }
    }
    CHECK(full_pass == total);   // probe self-consistency: accuracy 1.0
    CHECK(neutral_pass == 0);    // neutral faces never pass
}

TEST_CASE("written dataset round-trips through the manifest loader") {
    auto ds = gen_synthetic_dataset(2, kVocab, 9, 32);
    const fs::path dir = fs::temp_directory_path() / "dgan_synth_ds_test";
    fs::remove_all(dir);
    write_synthetic_dataset(ds, dir.string());
    auto records = load_manifest((dir / "manifest.csv").string(), kVocab);
    CHECK(records.size() == 14);
    PairSet ps = build_pairs(records, kVocab, dir.string());
    CHECK(ps.pairs.size() == 14);
    CHECK(ps.skipped_subjects == 0);
    // on-disk images match the in-memory (quantized) ones
    Tensor back = load_image_tensor((dir / records[0].image_path).string());
    CHECK((back - ds.images[0]).abs_max() == 0.0);
    fs::remove_all(dir);
}

TEST_CASE("geometry drivers respond to their labels") {
    std::vector<double> attrs(kVocab.size(), 0.0);
    FaceGeometry base = face_geometry(kVocab, attrs);
    CHECK(base.mouth_curvature == 0.0);

    attrs[4] = 1.0;  // happiness
    CHECK(face_geometry(kVocab, attrs).mouth_curvature > 0.9);
    attrs[4] = 0.0;
    attrs[5] = 1.0;  // sadness
    CHECK(face_geometry(kVocab, attrs).mouth_curvature < -0.5);
    attrs[5] = 0.0;
    attrs[6] = 1.0;  // surprise
    CHECK(face_geometry(kVocab, attrs).mouth_openness > 0.9);
    attrs[6] = 0.0;
    attrs[1] = 1.0;  // anger
    CHECK(face_geometry(kVocab, attrs).brow_angle < -0.9);
}
