#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgan/label_embed.hpp"
#include "dgan/synthesis.hpp"
#include "dgan/synthetic_face.hpp"

using namespace dgan;

namespace {

RunConfig small_config() {
    RunConfig cfg;
    cfg.image_size = 16;
    cfg.base_width = 8;
    cfg.max_iterations = 0;
    return cfg;
}

Tensor random_face(int size, uint64_t seed) {
    Rng rng(seed);
    Tensor t({3, size, size});
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1, 1);
    return t;
}

}  // namespace

TEST_CASE("synthesize output shape and determinism without dropout") {
    TrainState s(small_config());
    Tensor x = random_face(16, 1);
    LabelCode code = one_hot_code(s.cfg.labels, "happiness");
    SynthOptions det{false, 0};
    Tensor a = synthesize(s, x, code, det);
    CHECK(a.shape() == std::vector<int>{3, 16, 16});
    Tensor b = synthesize(s, x, code, det);
    CHECK((a - b).abs_max() == 0.0);
}

TEST_CASE("dropout noise is reproducible from its seed") {
    TrainState s(small_config());
    Tensor x = random_face(16, 2);
    LabelCode code = one_hot_code(s.cfg.labels, "anger");
    Tensor a = synthesize(s, x, code, SynthOptions{true, 7});
    Tensor b = synthesize(s, x, code, SynthOptions{true, 7});
    Tensor c = synthesize(s, x, code, SynthOptions{true, 8});
    CHECK((a - b).abs_max() == 0.0);
    CHECK((a - c).abs_max() > 0.0);
}

TEST_CASE("wrong code length is rejected") {
    TrainState s(small_config());
    Tensor x = random_face(16, 3);
    CHECK_THROWS_AS(synthesize(s, x, LabelCode(4, 0.0), SynthOptions{false, 0}),
                    std::invalid_argument);
}

TEST_CASE("intensity grids") {
    const std::vector<double> want = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    auto got = sweep_intensities(10);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    CHECK(sweep_intensities(2) == std::vector<double>{0.1, 1.0});
    auto z = sweep_intensities(5, true);
    CHECK(z.front() == 0.0);
    CHECK(z.back() == 1.0);
    CHECK_THROWS_AS(sweep_intensities(1), std::invalid_argument);
}

TEST_CASE("intensity sweep emits one frame per step, reproducible mid-sweep") {
    TrainState s(small_config());
    Tensor x = random_face(16, 4);
    SynthOptions opt{true, 42};
    auto frames = intensity_sweep(s, x, 4, 10, false, opt);
    REQUIRE(frames.size() == 10);
    // repeating step 3 reproduces it: same dropout seed across the sweep
    LabelCode zero(7, 0.0);
    Tensor again = synthesize(s, x, scale_intensity(zero, 4, 0.4), opt);
    CHECK((frames[3] - again).abs_max() == 0.0);
}

TEST_CASE("compound sweep endpoints equal the pure-label syntheses") {
    TrainState s(small_config());
    Tensor x = random_face(16, 5);
    SynthOptions opt{true, 9};
    auto frames = compound_sweep(s, x, 4, 1, 11, opt);
    REQUIRE(frames.size() == 11);
    LabelCode zero(7, 0.0);
    Tensor pure_a = synthesize(s, x, scale_intensity(zero, 4, 1.0), opt);
    Tensor pure_b = synthesize(s, x, scale_intensity(zero, 1, 1.0), opt);
    CHECK((frames.front() - pure_a).abs_max() == 0.0);
    CHECK((frames.back() - pure_b).abs_max() == 0.0);
    // midpoint carries (0.5, 0.5) on the two labels
    LabelCode mid = scale_intensity(scale_intensity(zero, 4, 0.5), 1, 0.5);
    CHECK((frames[5] - synthesize(s, x, mid, opt)).abs_max() == 0.0);
    CHECK_THROWS_AS(compound_sweep(s, x, 2, 2, 5, opt), std::invalid_argument);
}

TEST_CASE("region composition with equal codes is bitwise plain synthesis") {
    TrainState s(small_config());
    Tensor x = random_face(16, 6);
    LabelCode a = one_hot_code(s.cfg.labels, "anger");
    SynthOptions opt{true, 33};
    for (const char* kind : {"upper-half", "lower-half", "left-half", "right-half"}) {
        Tensor mask = make_mask(kind, 16, 16);
        Tensor composed = region_compose_synthesis(s, x, a, a, mask, opt);
        Tensor plain = synthesize(s, x, a, opt);
        CHECK((composed - plain).abs_max() == 0.0);
    }
}

TEST_CASE("all-ones mask reduces composition to the first code") {
    TrainState s(small_config());
    Tensor x = random_face(16, 7);
    LabelCode a = one_hot_code(s.cfg.labels, "anger");
    LabelCode b = one_hot_code(s.cfg.labels, "happiness");
    Tensor ones = Tensor::full({16, 16}, 1.0);
    SynthOptions opt{false, 0};
    CHECK((region_compose_synthesis(s, x, a, b, ones, opt) - synthesize(s, x, a, opt)).abs_max() ==
          0.0);
    Tensor zeros({16, 16});
    CHECK((region_compose_synthesis(s, x, a, b, zeros, opt) - synthesize(s, x, b, opt)).abs_max() ==
          0.0);
}

TEST_CASE("make_mask kinds and mask_from_image") {
    Tensor upper = make_mask("upper-half", 8, 8);
    CHECK(upper.at2(0, 0) == 1.0);
    CHECK(upper.at2(7, 0) == 0.0);
    Tensor left = make_mask("left-half", 8, 8);
    CHECK(left.at2(0, 0) == 1.0);
    CHECK(left.at2(0, 7) == 0.0);
    CHECK_THROWS_AS(make_mask("diagonal", 8, 8), std::invalid_argument);

    Tensor img = Tensor::full({3, 4, 4}, -1.0);
    img.at3(0, 1, 2) = 1.0;
    img.at3(1, 1, 2) = 1.0;
    img.at3(2, 1, 2) = 1.0;
    Tensor m = mask_from_image(img);
    CHECK(m.at2(1, 2) == 1.0);
    CHECK(m.at2(0, 0) == 0.0);
}

TEST_CASE("filmstrip concatenates frames horizontally") {
    std::vector<Tensor> frames = {random_face(8, 10), random_face(8, 11), random_face(8, 12)};
    Tensor strip = filmstrip(frames);
    CHECK(strip.shape() == std::vector<int>{3, 8, 24});
    CHECK(strip.at3(1, 3, 8 + 2) == frames[1].at3(1, 3, 2));
}

TEST_CASE("missing_label_plan lists exactly the absent cells") {
    std::vector<ManifestRecord> recs = {
        {"s01", "neutral", 1.0, "", false},
        {"s01", "happiness", 1.0, "", false},
        {"s02", "neutral", 1.0, "", false},
    };
    auto plan = missing_label_plan(recs, RunConfig::default_labels());
    CHECK(plan.size() == 5 + 6);  // s01 misses 5 labels, s02 misses 6
    for (const auto& e : plan) CHECK(e.label_name != "neutral");
}

TEST_CASE("augment_dataset fills the plan and tags rows generated") {
    TrainState s(small_config());
    std::vector<ManifestRecord> recs = {{"s01", "neutral", 1.0, "", false}};
    std::vector<Tensor> imgs = {random_face(16, 13)};
    std::vector<AugmentPlanEntry> plan = {{"s01", "happiness"}, {"s01", "surprise"}};
    auto out = augment_dataset(s, recs, imgs, plan, s.cfg.labels, SynthOptions{false, 0});
    REQUIRE(out.new_records.size() == 2);
    CHECK(out.images.size() == 2);
    CHECK(out.skipped_subjects == 0);
    for (const auto& r : out.new_records) {
        CHECK(r.generated);
        CHECK(r.subject_id == "s01");
    }
    // source rows were not touched: caller appends
    CHECK(recs.size() == 1);
    CHECK_FALSE(recs[0].generated);
}

TEST_CASE("empty plan produces no output; missing neutral is skipped with a warning") {
    TrainState s(small_config());
    std::vector<ManifestRecord> recs = {{"s01", "happiness", 1.0, "", false}};
    std::vector<Tensor> imgs = {random_face(16, 14)};
    auto none = augment_dataset(s, recs, imgs, {}, s.cfg.labels, SynthOptions{false, 0});
    CHECK(none.new_records.empty());
    auto skipped = augment_dataset(s, recs, imgs, {{"s01", "anger"}}, s.cfg.labels,
                                   SynthOptions{false, 0});
    CHECK(skipped.new_records.empty());
    CHECK(skipped.skipped_subjects == 1);
}

TEST_CASE("a 30-subject manifest with 210 missing cells yields 210 generated images") {
    RunConfig cfg = small_config();
    cfg.labels = {"neutral", "anger", "disgust", "fear",
                  "happiness", "sadness", "surprise", "contempt"};
    TrainState s(cfg);
    std::vector<ManifestRecord> recs;
    std::vector<Tensor> imgs;
    for (int i = 0; i < 30; ++i) {
        recs.push_back({"subj" + std::to_string(i), "neutral", 1.0, "", false});
        imgs.push_back(random_face(16, 100 + static_cast<uint64_t>(i)));
    }
    auto plan = missing_label_plan(recs, cfg.labels);
    REQUIRE(plan.size() == 210);  // 30 subjects x 7 absent labels
    auto out = augment_dataset(s, recs, imgs, plan, cfg.labels, SynthOptions{false, 0});
    CHECK(out.new_records.size() == 210);
    CHECK(out.skipped_subjects == 0);
}
