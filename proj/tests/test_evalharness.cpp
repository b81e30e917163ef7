#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "dgan/evalharness.hpp"
#include "dgan/objectives.hpp"
#include "dgan/synthesis.hpp"

using namespace dgan;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kVocab = RunConfig::default_labels();

std::vector<Tensor> bright_dark_toyset(int n_per_class, int size, uint64_t seed,
                                       std::vector<int>* labels) {
    Rng rng(seed);
    std::vector<Tensor> images;
    for (int i = 0; i < 2 * n_per_class; ++i) {
        const int cls = i % 2;
        Tensor t({3, size, size});
        for (int64_t j = 0; j < t.size(); ++j)
            t[j] = (cls == 0 ? -0.6 : 0.6) + 0.2 * rng.uniform(-1, 1);
        images.push_back(std::move(t));
        labels->push_back(cls);
    }
    return images;
}

}  // namespace

TEST_CASE("ablation regimes differ from the base config in exactly the switch fields") {
    RunConfig base;
    base.max_iterations = 10;

    RunConfig std_only = ablation_regime_config(base, "standard-only");
    auto d1 = config_diff_fields(base, std_only);
    CHECK(d1 == std::vector<std::string>{"lambda_diff", "update_diff_d"});

    RunConfig diff_only = ablation_regime_config(base, "diff-only");
    auto d2 = config_diff_fields(base, diff_only);
    CHECK(d2 == std::vector<std::string>{"lambda_standard", "update_standard_d"});

    RunConfig both = ablation_regime_config(base, "both");
    CHECK(config_diff_fields(base, both).empty());

    CHECK_THROWS_AS(ablation_regime_config(base, "nope"), std::invalid_argument);
    CHECK(ablation_regimes() == std::vector<std::string>{"standard-only", "diff-only", "both"});
}

TEST_CASE("identity metric building blocks") {
    auto ds = gen_synthetic_dataset(2, kVocab, 3, 32);
    Tensor truth = ds.oracle.render_label(0, "happiness", 1.0);
    // synthesizing with the oracle itself gives zero error
    CHECK(loss_recon(truth, truth) == 0.0);
    // constant-gray output scores mean |truth - 0|
    Tensor gray(truth.shape());
    double want = 0.0;
    for (int64_t i = 0; i < truth.size(); ++i) want += std::fabs(truth[i]);
    want /= static_cast<double>(truth.size());
    CHECK(loss_recon(truth, gray) == doctest::Approx(want).epsilon(1e-12));
    // symmetric under channel permutation of both images
    Tensor truth_p(truth.shape()), gray_p(gray.shape());
    const int hw = truth.dim(1) * truth.dim(2);
    for (int c = 0; c < 3; ++c)
        for (int p = 0; p < hw; ++p) {
            truth_p[((c + 1) % 3) * hw + p] = truth[c * hw + p];
            gray_p[((c + 1) % 3) * hw + p] = gray[c * hw + p];
        }
    CHECK(loss_recon(truth_p, gray_p) == doctest::Approx(loss_recon(truth, gray)).epsilon(1e-12));
}

TEST_CASE("transfer accuracy on an untrained generator sits near the neutral-pass rate") {
    RunConfig cfg;
    cfg.image_size = 32;
    cfg.base_width = 8;
    TrainState s(cfg);
    auto ds = gen_synthetic_dataset(3, kVocab, 5, 32);
    const std::vector<int> subjects = {0, 1, 2};
    const double acc = transfer_accuracy(s, ds.oracle, subjects, kVocab);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    // order invariance
    const double acc2 = transfer_accuracy(s, ds.oracle, {2, 0, 1}, kVocab);
    CHECK(acc == doctest::Approx(acc2));
    CHECK_THROWS_AS(transfer_accuracy(s, ds.oracle, {}, kVocab), std::invalid_argument);
}

TEST_CASE("identity_error is pure and positive for an untrained model") {
    RunConfig cfg;
    cfg.image_size = 32;
    cfg.base_width = 8;
    TrainState s(cfg);
    auto ds = gen_synthetic_dataset(2, kVocab, 6, 32);
    const double e1 = identity_error(s, ds.oracle, {0, 1}, kVocab);
    const double e2 = identity_error(s, ds.oracle, {0, 1}, kVocab);
    CHECK(e1 == e2);
    CHECK(e1 > 0.0);
}

TEST_CASE("classifier reaches full accuracy on a linearly separable toy set") {
    std::vector<int> labels;
    auto images = bright_dark_toyset(12, 16, 7, &labels);
    ClassifierConfig cfg;
    cfg.image_size = 16;
    cfg.n_classes = 2;
    cfg.base_width = 4;
    cfg.iterations = 80;
    cfg.batch_size = 8;
    cfg.seed = 3;
    Classifier clf = train_classifier(images, labels, cfg);
    CHECK(classifier_accuracy(clf, images, labels) == doctest::Approx(1.0));
    // deterministic post-training, and labels stay in the vocabulary
    for (size_t i = 0; i < images.size(); ++i) {
        const int c = classify(clf, images[i]);
        CHECK(c == classify(clf, images[i]));
        CHECK(c >= 0);
        CHECK(c < 2);
    }
}

TEST_CASE("single-class training sets are rejected") {
    std::vector<Tensor> images(4, Tensor({3, 16, 16}));
    std::vector<int> labels(4, 0);
    ClassifierConfig cfg;
    cfg.image_size = 16;
    cfg.n_classes = 2;
    CHECK_THROWS_WITH_AS(train_classifier(images, labels, cfg),
                         doctest::Contains("single class"), std::invalid_argument);
}

TEST_CASE("fold assignment partitions subjects deterministically") {
    std::vector<std::string> subjects = {"d", "b", "a", "c"};
    auto folds = assign_folds(subjects, 2, 5);
    REQUIRE(folds.size() == 2);
    CHECK(folds[0].size() == 2);
    CHECK(folds[1].size() == 2);
    std::set<std::string> all;
    for (const auto& f : folds)
        for (const auto& s : f) all.insert(s);
    CHECK(all.size() == 4);
    auto again = assign_folds(subjects, 2, 5);
    CHECK(folds == again);
    CHECK(assign_folds(subjects, 2, 6) != folds);
    CHECK_THROWS_WITH_AS(assign_folds(subjects, 5, 1), doctest::Contains("exceeds"),
                         std::invalid_argument);
}

TEST_CASE("kfold is subject-independent and deterministic") {
    auto ds = gen_synthetic_dataset(6, kVocab, 11, 16);
    KfoldOptions opts;
    opts.k = 3;
    opts.mode = AugmentationMode::None;
    opts.seed = 2;
    opts.vocabulary = kVocab;
    opts.classifier.image_size = 16;
    opts.classifier.n_classes = 7;
    opts.classifier.base_width = 4;
    opts.classifier.iterations = 20;
    opts.classifier.batch_size = 8;

    EvalReport a = kfold_evaluate(ds.records, ds.images, opts);
    EvalReport b = kfold_evaluate(ds.records, ds.images, opts);
    CHECK(eval_reports_equal(a, b));
    REQUIRE(a.rows.size() == 3);
    for (const auto& row : a.rows) {
        CHECK(row.config == "none");
        CHECK(row.classifier_acc >= 0.0);
        CHECK(row.classifier_acc <= 1.0);
        CHECK(std::isnan(row.transfer_acc));
    }
    // folds partition the 6 subjects 2+2+2
    auto folds = assign_folds({"s000", "s001", "s002", "s003", "s004", "s005"}, 3, opts.seed);
    std::set<std::string> seen;
    for (const auto& f : folds) {
        CHECK(f.size() == 2);
        for (const auto& s : f) CHECK(seen.insert(s).second);
    }
}

TEST_CASE("kfold modes: linear multiplies the training set, dgan needs a state") {
    auto ds = gen_synthetic_dataset(4, kVocab, 13, 16);
    KfoldOptions opts;
    opts.k = 2;
    opts.mode = AugmentationMode::Dgan;
    opts.seed = 1;
    opts.vocabulary = kVocab;
    CHECK_THROWS_WITH_AS(kfold_evaluate(ds.records, ds.images, opts),
                         doctest::Contains("trained state"), std::invalid_argument);
}

TEST_CASE("report emit/parse round-trip") {
    EvalReport report;
    report.rows.push_back({"both", 11, 0, 0.83, 0.042, std::nan("")});
    report.rows.push_back({"standard-only", 11, 0, 0.55, 0.05, std::nan("")});
    report.rows.push_back({"none", 2, 3, std::nan(""), std::nan(""), 0.61});

    const fs::path dir = fs::temp_directory_path() / "dgan_eval_report_test";
    fs::create_directories(dir);
    const std::string path = (dir / "report.csv").string();
    emit_report(report, path);
    EvalReport back = parse_report(path);
    CHECK(eval_reports_equal(report, back));
    CHECK(fs::exists(path + ".txt"));

    EvalReport empty;
    emit_report(empty, path);
    EvalReport back_empty = parse_report(path);
    CHECK(back_empty.rows.empty());
    fs::remove_all(dir);
}
