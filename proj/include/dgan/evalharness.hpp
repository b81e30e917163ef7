#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dgan/config.hpp"
#include "dgan/nn.hpp"
#include "dgan/synthetic_face.hpp"
#include "dgan/trainer.hpp"

namespace dgan {

// One evaluation row. Metrics that do not apply to a protocol are NaN
// (ablation rows have no classifier accuracy, k-fold rows no transfer
// metrics).
struct EvalRow {
    std::string config;
    uint64_t seed = 0;
    int fold = 0;
    double transfer_acc = std::nan("");
    double identity_err = std::nan("");
    double classifier_acc = std::nan("");
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

bool eval_reports_equal(const EvalReport& a, const EvalReport& b);

// Fraction of (subject, non-neutral label) cells whose synthesis from the
// subject's neutral render passes the oracle's attribute probe.
double transfer_accuracy(const TrainState& s, const SyntheticOracle& oracle,
                         const std::vector<int>& test_subjects,
                         const std::vector<std::string>& labels);

// Mean per-pixel L1 between syntheses and the oracle's ground-truth renders
// of (same identity, target attribute).
double identity_error(const TrainState& s, const SyntheticOracle& oracle,
                      const std::vector<int>& test_subjects,
                      const std::vector<std::string>& labels);

// ---------------------------------------------------------------- ablation

struct AblationContext {
    const SyntheticOracle* oracle = nullptr;  // held-out identities
    std::vector<int> test_subjects;
    std::vector<std::string> probe_labels;    // non-neutral labels to probe
    int parallelism = 2;
};

// The three regimes differ from the base config in exactly
// (lambda_diff, lambda_standard, update_diff_d, update_standard_d).
RunConfig ablation_regime_config(const RunConfig& base, const std::string& regime);
std::vector<std::string> ablation_regimes();  // standard-only, diff-only, both

// Trains each regime for each seed with identical budgets and reports
// transfer accuracy and identity error on the held-out oracle.
EvalReport run_ablation(const RunConfig& base_cfg, const std::vector<TrainingPair>& train_data,
                        const AblationContext& ctx, const std::vector<uint64_t>& seeds);

// -------------------------------------------------------------- classifier

struct ClassifierConfig {
    int image_size = 32;
    int n_classes = 7;
    int base_width = 12;
    int64_t iterations = 500;
    int batch_size = 32;
    double learning_rate = 1e-3;
    uint64_t seed = 1;
};

// Small convolutional classifier: three stride-2 conv blocks and two fully
// connected layers, cross-entropy trained with the same Adam machinery as
// the generative model.
class Classifier {
public:
    Classifier() = default;
    Classifier(const ClassifierConfig& cfg, Rng& rng);

    Tensor logits(const Tensor& images);        // train path {N,C} logits
    Tensor logits_infer(const Tensor& images) const;
    void backward_from_logits(const Tensor& dlogits);
    void zero_grad();
    void params(std::vector<ParamRef>& out, const std::string& prefix);
    const ClassifierConfig& cfg() const { return cfg_; }

private:
    ClassifierConfig cfg_;
    Conv2d c1_, c2_, c3_;
    BatchNorm2d bn2_, bn3_;
    ReLU r1_, r2_, r3_, r4_;
    Dense fc1_, fc2_;
    int flat_dim_ = 0;
};

Classifier train_classifier(const std::vector<Tensor>& images, const std::vector<int>& labels,
                            const ClassifierConfig& cfg);
int classify(const Classifier& clf, const Tensor& image);
double classifier_accuracy(const Classifier& clf, const std::vector<Tensor>& images,
                           const std::vector<int>& labels);

// ------------------------------------------------------------------ k-fold

enum class AugmentationMode { None, Linear, Dgan };
std::string augmentation_mode_name(AugmentationMode m);

struct KfoldOptions {
    int k = 5;
    AugmentationMode mode = AugmentationMode::None;
    const TrainState* dgan_state = nullptr;  // required for Dgan mode
    ClassifierConfig classifier;
    uint64_t seed = 1;
    std::vector<std::string> vocabulary;
};

// Subject-independent k-fold cross validation: subjects are sorted,
// seeded-shuffled and dealt round-robin into folds; only the training split
// is augmented; held-out folds are scored on their real images only.
EvalReport kfold_evaluate(const std::vector<ManifestRecord>& records,
                          const std::vector<Tensor>& images, const KfoldOptions& opts);

// Deterministic fold assignment, exposed for the subject-independence checks.
std::vector<std::vector<std::string>> assign_folds(std::vector<std::string> subjects, int k,
                                                   uint64_t seed);

// --------------------------------------------------------------- reporting

// CSV `config,seed,fold,transfer_acc,identity_err,classifier_acc` at path,
// plus a text table with per-config means at path + ".txt".
void emit_report(const EvalReport& report, const std::string& path);
EvalReport parse_report(const std::string& path);

}  // namespace dgan
