#include "dgan/evalharness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dgan/datapipe.hpp"
#include "dgan/objectives.hpp"
#include "dgan/synthesis.hpp"

namespace dgan {

namespace {

bool nan_equal(double a, double b) {
    if (std::isnan(a) && std::isnan(b)) return true;
    return a == b;
}

std::vector<std::string> non_neutral(const std::vector<std::string>& labels) {
    std::vector<std::string> out;
    for (const auto& l : labels)
        if (l != "neutral") out.push_back(l);
    return out;
}

}  // namespace

bool eval_reports_equal(const EvalReport& a, const EvalReport& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (size_t i = 0; i < a.rows.size(); ++i) {
        const EvalRow& x = a.rows[i];
        const EvalRow& y = b.rows[i];
        if (x.config != y.config || x.seed != y.seed || x.fold != y.fold) return false;
        if (!nan_equal(x.transfer_acc, y.transfer_acc)) return false;
        if (!nan_equal(x.identity_err, y.identity_err)) return false;
        if (!nan_equal(x.classifier_acc, y.classifier_acc)) return false;
    }
    return true;
}

double transfer_accuracy(const TrainState& s, const SyntheticOracle& oracle,
                         const std::vector<int>& test_subjects,
                         const std::vector<std::string>& labels) {
    if (test_subjects.empty())
        throw std::invalid_argument("transfer_accuracy: no test subjects");
    const auto probe_labels = non_neutral(labels);
    if (probe_labels.empty())
        throw std::invalid_argument("transfer_accuracy: no non-neutral labels to probe");
    const SynthOptions det{false, 0};
    int correct = 0, total = 0;
    for (int subj : test_subjects) {
        Tensor neutral = oracle.render_label(subj, "neutral", 1.0);
        for (const auto& label : probe_labels) {
            LabelCode code = one_hot_code(oracle.labels(), label);
            Tensor out = synthesize(s, neutral, code, det);
            if (oracle.probe(subj, label, out)) ++correct;
            ++total;
        }
    }
    return static_cast<double>(correct) / total;
}

double identity_error(const TrainState& s, const SyntheticOracle& oracle,
                      const std::vector<int>& test_subjects,
                      const std::vector<std::string>& labels) {
    if (test_subjects.empty())
        throw std::invalid_argument("identity_error: no test subjects");
    const auto probe_labels = non_neutral(labels);
    const SynthOptions det{false, 0};
    double acc = 0.0;
    int count = 0;
    for (int subj : test_subjects) {
        Tensor neutral = oracle.render_label(subj, "neutral", 1.0);
        for (const auto& label : probe_labels) {
            Tensor out = synthesize(s, neutral, one_hot_code(oracle.labels(), label), det);
            Tensor truth = oracle.render_label(subj, label, 1.0);
            acc += loss_recon(truth, out);
            ++count;
        }
    }
    return acc / count;
}

// ---------------------------------------------------------------- ablation

std::vector<std::string> ablation_regimes() { return {"standard-only", "diff-only", "both"}; }

RunConfig ablation_regime_config(const RunConfig& base, const std::string& regime) {
    RunConfig cfg = base;
    if (regime == "standard-only") {
        cfg.lambda_diff = 0.0;
        cfg.update_diff_d = false;
    } else if (regime == "diff-only") {
        cfg.lambda_standard = 0.0;
        cfg.update_standard_d = false;
    } else if (regime != "both") {
        throw std::invalid_argument("unknown ablation regime \"" + regime + "\"");
    }
    return cfg;
}

EvalReport run_ablation(const RunConfig& base_cfg, const std::vector<TrainingPair>& train_data,
                        const AblationContext& ctx, const std::vector<uint64_t>& seeds) {
    if (!ctx.oracle) throw std::invalid_argument("run_ablation: oracle required");
    struct Job {
        std::string regime;
        uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& regime : ablation_regimes())
        for (uint64_t seed : seeds) jobs.push_back({regime, seed});

    std::vector<EvalRow> rows(jobs.size());
    const int par = std::max(1, ctx.parallelism);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            RunConfig cfg = ablation_regime_config(base_cfg, jobs[i].regime);
            cfg.seed = jobs[i].seed;
            auto state = train(cfg, train_data);
            EvalRow row;
            row.config = jobs[i].regime;
            row.seed = jobs[i].seed;
            row.fold = 0;
            row.transfer_acc =
                transfer_accuracy(*state, *ctx.oracle, ctx.test_subjects, ctx.probe_labels);
            row.identity_err =
                identity_error(*state, *ctx.oracle, ctx.test_subjects, ctx.probe_labels);
            rows[i] = row;
        }
    };
    std::vector<std::future<void>> futs;
    for (int t = 0; t < par; ++t) futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();

    EvalReport report;
    report.rows = std::move(rows);
    return report;
}

// -------------------------------------------------------------- classifier

Classifier::Classifier(const ClassifierConfig& cfg, Rng& rng) : cfg_(cfg) {
    const int w = cfg.base_width;
    c1_ = Conv2d(3, w, 4, 2, 1, rng);
    c2_ = Conv2d(w, 2 * w, 4, 2, 1, rng);
    c3_ = Conv2d(2 * w, 4 * w, 4, 2, 1, rng);
    bn2_ = BatchNorm2d(2 * w);
    bn3_ = BatchNorm2d(4 * w);
    const int side = cfg.image_size / 8;
    flat_dim_ = 4 * w * side * side;
    fc1_ = Dense(flat_dim_, 64, rng);
    fc2_ = Dense(64, cfg.n_classes, rng);
}

Tensor Classifier::logits(const Tensor& images) {
    Tensor h = r1_.forward(c1_.forward(images));
    h = r2_.forward(bn2_.forward(c2_.forward(h)));
    h = r3_.forward(bn3_.forward(c3_.forward(h)));
    h = h.reshaped({images.dim(0), flat_dim_});
    h = r4_.forward(fc1_.forward(h));
    return fc2_.forward(h);
}

Tensor Classifier::logits_infer(const Tensor& images) const {
    Tensor h = r1_.infer(c1_.infer(images));
    h = r2_.infer(bn2_.infer(c2_.infer(h)));
    h = r3_.infer(bn3_.infer(c3_.infer(h)));
    h = h.reshaped({images.dim(0), flat_dim_});
    h = r4_.infer(fc1_.infer(h));
    return fc2_.infer(h);
}

void Classifier::backward_from_logits(const Tensor& dlogits) {
    Tensor d = fc2_.backward(dlogits);
    d = fc1_.backward(r4_.backward(d));
    const int side = cfg_.image_size / 8;
    d = d.reshaped({dlogits.dim(0), 4 * cfg_.base_width, side, side});
    d = c3_.backward(bn3_.backward(r3_.backward(d)));
    d = c2_.backward(bn2_.backward(r2_.backward(d)));
    c1_.backward(r1_.backward(d));
}

void Classifier::zero_grad() {
    c1_.zero_grad();
    c2_.zero_grad();
    c3_.zero_grad();
    bn2_.zero_grad();
    bn3_.zero_grad();
    fc1_.zero_grad();
    fc2_.zero_grad();
}

void Classifier::params(std::vector<ParamRef>& out, const std::string& prefix) {
    c1_.params(out, prefix + ".c1");
    c2_.params(out, prefix + ".c2");
    bn2_.params(out, prefix + ".bn2");
    c3_.params(out, prefix + ".c3");
    bn3_.params(out, prefix + ".bn3");
    fc1_.params(out, prefix + ".fc1");
    fc2_.params(out, prefix + ".fc2");
}

Classifier train_classifier(const std::vector<Tensor>& images, const std::vector<int>& labels,
                            const ClassifierConfig& cfg) {
    if (images.empty()) throw std::invalid_argument("train_classifier: empty training set");
    if (images.size() != labels.size())
        throw std::invalid_argument("train_classifier: images/labels size mismatch");
    std::set<int> classes(labels.begin(), labels.end());
    if (classes.size() < 2)
        throw std::invalid_argument("train_classifier: training set has a single class");
    for (int l : labels)
        if (l < 0 || l >= cfg.n_classes)
            throw std::invalid_argument("train_classifier: label out of range");

    Rng init_rng(derive_seed(cfg.seed, 11));
    Classifier clf(cfg, init_rng);
    std::vector<ParamRef> refs;
    clf.params(refs, "clf");
    std::vector<ParamRef> trainable;
    for (auto& r : refs)
        if (r.grad) trainable.push_back(r);
    AdamGroup opt(trainable, AdamParams{cfg.learning_rate, 0.9, 0.999, 1e-8});

    const int n = static_cast<int>(images.size());
    const int hw = cfg.image_size;
    for (int64_t it = 0; it < cfg.iterations; ++it) {
        auto idx = batch_indices(it, n, cfg.batch_size, derive_seed(cfg.seed, 13));
        const int bs = static_cast<int>(idx.size());
        Tensor X({bs, 3, hw, hw});
        for (int i = 0; i < bs; ++i) {
            const Tensor& img = images[static_cast<size_t>(idx[static_cast<size_t>(i)])];
            require_shape(img, {3, hw, hw}, "train_classifier: image");
            std::copy(img.data(), img.data() + img.size(),
                      X.data() + static_cast<int64_t>(i) * 3 * hw * hw);
        }
        clf.zero_grad();
        Tensor lg = clf.logits(X);
        // softmax cross-entropy gradient: (p - onehot)/batch
        Tensor dlg({bs, cfg.n_classes});
        for (int i = 0; i < bs; ++i) {
            double mx = lg.at2(i, 0);
            for (int c = 1; c < cfg.n_classes; ++c) mx = std::max(mx, lg.at2(i, c));
            double z = 0.0;
            for (int c = 0; c < cfg.n_classes; ++c) z += std::exp(lg.at2(i, c) - mx);
            const int truth = labels[static_cast<size_t>(idx[static_cast<size_t>(i)])];
            for (int c = 0; c < cfg.n_classes; ++c) {
                const double p = std::exp(lg.at2(i, c) - mx) / z;
                dlg.at2(i, c) = (p - (c == truth ? 1.0 : 0.0)) / bs;
            }
        }
        clf.backward_from_logits(dlg);
        opt.step();
    }
    return clf;
}

int classify(const Classifier& clf, const Tensor& image) {
    const int hw = clf.cfg().image_size;
    require_shape(image, {3, hw, hw}, "classify: image");
    Tensor lg = clf.logits_infer(image.reshaped({1, 3, hw, hw}));
    int best = 0;
    for (int c = 1; c < clf.cfg().n_classes; ++c)
        if (lg.at2(0, c) > lg.at2(0, best)) best = c;
    return best;
}

double classifier_accuracy(const Classifier& clf, const std::vector<Tensor>& images,
                           const std::vector<int>& labels) {
    if (images.empty()) throw std::invalid_argument("classifier_accuracy: empty set");
    int correct = 0;
    for (size_t i = 0; i < images.size(); ++i)
        if (classify(clf, images[i]) == labels[i]) ++correct;
    return static_cast<double>(correct) / images.size();
}

// ------------------------------------------------------------------ k-fold

std::string augmentation_mode_name(AugmentationMode m) {
    switch (m) {
        case AugmentationMode::None: return "none";
        case AugmentationMode::Linear: return "linear";
        case AugmentationMode::Dgan: return "dgan";
    }
    return "?";
}

std::vector<std::vector<std::string>> assign_folds(std::vector<std::string> subjects, int k,
                                                   uint64_t seed) {
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
    if (k < 2) throw std::invalid_argument("assign_folds: k must be >= 2");
    if (k > static_cast<int>(subjects.size()))
        throw std::invalid_argument("assign_folds: k=" + std::to_string(k) +
                                    " exceeds subject count " + std::to_string(subjects.size()));
    Rng rng(derive_seed(seed, 0xF01Dull));
    rng.shuffle(subjects);
    std::vector<std::vector<std::string>> folds(static_cast<size_t>(k));
    for (size_t i = 0; i < subjects.size(); ++i)
        folds[i % static_cast<size_t>(k)].push_back(subjects[i]);
    return folds;
}

EvalReport kfold_evaluate(const std::vector<ManifestRecord>& records,
                          const std::vector<Tensor>& images, const KfoldOptions& opts) {
    if (records.size() != images.size())
        throw std::invalid_argument("kfold_evaluate: records/images size mismatch");
    if (opts.mode == AugmentationMode::Dgan && !opts.dgan_state)
        throw std::invalid_argument("kfold_evaluate: dgan mode requires a trained state");
    if (opts.vocabulary.empty())
        throw std::invalid_argument("kfold_evaluate: vocabulary required");

    std::vector<std::string> subjects;
    for (const auto& r : records) subjects.push_back(r.subject_id);
    const auto folds = assign_folds(subjects, opts.k, opts.seed);

    auto class_of = [&](const std::string& label) {
        auto it = std::find(opts.vocabulary.begin(), opts.vocabulary.end(), label);
        if (it == opts.vocabulary.end())
            throw std::invalid_argument("kfold_evaluate: label \"" + label +
                                        "\" not in vocabulary");
        return static_cast<int>(it - opts.vocabulary.begin());
    };

    EvalReport report;
    for (int f = 0; f < opts.k; ++f) {
        std::set<std::string> test_subjects(folds[static_cast<size_t>(f)].begin(),
                                            folds[static_cast<size_t>(f)].end());
        std::vector<Tensor> train_images, test_images;
        std::vector<int> train_labels, test_labels;
        std::vector<ManifestRecord> train_records;
        std::vector<Tensor> train_record_images;
        for (size_t i = 0; i < records.size(); ++i) {
            if (test_subjects.count(records[i].subject_id)) {
                if (records[i].generated) continue;  // held-out folds score real images only
                test_images.push_back(images[i]);
                test_labels.push_back(class_of(records[i].label_name));
            } else {
                train_records.push_back(records[i]);
                train_record_images.push_back(images[i]);
                train_images.push_back(images[i]);
                train_labels.push_back(class_of(records[i].label_name));
            }
        }

        if (opts.mode == AugmentationMode::Linear) {
            const size_t n_real = train_images.size();
            for (size_t i = 0; i < n_real; ++i) {
                for (auto& aug : linear_augment(train_images[i])) {
                    train_images.push_back(std::move(aug));
                    train_labels.push_back(train_labels[i]);
                }
            }
        } else if (opts.mode == AugmentationMode::Dgan) {
            auto plan = missing_label_plan(train_records, opts.vocabulary);
            // no generated image of a test-fold subject may enter training
            for (const auto& e : plan)
                if (test_subjects.count(e.subject_id))
                    throw std::logic_error("kfold_evaluate: plan leaked a test subject");
            auto aug = augment_dataset(*opts.dgan_state, train_records, train_record_images, plan,
                                       opts.vocabulary, SynthOptions{false, 0});
            for (size_t i = 0; i < aug.new_records.size(); ++i) {
                train_images.push_back(aug.images[i]);
                train_labels.push_back(class_of(aug.new_records[i].label_name));
            }
        }

        ClassifierConfig ccfg = opts.classifier;
        ccfg.seed = derive_seed(opts.seed, 100 + static_cast<uint64_t>(f));
        Classifier clf = train_classifier(train_images, train_labels, ccfg);

        EvalRow row;
        row.config = augmentation_mode_name(opts.mode);
        row.seed = opts.seed;
        row.fold = f;
        row.classifier_acc = classifier_accuracy(clf, test_images, test_labels);
        report.rows.push_back(row);
    }
    return report;
}

// --------------------------------------------------------------- reporting

void emit_report(const EvalReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("emit_report: cannot write " + path);
    f << "config,seed,fold,transfer_acc,identity_err,classifier_acc\n";
    f.precision(12);
    for (const auto& r : report.rows)
        f << r.config << ',' << r.seed << ',' << r.fold << ',' << r.transfer_acc << ','
          << r.identity_err << ',' << r.classifier_acc << "\n";

    // per-config summary table
    std::ofstream t(path + ".txt");
    if (!t) throw std::runtime_error("emit_report: cannot write " + path + ".txt");
    std::map<std::string, std::vector<const EvalRow*>> by_config;
    std::vector<std::string> order;
    for (const auto& r : report.rows) {
        if (!by_config.count(r.config)) order.push_back(r.config);
        by_config[r.config].push_back(&r);
    }
    auto mean_std = [](const std::vector<double>& v) {
        double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        return std::pair<double, double>(m, v.size() > 1 ? std::sqrt(s2 / (v.size() - 1)) : 0.0);
    };
    t << "config              rows  transfer_acc        identity_err        classifier_acc\n";
    for (const auto& cfg : order) {
        std::vector<double> ta, ie, ca;
        for (const EvalRow* r : by_config[cfg]) {
            if (!std::isnan(r->transfer_acc)) ta.push_back(r->transfer_acc);
            if (!std::isnan(r->identity_err)) ie.push_back(r->identity_err);
            if (!std::isnan(r->classifier_acc)) ca.push_back(r->classifier_acc);
        }
        char line[256];
        auto fmt = [&](const std::vector<double>& v) -> std::string {
            if (v.empty()) return "-";
            auto [m, s] = mean_std(v);
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.4f +/- %.4f", m, s);
            return buf;
        };
        std::snprintf(line, sizeof(line), "%-18s %5zu  %-19s %-19s %-19s\n", cfg.c_str(),
                      by_config[cfg].size(), fmt(ta).c_str(), fmt(ie).c_str(), fmt(ca).c_str());
        t << line;
    }
}

EvalReport parse_report(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("parse_report: cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != "config,seed,fold,transfer_acc,identity_err,classifier_acc")
        throw std::runtime_error("parse_report: bad header in " + path);
    EvalReport report;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(is, field, ',')) fields.push_back(field);
        if (fields.size() != 6) throw std::runtime_error("parse_report: bad row: " + line);
        EvalRow r;
        r.config = fields[0];
        r.seed = static_cast<uint64_t>(std::stoull(fields[1]));
        r.fold = std::stoi(fields[2]);
        r.transfer_acc = std::stod(fields[3]);
        r.identity_err = std::stod(fields[4]);
        r.classifier_acc = std::stod(fields[5]);
        report.rows.push_back(r);
    }
    return report;
}

}  // namespace dgan
