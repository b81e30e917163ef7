// Command line front end: training, synthesis, manifold sweeps, label-channel
// composition, dataset generation, augmentation and the evaluation protocols.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "dgan/config.hpp"
#include "dgan/datapipe.hpp"
#include "dgan/evalharness.hpp"
#include "dgan/label_embed.hpp"
#include "dgan/synthesis.hpp"
#include "dgan/synthetic_face.hpp"
#include "dgan/trainer.hpp"

namespace fs = std::filesystem;
using namespace dgan;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string checkpoint_path;
    std::string out_dir = ".";
    std::optional<uint64_t> seed;
    bool no_dropout = false;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool wants_checkpoint) {
    cmd->add_option("--config", c.config_path, "Run configuration file (key = value lines)");
    if (wants_checkpoint)
        cmd->add_option("--checkpoint", c.checkpoint_path, "Trained model checkpoint")
            ->required();
    cmd->add_option("--out-dir", c.out_dir, "Output directory");
    cmd->add_option("--seed", c.seed, "Seed override");
    cmd->add_flag("--no-dropout", c.no_dropout, "Disable dropout noise at synthesis");
    cmd->add_option("--set", c.overrides, "Config override key=value (repeatable)");
}

RunConfig load_cfg(const CommonOpts& c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config_file(c.config_path);
    apply_config_overrides(cfg, c.overrides);
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

SynthOptions synth_opts(const TrainState& s, const CommonOpts& c) {
    SynthOptions o;
    o.dropout = c.no_dropout ? false : s.cfg.dropout_at_synthesis;
    o.dropout_seed = c.seed.value_or(0);
    return o;
}

LabelCode parse_code(const TrainState& s, const std::string& label, double intensity) {
    LabelCode zero(static_cast<size_t>(s.cfg.label_count()), 0.0);
    return scale_intensity(zero, label_index(s.cfg, label), intensity);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differential GAN trainer / synthesizer / evaluator"};
    app.require_subcommand(1);

    // --- train ---
    CommonOpts train_c;
    std::string train_manifest;
    auto* cmd_train = app.add_subcommand("train", "Train a model on a paired dataset");
    add_common(cmd_train, train_c, false);
    cmd_train->add_option("--data", train_manifest, "Training manifest CSV")->required();

    // --- synth ---
    CommonOpts synth_c;
    std::string synth_input, synth_label, synth_out = "synth.png";
    double synth_intensity = 1.0;
    auto* cmd_synth = app.add_subcommand("synth", "Synthesize one target-attribute image");
    add_common(cmd_synth, synth_c, true);
    cmd_synth->add_option("--input", synth_input, "Source image (PNG)")->required();
    cmd_synth->add_option("--label", synth_label, "Target label name")->required();
    cmd_synth->add_option("--intensity", synth_intensity, "Label intensity in [0,1]");
    cmd_synth->add_option("--out", synth_out, "Output PNG path");

    // --- sweep ---
    CommonOpts sweep_c;
    std::string sweep_input, sweep_label;
    int sweep_steps = 10;
    bool sweep_from_zero = false;
    auto* cmd_sweep = app.add_subcommand("sweep", "Intensity sweep over one label");
    add_common(cmd_sweep, sweep_c, true);
    cmd_sweep->add_option("--input", sweep_input)->required();
    cmd_sweep->add_option("--label", sweep_label)->required();
    cmd_sweep->add_option("--steps", sweep_steps, "Number of frames (default 10)");
    cmd_sweep->add_flag("--from-zero", sweep_from_zero, "Start the sweep at 0.0 instead of 0.1");

    // --- compound ---
    CommonOpts comp_c;
    std::string comp_input, comp_label_a, comp_label_b;
    int comp_steps = 10;
    auto* cmd_comp = app.add_subcommand("compound", "Sweep between two labels (1-t, t)");
    add_common(cmd_comp, comp_c, true);
    cmd_comp->add_option("--input", comp_input)->required();
    cmd_comp->add_option("--label-a", comp_label_a)->required();
    cmd_comp->add_option("--label-b", comp_label_b)->required();
    cmd_comp->add_option("--steps", comp_steps);

    // --- compose ---
    CommonOpts csp_c;
    std::string csp_input, csp_label_a, csp_label_b, csp_mask = "upper-half";
    std::string csp_out = "compose.png";
    double csp_intensity_a = 1.0, csp_intensity_b = 1.0;
    auto* cmd_csp = app.add_subcommand("compose", "Spatially compose two label channels");
    add_common(cmd_csp, csp_c, true);
    cmd_csp->add_option("--input", csp_input)->required();
    cmd_csp->add_option("--label-a", csp_label_a, "Label for mask=1 region")->required();
    cmd_csp->add_option("--label-b", csp_label_b, "Label for mask=0 region")->required();
    cmd_csp->add_option("--intensity-a", csp_intensity_a);
    cmd_csp->add_option("--intensity-b", csp_intensity_b);
    cmd_csp->add_option("--mask", csp_mask,
                        "upper-half|lower-half|left-half|right-half|file:<png>");
    cmd_csp->add_option("--out", csp_out);

    // --- augment ---
    CommonOpts aug_c;
    std::string aug_manifest;
    auto* cmd_aug = app.add_subcommand("augment", "Fill missing (subject,label) cells");
    add_common(cmd_aug, aug_c, true);
    cmd_aug->add_option("--data", aug_manifest, "Manifest to augment")->required();

    // --- dataset-gen ---
    CommonOpts gen_c;
    int gen_subjects = 10;
    int gen_size = 64;
    auto* cmd_gen = app.add_subcommand("dataset-gen", "Emit a synthetic face dataset");
    add_common(cmd_gen, gen_c, false);
    cmd_gen->add_option("--subjects", gen_subjects, "Number of identities");
    cmd_gen->add_option("--size", gen_size, "Image size (default 64)");

    // --- eval ---
    CommonOpts eval_c;
    std::string eval_mode = "ablation";
    std::string eval_seeds = "1,2,3";
    int eval_train_subjects = 10, eval_test_subjects = 10, eval_kfold = 5;
    auto* cmd_eval = app.add_subcommand("eval", "Run the synthetic-benchmark protocols");
    add_common(cmd_eval, eval_c, false);
    cmd_eval->add_option("--mode", eval_mode, "ablation|kfold");
    cmd_eval->add_option("--seeds", eval_seeds, "Comma-separated seed list");
    cmd_eval->add_option("--train-subjects", eval_train_subjects);
    cmd_eval->add_option("--test-subjects", eval_test_subjects);
    cmd_eval->add_option("--k", eval_kfold, "Fold count for kfold mode");
    cmd_eval->add_option("--checkpoint", eval_c.checkpoint_path,
                         "Trained model for kfold dgan augmentation");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_train) {
            RunConfig cfg = load_cfg(train_c);
            if (cfg.max_iterations < 0)
                throw std::invalid_argument("train: set max_iterations in the config "
                                            "(required field, no default)");
            auto records = load_manifest(train_manifest, cfg.labels);
            auto pairs = build_pairs(records, cfg.labels,
                                     fs::path(train_manifest).parent_path().string());
            for (const auto& w : pairs.warnings) std::cerr << "warning: " << w << "\n";
            fs::create_directories(train_c.out_dir);
            TrainOptions opts;
            opts.log_path = train_c.out_dir + "/training_log.csv";
            opts.checkpoint_dir = train_c.out_dir;
            opts.on_report = [](const LossReport& r) {
                if (r.iteration % 100 == 0)
                    std::cout << "iter " << r.iteration << "  d_total " << r.d_total
                              << "  g_total " << r.g_total << "  recon " << r.recon << std::endl;
            };
            train(cfg, pairs.pairs, opts);
            std::cout << "done; checkpoints and training_log.csv in " << train_c.out_dir << "\n";
        } else if (*cmd_synth) {
            auto state = load_checkpoint(synth_c.checkpoint_path);
            Tensor x = load_image_tensor(synth_input);
            Tensor out = synthesize(*state, x, parse_code(*state, synth_label, synth_intensity),
                                    synth_opts(*state, synth_c));
            save_image_tensor(synth_out, out);
            std::cout << "wrote " << synth_out << "\n";
        } else if (*cmd_sweep) {
            auto state = load_checkpoint(sweep_c.checkpoint_path);
            Tensor x = load_image_tensor(sweep_input);
            auto frames = intensity_sweep(*state, x, label_index(state->cfg, sweep_label),
                                          sweep_steps, sweep_from_zero,
                                          synth_opts(*state, sweep_c));
            fs::create_directories(sweep_c.out_dir);
            for (size_t i = 0; i < frames.size(); ++i)
                save_image_tensor(sweep_c.out_dir + "/sweep_" + std::to_string(i) + ".png",
                                  frames[i]);
            save_image_tensor(sweep_c.out_dir + "/sweep_strip.png", filmstrip(frames));
            std::cout << "wrote " << frames.size() << " frames + filmstrip to " << sweep_c.out_dir
                      << "\n";
        } else if (*cmd_comp) {
            auto state = load_checkpoint(comp_c.checkpoint_path);
            Tensor x = load_image_tensor(comp_input);
            auto frames = compound_sweep(*state, x, label_index(state->cfg, comp_label_a),
                                         label_index(state->cfg, comp_label_b), comp_steps,
                                         synth_opts(*state, comp_c));
            fs::create_directories(comp_c.out_dir);
            for (size_t i = 0; i < frames.size(); ++i)
                save_image_tensor(comp_c.out_dir + "/compound_" + std::to_string(i) + ".png",
                                  frames[i]);
            save_image_tensor(comp_c.out_dir + "/compound_strip.png", filmstrip(frames));
            std::cout << "wrote " << frames.size() << " frames + filmstrip to " << comp_c.out_dir
                      << "\n";
        } else if (*cmd_csp) {
            auto state = load_checkpoint(csp_c.checkpoint_path);
            Tensor x = load_image_tensor(csp_input);
            const int hw = state->cfg.image_size;
            Tensor mask = csp_mask.rfind("file:", 0) == 0
                              ? mask_from_image(load_image_tensor(csp_mask.substr(5)))
                              : make_mask(csp_mask, hw, hw);
            Tensor out = region_compose_synthesis(
                *state, x, parse_code(*state, csp_label_a, csp_intensity_a),
                parse_code(*state, csp_label_b, csp_intensity_b), mask,
                synth_opts(*state, csp_c));
            save_image_tensor(csp_out, out);
            std::cout << "wrote " << csp_out << "\n";
        } else if (*cmd_aug) {
            auto state = load_checkpoint(aug_c.checkpoint_path);
            const auto& vocab = state->cfg.labels;
            auto records = load_manifest(aug_manifest, vocab);
            const std::string root = fs::path(aug_manifest).parent_path().string();
            std::vector<Tensor> images;
            for (const auto& r : records)
                images.push_back(load_image_tensor(
                    root.empty() || r.image_path[0] == '/' ? r.image_path
                                                           : root + "/" + r.image_path));
            auto plan = missing_label_plan(records, vocab);
            auto result = augment_dataset(*state, records, images, plan, vocab,
                                          synth_opts(*state, aug_c));
            fs::create_directories(aug_c.out_dir);
            auto all = records;
            for (size_t i = 0; i < result.new_records.size(); ++i) {
                auto rec = result.new_records[i];
                rec.image_path = "gen_" + rec.subject_id + "_" + rec.label_name + ".png";
                save_image_tensor(aug_c.out_dir + "/" + rec.image_path, result.images[i]);
                all.push_back(rec);
            }
            write_manifest(aug_c.out_dir + "/manifest.csv", all);
            std::cout << "generated " << result.new_records.size() << " images ("
                      << result.skipped_subjects << " subjects skipped); manifest at "
                      << aug_c.out_dir << "/manifest.csv\n";
        } else if (*cmd_gen) {
            RunConfig cfg = load_cfg(gen_c);
            auto ds = gen_synthetic_dataset(gen_subjects, cfg.labels, gen_c.seed.value_or(1),
                                            gen_size);
            write_synthetic_dataset(ds, gen_c.out_dir);
            std::cout << "wrote " << ds.records.size() << " images + manifest to " << gen_c.out_dir
                      << "\n";
        } else if (*cmd_eval) {
            RunConfig cfg = load_cfg(eval_c);
            std::vector<uint64_t> seeds;
            std::istringstream ss(eval_seeds);
            std::string tok;
            while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
            fs::create_directories(eval_c.out_dir);
            const std::string report_path = eval_c.out_dir + "/eval_report.csv";
            if (eval_mode == "ablation") {
                if (cfg.max_iterations < 0)
                    throw std::invalid_argument("eval: set max_iterations for the ablation runs");
                auto train_ds = gen_synthetic_dataset(eval_train_subjects, cfg.labels,
                                                      cfg.seed, cfg.image_size);
                auto test_ds = gen_synthetic_dataset(eval_test_subjects, cfg.labels,
                                                     cfg.seed + 7919, cfg.image_size);
                auto pairs = build_pairs_from_images(train_ds.records, train_ds.images, cfg.labels);
                AblationContext ctx;
                ctx.oracle = &test_ds.oracle;
                for (int i = 0; i < test_ds.oracle.subject_count(); ++i)
                    ctx.test_subjects.push_back(i);
                ctx.probe_labels = cfg.labels;
                EvalReport report = run_ablation(cfg, pairs.pairs, ctx, seeds);
                emit_report(report, report_path);
            } else if (eval_mode == "kfold") {
                auto ds = gen_synthetic_dataset(eval_train_subjects, cfg.labels, cfg.seed,
                                                cfg.image_size);
                std::unique_ptr<TrainState> dgan_state;
                if (!eval_c.checkpoint_path.empty())
                    dgan_state = load_checkpoint(eval_c.checkpoint_path);
                EvalReport all;
                for (uint64_t seed : seeds) {
                    for (auto mode : {AugmentationMode::None, AugmentationMode::Linear,
                                      AugmentationMode::Dgan}) {
                        if (mode == AugmentationMode::Dgan && !dgan_state) continue;
                        KfoldOptions ko;
                        ko.k = eval_kfold;
                        ko.mode = mode;
                        ko.dgan_state = dgan_state.get();
                        ko.seed = seed;
                        ko.vocabulary = cfg.labels;
                        ko.classifier.image_size = cfg.image_size;
                        ko.classifier.n_classes = cfg.label_count();
                        auto rep = kfold_evaluate(ds.records, ds.images, ko);
                        all.rows.insert(all.rows.end(), rep.rows.begin(), rep.rows.end());
                    }
                }
                emit_report(all, report_path);
            } else {
                throw std::invalid_argument("eval: unknown mode " + eval_mode);
            }
            std::cout << "report written to " << report_path << " (+.txt)\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
