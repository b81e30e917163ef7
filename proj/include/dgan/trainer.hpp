#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dgan/config.hpp"
#include "dgan/discriminator.hpp"
#include "dgan/generator.hpp"
#include "dgan/image.hpp"
#include "dgan/label_embed.hpp"
#include "dgan/nn.hpp"
#include "dgan/objectives.hpp"
#include "dgan/rng.hpp"

namespace dgan {

struct TrainingPair {
    Tensor x;             // source image {3,H,W}
    Tensor y;             // ground-truth image {3,H,W}
    LabelCode code;       // target label code
    std::string subject_id;
};

// Everything the optimization loop owns: the four parameter sets, one
// adaptive-moment state per update group, the iteration counter and the
// training-time RNG. Not copyable; the optimizer groups hold pointers into
// the networks.
class TrainState {
public:
    explicit TrainState(const RunConfig& cfg);
    TrainState(const TrainState&) = delete;
    TrainState& operator=(const TrainState&) = delete;

    RunConfig cfg;
    LabelEmbed embed;
    Generator gen;
    DiscriminatorNet d_standard;
    DiscriminatorNet d_diff;
    AdamGroup opt_g;        // generator + embedding, stepped jointly
    AdamGroup opt_d_standard;
    AdamGroup opt_d_diff;
    int64_t iteration = 0;
    Rng rng;                // feeds dropout masks during training

    // All checkpointed tensors (parameters, batchnorm buffers, optimizer
    // moments) in canonical order.
    std::vector<std::pair<std::string, Tensor*>> named_state();
    // Parameter refs per component, for tests and tooling.
    std::vector<ParamRef> generator_params();  // gen + embed
    std::vector<ParamRef> discriminator_params();
};

// Called after each optimizer phase inside train_step ("d_step", "g_step").
using PhaseHook = std::function<void(const std::string&)>;

// One optimization iteration: fresh fakes are scored and both discriminators
// take one adaptive-moment step on the summed d loss; then the fakes are
// regenerated through the updated discriminators and the generator plus
// embedding take one step on the weighted g loss. Throws on non-finite loss,
// naming the first bad component.
LossReport train_step(TrainState& s, const std::vector<TrainingPair>& data,
                      const std::vector<int>& batch_idx, const PhaseHook& hook = {});

// Deterministic batch schedule: pair order reshuffles every epoch from a
// stream derived from the run seed, so any iteration's batch is a pure
// function of (seed, dataset size, batch size, iteration) and resume replays
// the identical order.
std::vector<int> batch_indices(int64_t iteration, int dataset_size, int batch_size,
                               uint64_t seed);

struct TrainOptions {
    std::string log_path;        // CSV loss log; empty = no log
    std::string checkpoint_dir;  // empty = no checkpoints
    std::function<void(const LossReport&)> on_report;
};

std::unique_ptr<TrainState> train(const RunConfig& cfg, const std::vector<TrainingPair>& data,
                                  const TrainOptions& opts = {});

// Single binary container: magic, format version, counters, config snapshot,
// named tensors, rng state, end marker. Round-trips bit-exactly; written via
// a temp file + rename so a crash never leaves a partial checkpoint behind.
void save_checkpoint(TrainState& s, const std::string& path);
std::unique_ptr<TrainState> load_checkpoint(const std::string& path);

}  // namespace dgan
