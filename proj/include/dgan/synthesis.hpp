#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dgan/datapipe.hpp"
#include "dgan/image.hpp"
#include "dgan/tensor.hpp"
#include "dgan/trainer.hpp"

namespace dgan {

// Dropout is the model's only noise source; a fixed seed makes any synthesis
// call reproducible, and sweeps reuse one seed across all frames so
// frame-to-frame variation reflects only the code.
struct SynthOptions {
    bool dropout = false;
    uint64_t dropout_seed = 0;
};

// Defaults to the state's dropout_at_synthesis config when opts is absent.
Tensor synthesize(const TrainState& s, const Tensor& x, const LabelCode& code,
                  const std::optional<SynthOptions>& opts = std::nullopt);

// Intensities linearly spaced over [0.1, 1.0] (or [0, 1] with from_zero).
std::vector<Tensor> intensity_sweep(const TrainState& s, const Tensor& x, int label_index,
                                    int steps, bool from_zero = false,
                                    const std::optional<SynthOptions>& opts = std::nullopt);
std::vector<double> sweep_intensities(int steps, bool from_zero = false);

// Step i uses label_a at 1-t and label_b at t, t linearly spaced on [0,1].
std::vector<Tensor> compound_sweep(const TrainState& s, const Tensor& x, int label_a,
                                   int label_b, int steps,
                                   const std::optional<SynthOptions>& opts = std::nullopt);

// Embeds both codes, splices the channels through the binary mask, then runs
// the generator once.
Tensor region_compose_synthesis(const TrainState& s, const Tensor& x, const LabelCode& code_a,
                                const LabelCode& code_b, const Tensor& mask,
                                const std::optional<SynthOptions>& opts = std::nullopt);

// "upper-half" | "lower-half" | "left-half" | "right-half"
Tensor make_mask(const std::string& kind, int h, int w);
Tensor mask_from_image(const Tensor& img);  // channel mean > 0 -> 1

// Horizontal concatenation of equally sized frames.
Tensor filmstrip(const std::vector<Tensor>& frames);

struct AugmentPlanEntry {
    std::string subject_id;
    std::string label_name;
};

// The (subject, missing-label) cells of a manifest.
std::vector<AugmentPlanEntry> missing_label_plan(const std::vector<ManifestRecord>& records,
                                                 const std::vector<std::string>& vocabulary);

struct AugmentResult {
    std::vector<ManifestRecord> new_records;  // tagged generated=true, paths empty
    std::vector<Tensor> images;               // aligned with new_records
    int skipped_subjects = 0;                 // plan entries whose subject lacks a neutral
};

// Synthesizes each planned (subject, label) from the subject's neutral image.
// Source rows are never touched; new rows are appended by the caller.
AugmentResult augment_dataset(const TrainState& s, const std::vector<ManifestRecord>& records,
                              const std::vector<Tensor>& images,
                              const std::vector<AugmentPlanEntry>& plan,
                              const std::vector<std::string>& vocabulary,
                              const std::optional<SynthOptions>& opts = std::nullopt);

}  // namespace dgan
