#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dgan {

// Run configuration. Loadable from a flat key/value text file (one
// `key = value` per line, `#` starts a comment); CLI flags override file
// values. max_iterations has no default and must be set before training.
struct RunConfig {
    int image_size = 64;
    std::vector<std::string> labels = default_labels();
    double lambda_diff = 0.5;
    double lambda_standard = 1.0;
    double lambda_recon = 100.0;
    double learning_rate = 2e-4;
    double momentum_beta1 = 0.5;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int batch_size = 16;
    int64_t max_iterations = -1;  // -1 = unset
    uint64_t seed = 1;
    bool dropout_at_synthesis = true;
    int base_width = 64;
    bool update_standard_d = true;  // ablation switch: freeze the standard discriminator
    bool update_diff_d = true;      // ablation switch: freeze the differential discriminator
    int64_t checkpoint_every = 1000;

    int label_count() const { return static_cast<int>(labels.size()); }

    static std::vector<std::string> default_labels();

    // Throws std::invalid_argument on violated invariants (negative lambda,
    // nonpositive learning rate, unsupported image size, ...).
    void validate() const;
};

// Canonical key=value text, one field per line, fixed order.
std::string config_to_text(const RunConfig& cfg);

RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Applies `key=value` overrides on top of cfg (the CLI override path).
void apply_config_overrides(RunConfig& cfg, const std::vector<std::string>& overrides);

// Names of fields whose values differ between the two configs.
std::vector<std::string> config_diff_fields(const RunConfig& a, const RunConfig& b);

int label_index(const RunConfig& cfg, const std::string& name);

}  // namespace dgan
