#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgan/datapipe.hpp"
#include "dgan/image.hpp"
#include "dgan/rng.hpp"
#include "dgan/tensor.hpp"

namespace dgan {

// Procedural face sprites: an ellipse head whose geometry is a deterministic
// pure function of four identity parameters and per-label attribute
// magnitudes. Each expression label drives a measurable geometric quantity
// monotonically, which is what makes quantitative evaluation possible
// without licensed face data.
struct SyntheticFaceSpec {
    // identity, each in [0,1]
    double face_hue = 0.5;
    double face_aspect = 0.5;
    double eye_spacing = 0.5;
    double skin_tone = 0.5;
    // per-label magnitudes in [0,1], aligned with the label vocabulary
    std::vector<std::string> labels;
    std::vector<double> attributes;

    void validate() const;
};

// The five geometric drivers derived from the label magnitudes.
struct FaceGeometry {
    double mouth_curvature = 0.0;  // [-1,1], positive = smile
    double mouth_openness = 0.0;   // [0,1]
    double eye_openness = 0.0;     // [0,1]
    double brow_angle = 0.0;       // [-1,1], negative = inner tips down
    double brow_height = 0.0;      // [0,1]
};

FaceGeometry face_geometry(const std::vector<std::string>& labels,
                           const std::vector<double>& attributes);

// Anti-aliased render (4x4 supersampling) to a {3,size,size} tensor in [-1,1].
Tensor render_synthetic_face(const SyntheticFaceSpec& spec, int size = 64);

// Geometric measurement of how strongly `label` is expressed in an image.
// Works on any image of the right shape (including generator outputs) and is
// strictly monotone in the label magnitude on oracle renders.
double measure_attribute(const Tensor& img, const std::string& label);

struct SyntheticIdentity {
    std::string subject_id;
    double face_hue = 0.5, face_aspect = 0.5, eye_spacing = 0.5, skin_tone = 0.5;
};

// Handle that can render any (subject, label code) combination on demand,
// including intensities and compounds never emitted into a dataset.
class SyntheticOracle {
public:
    SyntheticOracle() = default;
    SyntheticOracle(std::vector<SyntheticIdentity> identities,
                    std::vector<std::string> labels, int image_size);

    Tensor render(int subject, const LabelCode& code) const;
    Tensor render_label(int subject, const std::string& label, double intensity = 1.0) const;
    double measure(const std::string& label, const Tensor& img) const;
    // True when the measured attribute passes the subject's own
    // half-intensity render, the fixed probe decision boundary.
    bool probe(int subject, const std::string& label, const Tensor& img) const;

    int subject_count() const { return static_cast<int>(identities_.size()); }
    const std::string& subject_id(int i) const { return identities_[static_cast<size_t>(i)].subject_id; }
    const std::vector<std::string>& labels() const { return labels_; }
    int image_size() const { return image_size_; }

private:
    std::vector<SyntheticIdentity> identities_;
    std::vector<std::string> labels_;
    int image_size_ = 64;
};

struct SyntheticDataset {
    std::vector<ManifestRecord> records;  // image_path filled only after writing
    std::vector<Tensor> images;           // aligned with records, quantized to the pixel lattice
    SyntheticOracle oracle;
};

// Samples n_subjects identity tuples from the seed and renders one image per
// (subject, label) at intensity 1.0; neutral is always included. Labels must
// be drawn from the default vocabulary.
SyntheticDataset gen_synthetic_dataset(int n_subjects, const std::vector<std::string>& labels,
                                       uint64_t seed, int image_size = 64);

// Writes PNGs plus manifest.csv into out_dir and fills in the image paths.
void write_synthetic_dataset(SyntheticDataset& ds, const std::string& out_dir);

}  // namespace dgan
