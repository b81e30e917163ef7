#pragma once

#include <string>
#include <vector>

#include "dgan/image.hpp"
#include "dgan/tensor.hpp"
#include "dgan/trainer.hpp"

namespace dgan {

// One manifest line: `subject_id,label_name,intensity,image_path` with an
// optional trailing `generated=true` marker on synthesized rows. Intensity
// may be omitted (defaults to 1.0).
struct ManifestRecord {
    std::string subject_id;
    std::string label_name;
    double intensity = 1.0;
    std::string image_path;
    bool generated = false;
};

std::vector<ManifestRecord> load_manifest(const std::string& path,
                                          const std::vector<std::string>& vocabulary);
void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records);

struct PairSet {
    std::vector<TrainingPair> pairs;
    int skipped_subjects = 0;           // subjects without a neutral record
    std::vector<std::string> warnings;
};

// Pairs every record against its subject's (first) neutral image: source is
// the neutral render, target is the record image, code is
// one_hot(label) * intensity. Subjects lacking a neutral are skipped with a
// warning. Image files load eagerly here (missing files error at this point,
// not at manifest load).
PairSet build_pairs(const std::vector<ManifestRecord>& records,
                    const std::vector<std::string>& vocabulary,
                    const std::string& image_root = "");

// In-memory variant: images[i] belongs to records[i].
PairSet build_pairs_from_images(const std::vector<ManifestRecord>& records,
                                const std::vector<Tensor>& images,
                                const std::vector<std::string>& vocabulary);

LabelCode one_hot_code(const std::vector<std::string>& vocabulary, const std::string& label,
                       double intensity = 1.0);

// Rotation (degrees, about the image center) followed by a pixel shift,
// bilinear resampling with edge replication. (dx,dy)=(+2,0) moves content
// two columns to the right.
Tensor warp_affine(const Tensor& img, double angle_deg, double dx, double dy);

// The linear augmentation recipe: rotations {-5,-3,+3,+5} degrees crossed
// with shifts {(0,0),(+2,0),(-2,0),(0,+2),(0,-2),(+4,0),(-4,0)} = 28 images.
std::vector<Tensor> linear_augment(const Tensor& img);

Tensor load_image_tensor(const std::string& path);               // PNG -> [-1,1] {3,H,W}
void save_image_tensor(const std::string& path, const Tensor& img);

}  // namespace dgan
