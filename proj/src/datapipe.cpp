#include "dgan/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dgan/png_io.hpp"

namespace dgan {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string vocab_str(const std::vector<std::string>& vocabulary) {
    std::string out;
    for (size_t i = 0; i < vocabulary.size(); ++i) out += (i ? ", " : "") + vocabulary[i];
    return out;
}

void check_label(const std::string& label, const std::vector<std::string>& vocabulary,
                 const std::string& where) {
    if (std::find(vocabulary.begin(), vocabulary.end(), label) == vocabulary.end())
        throw std::invalid_argument(where + ": unknown label \"" + label + "\" (vocabulary: " +
                                    vocab_str(vocabulary) + ")");
}

}  // namespace

std::vector<ManifestRecord> load_manifest(const std::string& path,
                                          const std::vector<std::string>& vocabulary) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open manifest: " + path);
    std::vector<ManifestRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::istringstream is(line);
        std::string field;
        while (std::getline(is, field, ',')) fields.push_back(trim(field));
        const std::string where = "manifest line " + std::to_string(lineno);
        if (fields.size() < 3 || fields.size() > 5)
            throw std::invalid_argument(where + ": expected subject_id,label_name[,intensity],"
                                        "image_path[,generated=true], got " + line);
        ManifestRecord rec;
        rec.subject_id = fields[0];
        rec.label_name = fields[1];
        if (rec.subject_id.empty() || rec.label_name.empty())
            throw std::invalid_argument(where + ": empty subject or label");
        check_label(rec.label_name, vocabulary, where);
        // 3 fields: subject,label,path (intensity defaults to 1.0)
        // 4 fields: subject,label,intensity,path
        // 5 fields: subject,label,intensity,path,generated=true|false
        if (fields.size() == 3) {
            rec.image_path = fields[2];
        } else {
            try {
                rec.intensity = std::stod(fields[2]);
            } catch (const std::exception&) {
                throw std::invalid_argument(where + ": bad intensity \"" + fields[2] + "\"");
            }
            if (!(rec.intensity >= 0.0 && rec.intensity <= 1.0))
                throw std::invalid_argument(where + ": intensity " + fields[2] + " outside [0,1]");
            rec.image_path = fields[3];
            if (fields.size() == 5) {
                if (fields[4] == "generated=true") rec.generated = true;
                else if (fields[4] == "generated=false") rec.generated = false;
                else
                    throw std::invalid_argument(where + ": unexpected trailing field \"" +
                                                fields[4] + "\"");
            }
        }
        if (rec.image_path.empty())
            throw std::invalid_argument(where + ": empty image path");
        records.push_back(rec);
    }
    return records;
}

void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write manifest: " + path);
    for (const auto& r : records) {
        f << r.subject_id << ',' << r.label_name << ',' << r.intensity << ',' << r.image_path;
        if (r.generated) f << ",generated=true";
        f << "\n";
    }
}

LabelCode one_hot_code(const std::vector<std::string>& vocabulary, const std::string& label,
                       double intensity) {
    check_label(label, vocabulary, "one_hot_code");
    LabelCode code(vocabulary.size(), 0.0);
    for (size_t i = 0; i < vocabulary.size(); ++i)
        if (vocabulary[i] == label) code[i] = intensity;
    return code;
}

namespace {

PairSet build_pairs_impl(const std::vector<ManifestRecord>& records,
                         const std::vector<std::string>& vocabulary,
                         const std::function<Tensor(size_t)>& image_of) {
    if (std::find(vocabulary.begin(), vocabulary.end(), "neutral") == vocabulary.end())
        throw std::invalid_argument("build_pairs: vocabulary must contain \"neutral\"");
    for (const auto& r : records) check_label(r.label_name, vocabulary, "build_pairs");

    // Subjects in order of first appearance; records keep manifest order.
    std::vector<std::string> subject_order;
    std::map<std::string, std::vector<size_t>> by_subject;
    for (size_t i = 0; i < records.size(); ++i) {
        if (by_subject.find(records[i].subject_id) == by_subject.end())
            subject_order.push_back(records[i].subject_id);
        by_subject[records[i].subject_id].push_back(i);
    }

    PairSet out;
    for (const auto& sid : subject_order) {
        const auto& idxs = by_subject[sid];
        size_t neutral_idx = records.size();
        for (size_t i : idxs)
            if (records[i].label_name == "neutral") {
                neutral_idx = i;
                break;
            }
        if (neutral_idx == records.size()) {
            ++out.skipped_subjects;
            out.warnings.push_back("subject " + sid + " has no neutral record; skipped");
            continue;
        }
        Tensor source = image_of(neutral_idx);
        for (size_t i : idxs) {
            TrainingPair p;
            p.x = source;
            p.y = image_of(i);
            p.code = one_hot_code(vocabulary, records[i].label_name, records[i].intensity);
            p.subject_id = sid;
            out.pairs.push_back(std::move(p));
        }
    }
    return out;
}

}  // namespace

PairSet build_pairs(const std::vector<ManifestRecord>& records,
                    const std::vector<std::string>& vocabulary,
                    const std::string& image_root) {
    // Cache loaded images: the neutral source is reused across a subject's pairs.
    std::map<std::string, Tensor> cache;
    auto image_of = [&](size_t i) -> Tensor {
        std::string p = records[i].image_path;
        if (!image_root.empty() && !p.empty() && p[0] != '/') p = image_root + "/" + p;
        auto it = cache.find(p);
        if (it != cache.end()) return it->second;
        Tensor t = load_image_tensor(p);
        cache.emplace(p, t);
        return t;
    };
    return build_pairs_impl(records, vocabulary, image_of);
}

PairSet build_pairs_from_images(const std::vector<ManifestRecord>& records,
                                const std::vector<Tensor>& images,
                                const std::vector<std::string>& vocabulary) {
    if (records.size() != images.size())
        throw std::invalid_argument("build_pairs_from_images: records/images size mismatch");
    return build_pairs_impl(records, vocabulary,
                            [&](size_t i) -> Tensor { return images[i]; });
}

Tensor warp_affine(const Tensor& img, double angle_deg, double dx, double dy) {
    if (img.rank() != 3)
        throw std::invalid_argument("warp_affine: expected {C,H,W}, got " + shape_str(img.shape()));
    const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
    const double rad = angle_deg * 3.14159265358979323846 / 180.0;
    const double ca = std::cos(rad), sa = std::sin(rad);
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    Tensor out({c, h, w});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // invert: rotate by -angle about center after undoing the shift
            const double px = x - dx - cx;
            const double py = y - dy - cy;
            const double sx = ca * px + sa * py + cx;
            const double sy = -sa * px + ca * py + cy;
            // bilinear with edge replication
            const double fx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
            const double fy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int y0 = static_cast<int>(std::floor(fy));
            const int x1 = std::min(x0 + 1, w - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            const double tx = fx - x0, ty = fy - y0;
            for (int ch = 0; ch < c; ++ch) {
                const double v00 = img.at3(ch, y0, x0), v01 = img.at3(ch, y0, x1);
                const double v10 = img.at3(ch, y1, x0), v11 = img.at3(ch, y1, x1);
                out.at3(ch, y, x) = (1 - ty) * ((1 - tx) * v00 + tx * v01) +
                                    ty * ((1 - tx) * v10 + tx * v11);
            }
        }
    }
    return out;
}

std::vector<Tensor> linear_augment(const Tensor& img) {
    static const double rotations[4] = {-5.0, -3.0, 3.0, 5.0};
    static const double shifts[7][2] = {{0, 0}, {2, 0}, {-2, 0}, {0, 2}, {0, -2}, {4, 0}, {-4, 0}};
    std::vector<Tensor> out;
    out.reserve(28);
    for (double rot : rotations)
        for (const auto& s : shifts) out.push_back(warp_affine(img, rot, s[0], s[1]));
    return out;
}

Tensor load_image_tensor(const std::string& path) {
    PngImage png = read_png(path);
    return normalize_image(png.rgb, png.height, png.width, 3);
}

void save_image_tensor(const std::string& path, const Tensor& img) {
    if (img.rank() != 3 || img.dim(0) != 3)
        throw std::invalid_argument("save_image_tensor: expected {3,H,W}, got " +
                                    shape_str(img.shape()));
    write_png(path, img.dim(2), img.dim(1), denormalize_image(img));
}

}  // namespace dgan
