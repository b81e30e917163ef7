#include "dgan/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dgan {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join_csv(const std::vector<std::string>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += v[i];
    }
    return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

double parse_real(const std::string& v, const std::string& key) {
    size_t pos = 0;
    double d;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": " + v);
    }
    if (pos != v.size()) throw std::invalid_argument("config: bad number for " + key + ": " + v);
    return d;
}

int64_t parse_int(const std::string& v, const std::string& key) {
    size_t pos = 0;
    int64_t i;
    try {
        i = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": " + v);
    }
    if (pos != v.size()) throw std::invalid_argument("config: bad integer for " + key + ": " + v);
    return i;
}

void set_field(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "image_size") cfg.image_size = static_cast<int>(parse_int(value, key));
    else if (key == "labels") cfg.labels = split_csv(value);
    else if (key == "label_count") {
        // Redundant with labels; kept addressable and checked for consistency.
        int n = static_cast<int>(parse_int(value, key));
        if (n != cfg.label_count())
            throw std::invalid_argument("config: label_count " + value + " disagrees with labels (" +
                                        std::to_string(cfg.label_count()) + " names)");
    } else if (key == "lambda_diff") cfg.lambda_diff = parse_real(value, key);
    else if (key == "lambda_standard") cfg.lambda_standard = parse_real(value, key);
    else if (key == "lambda_recon") cfg.lambda_recon = parse_real(value, key);
    else if (key == "learning_rate") cfg.learning_rate = parse_real(value, key);
    else if (key == "momentum_beta1") cfg.momentum_beta1 = parse_real(value, key);
    else if (key == "beta2") cfg.beta2 = parse_real(value, key);
    else if (key == "adam_epsilon") cfg.adam_epsilon = parse_real(value, key);
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(value, key));
    else if (key == "max_iterations") cfg.max_iterations = parse_int(value, key);
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_int(value, key));
    else if (key == "dropout_at_synthesis") cfg.dropout_at_synthesis = parse_bool(value, key);
    else if (key == "base_width") cfg.base_width = static_cast<int>(parse_int(value, key));
    else if (key == "update_standard_d") cfg.update_standard_d = parse_bool(value, key);
    else if (key == "update_diff_d") cfg.update_diff_d = parse_bool(value, key);
    else if (key == "checkpoint_every") cfg.checkpoint_every = parse_int(value, key);
    else throw std::invalid_argument("config: unknown key: " + key);
}

}  // namespace

std::vector<std::string> RunConfig::default_labels() {
    return {"neutral", "anger", "disgust", "fear", "happiness", "sadness", "surprise"};
}

void RunConfig::validate() const {
    if (image_size != 16 && image_size != 32 && image_size != 64)
        throw std::invalid_argument("config: unsupported image_size " + std::to_string(image_size) +
                                    " (supported: 16, 32, 64)");
    if (labels.empty()) throw std::invalid_argument("config: labels must be nonempty");
    std::set<std::string> uniq(labels.begin(), labels.end());
    if (uniq.size() != labels.size())
        throw std::invalid_argument("config: duplicate label names");
    if (lambda_diff < 0 || lambda_standard < 0 || lambda_recon < 0)
        throw std::invalid_argument("config: lambda weights must be nonnegative");
    if (!(learning_rate > 0)) throw std::invalid_argument("config: learning_rate must be positive");
    if (!(momentum_beta1 >= 0 && momentum_beta1 < 1))
        throw std::invalid_argument("config: momentum_beta1 must be in [0,1)");
    if (!(beta2 >= 0 && beta2 < 1)) throw std::invalid_argument("config: beta2 must be in [0,1)");
    if (!(adam_epsilon > 0)) throw std::invalid_argument("config: adam_epsilon must be positive");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (base_width < 1) throw std::invalid_argument("config: base_width must be >= 1");
    if (checkpoint_every < 1) throw std::invalid_argument("config: checkpoint_every must be >= 1");
}

std::string config_to_text(const RunConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "image_size = " << cfg.image_size << "\n";
    os << "labels = " << join_csv(cfg.labels) << "\n";
    os << "label_count = " << cfg.label_count() << "\n";
    os << "lambda_diff = " << cfg.lambda_diff << "\n";
    os << "lambda_standard = " << cfg.lambda_standard << "\n";
    os << "lambda_recon = " << cfg.lambda_recon << "\n";
    os << "learning_rate = " << cfg.learning_rate << "\n";
    os << "momentum_beta1 = " << cfg.momentum_beta1 << "\n";
    os << "beta2 = " << cfg.beta2 << "\n";
    os << "adam_epsilon = " << cfg.adam_epsilon << "\n";
    os << "batch_size = " << cfg.batch_size << "\n";
    os << "max_iterations = " << cfg.max_iterations << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "dropout_at_synthesis = " << (cfg.dropout_at_synthesis ? "true" : "false") << "\n";
    os << "base_width = " << cfg.base_width << "\n";
    os << "update_standard_d = " << (cfg.update_standard_d ? "true" : "false") << "\n";
    os << "update_diff_d = " << (cfg.update_diff_d ? "true" : "false") << "\n";
    os << "checkpoint_every = " << cfg.checkpoint_every << "\n";
    return os.str();
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        set_field(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

void apply_config_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
    for (const auto& kv : overrides) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override must be key=value: " + kv);
        set_field(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    cfg.validate();
}

std::vector<std::string> config_diff_fields(const RunConfig& a, const RunConfig& b) {
    std::vector<std::string> diff;
    if (a.image_size != b.image_size) diff.push_back("image_size");
    if (a.labels != b.labels) diff.push_back("labels");
    if (a.lambda_diff != b.lambda_diff) diff.push_back("lambda_diff");
    if (a.lambda_standard != b.lambda_standard) diff.push_back("lambda_standard");
    if (a.lambda_recon != b.lambda_recon) diff.push_back("lambda_recon");
    if (a.learning_rate != b.learning_rate) diff.push_back("learning_rate");
    if (a.momentum_beta1 != b.momentum_beta1) diff.push_back("momentum_beta1");
    if (a.beta2 != b.beta2) diff.push_back("beta2");
    if (a.adam_epsilon != b.adam_epsilon) diff.push_back("adam_epsilon");
    if (a.batch_size != b.batch_size) diff.push_back("batch_size");
    if (a.max_iterations != b.max_iterations) diff.push_back("max_iterations");
    if (a.seed != b.seed) diff.push_back("seed");
    if (a.dropout_at_synthesis != b.dropout_at_synthesis) diff.push_back("dropout_at_synthesis");
    if (a.base_width != b.base_width) diff.push_back("base_width");
    if (a.update_standard_d != b.update_standard_d) diff.push_back("update_standard_d");
    if (a.update_diff_d != b.update_diff_d) diff.push_back("update_diff_d");
    if (a.checkpoint_every != b.checkpoint_every) diff.push_back("checkpoint_every");
    return diff;
}

int label_index(const RunConfig& cfg, const std::string& name) {
    auto it = std::find(cfg.labels.begin(), cfg.labels.end(), name);
    if (it == cfg.labels.end()) {
        std::string vocab;
        for (size_t i = 0; i < cfg.labels.size(); ++i)
            vocab += (i ? ", " : "") + cfg.labels[i];
        throw std::invalid_argument("unknown label \"" + name + "\" (vocabulary: " + vocab + ")");
    }
    return static_cast<int>(it - cfg.labels.begin());
}

}  // namespace dgan
