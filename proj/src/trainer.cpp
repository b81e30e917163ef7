#include "dgan/trainer.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace dgan {

namespace {

Tensor scores_to_tensor(const std::vector<double>& v) {
    Tensor t({static_cast<int>(v.size())});
    for (size_t i = 0; i < v.size(); ++i) t[static_cast<int64_t>(i)] = v[i];
    return t;
}

std::vector<double> tensor_to_scores(const Tensor& t) {
    std::vector<double> v(static_cast<size_t>(t.size()));
    for (int64_t i = 0; i < t.size(); ++i) v[static_cast<size_t>(i)] = t[i];
    return v;
}

void check_finite(const LossReport& r, bool d_phase_only) {
    const std::pair<const char*, double> vals[] = {
        {"d_standard", r.d_standard}, {"d_diff", r.d_diff},     {"d_total", r.d_total},
        {"g_standard", r.g_standard}, {"g_diff", r.g_diff},     {"recon", r.recon},
        {"g_total", r.g_total}};
    const int n = d_phase_only ? 3 : 7;
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(vals[i].second))
            throw std::runtime_error("non-finite loss component at iteration " +
                                     std::to_string(r.iteration) + ": " +
                                     vals[i].first + " = " + std::to_string(vals[i].second));
}

}  // namespace

TrainState::TrainState(const RunConfig& cfg_in) : cfg(cfg_in) {
    Rng r_embed(derive_seed(cfg.seed, 1));
    Rng r_gen(derive_seed(cfg.seed, 2));
    Rng r_dstd(derive_seed(cfg.seed, 3));
    Rng r_ddiff(derive_seed(cfg.seed, 4));
    EmbedArch earch;
    earch.code_dim = cfg.label_count();
    earch.image_size = cfg.image_size;
    embed = LabelEmbed(earch, r_embed);
    gen = Generator(GenArch::from_config(cfg), r_gen);
    d_standard = DiscriminatorNet(DiscArch::from_config(cfg), r_dstd);
    d_diff = DiscriminatorNet(DiscArch::from_config(cfg), r_ddiff);
    rng = Rng(derive_seed(cfg.seed, 5));

    AdamParams hp{cfg.learning_rate, cfg.momentum_beta1, cfg.beta2, cfg.adam_epsilon};
    opt_g = AdamGroup(trainable_only(generator_params()), hp);
    std::vector<ParamRef> pstd, pdiff;
    d_standard.params(pstd, "d_standard");
    d_diff.params(pdiff, "d_diff");
    opt_d_standard = AdamGroup(trainable_only(pstd), hp);
    opt_d_diff = AdamGroup(trainable_only(pdiff), hp);
}

std::vector<ParamRef> TrainState::generator_params() {
    std::vector<ParamRef> refs;
    gen.params(refs, "gen");
    embed.params(refs, "embed");
    return refs;
}

std::vector<ParamRef> TrainState::discriminator_params() {
    std::vector<ParamRef> refs;
    d_standard.params(refs, "d_standard");
    d_diff.params(refs, "d_diff");
    return refs;
}

std::vector<std::pair<std::string, Tensor*>> TrainState::named_state() {
    std::vector<std::pair<std::string, Tensor*>> out;
    std::vector<ParamRef> refs;
    gen.params(refs, "gen");
    embed.params(refs, "embed");
    d_standard.params(refs, "d_standard");
    d_diff.params(refs, "d_diff");
    for (auto& r : refs) out.emplace_back(r.name, r.value);
    auto add_moments = [&out](AdamGroup& g) {
        for (size_t i = 0; i < g.refs().size(); ++i) {
            out.emplace_back("adam." + g.refs()[i].name + ".m", &g.m[i]);
            out.emplace_back("adam." + g.refs()[i].name + ".v", &g.v[i]);
        }
    };
    add_moments(opt_g);
    add_moments(opt_d_standard);
    add_moments(opt_d_diff);
    return out;
}

std::vector<int> batch_indices(int64_t iteration, int dataset_size, int batch_size,
                               uint64_t seed) {
    if (dataset_size <= 0) throw std::invalid_argument("batch_indices: empty dataset");
    if (batch_size < 1) throw std::invalid_argument("batch_indices: batch_size must be >= 1");
    const int64_t steps_per_epoch =
        (dataset_size + batch_size - 1) / static_cast<int64_t>(batch_size);
    const int64_t epoch = iteration / steps_per_epoch;
    const int64_t pos = iteration % steps_per_epoch;
    std::vector<int> perm(static_cast<size_t>(dataset_size));
    std::iota(perm.begin(), perm.end(), 0);
    Rng shuffle_rng(derive_seed(derive_seed(seed, 0xE90C17ull), static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(perm);
    const int64_t lo = pos * batch_size;
    const int64_t hi = std::min<int64_t>(lo + batch_size, dataset_size);
    return std::vector<int>(perm.begin() + lo, perm.begin() + hi);
}

LossReport train_step(TrainState& s, const std::vector<TrainingPair>& data,
                      const std::vector<int>& batch_idx, const PhaseHook& hook) {
    if (batch_idx.empty()) throw std::invalid_argument("train_step: empty batch");
    const RunConfig& cfg = s.cfg;
    const int n = static_cast<int>(batch_idx.size());
    const int hw = cfg.image_size;
    const int ncode = cfg.label_count();

    Tensor X({n, 3, hw, hw}), Y({n, 3, hw, hw}), C({n, ncode});
    for (int i = 0; i < n; ++i) {
        const TrainingPair& p = data[static_cast<size_t>(batch_idx[static_cast<size_t>(i)])];
        require_shape(p.x, {3, hw, hw}, "train_step: source image");
        require_shape(p.y, {3, hw, hw}, "train_step: target image");
        if (static_cast<int>(p.code.size()) != ncode)
            throw std::invalid_argument("train_step: pair code length " +
                                        std::to_string(p.code.size()) + " != model N=" +
                                        std::to_string(ncode));
        std::copy(p.x.data(), p.x.data() + p.x.size(), X.data() + static_cast<int64_t>(i) * 3 * hw * hw);
        std::copy(p.y.data(), p.y.data() + p.y.size(), Y.data() + static_cast<int64_t>(i) * 3 * hw * hw);
        for (int j = 0; j < ncode; ++j) C.at2(i, j) = p.code[static_cast<size_t>(j)];
    }

    LossReport r;
    r.iteration = s.iteration + 1;
    bool clamped = false;

    // --- discriminator phase: fakes detached from generator gradients ---
    Tensor lch_d = s.embed.infer(C);
    Tensor fake_d = s.gen.forward(concat_channels(X, lch_d), s.rng);

    s.d_standard.zero_grad();
    std::vector<double> real_std = tensor_to_scores(s.d_standard.forward(Y));
    s.d_standard.backward(scores_to_tensor(grad_d_loss_real(real_std)));
    std::vector<double> fake_std = tensor_to_scores(s.d_standard.forward(fake_d));
    s.d_standard.backward(scores_to_tensor(grad_d_loss_fake(fake_std)));
    r.d_standard = loss_d_standard(real_std, fake_std, &clamped);

    Tensor real_diff = differential(X, Y);
    Tensor fake_diff = differential(X, fake_d);
    s.d_diff.zero_grad();
    std::vector<double> real_dd = tensor_to_scores(s.d_diff.forward(real_diff));
    s.d_diff.backward(scores_to_tensor(grad_d_loss_real(real_dd)));
    std::vector<double> fake_dd = tensor_to_scores(s.d_diff.forward(fake_diff));
    s.d_diff.backward(scores_to_tensor(grad_d_loss_fake(fake_dd)));
    r.d_diff = loss_d_diff(real_dd, fake_dd, &clamped);
    r.d_total = total_d_loss(r.d_diff, r.d_standard);
    check_finite(r, /*d_phase_only=*/true);

    if (cfg.update_standard_d) s.opt_d_standard.step();
    if (cfg.update_diff_d) s.opt_d_diff.step();
    if (hook) hook("d_step");

    // --- generator phase: fakes regenerated through the updated critics ---
    s.gen.zero_grad();
    s.embed.zero_grad();
    Tensor lch = s.embed.forward(C);
    Tensor g_out = s.gen.forward(concat_channels(X, lch), s.rng);

    s.d_standard.zero_grad();
    s.d_diff.zero_grad();
    std::vector<double> g_fake_std = tensor_to_scores(s.d_standard.forward(g_out));
    Tensor g_fake_diff_img = differential(X, g_out);
    std::vector<double> g_fake_dd = tensor_to_scores(s.d_diff.forward(g_fake_diff_img));

    r.g_standard = loss_g_standard(g_fake_std, &clamped);
    r.g_diff = loss_g_diff(g_fake_dd, &clamped);
    r.recon = loss_recon(Y, g_out);
    r.g_total = total_g_loss(r.g_diff, r.g_standard, r.recon, cfg);
    r.scores_clamped = clamped;
    check_finite(r, /*d_phase_only=*/false);

    Tensor d_gout = grad_recon(Y, g_out);
    d_gout *= cfg.lambda_recon;
    if (cfg.lambda_standard > 0) {
        std::vector<double> gs = grad_g_loss_fake(g_fake_std);
        for (double& v : gs) v *= cfg.lambda_standard;
        d_gout += s.d_standard.backward(scores_to_tensor(gs));
    }
    if (cfg.lambda_diff > 0) {
        std::vector<double> gd = grad_g_loss_fake(g_fake_dd);
        for (double& v : gd) v *= cfg.lambda_diff;
        // d(x - g)/d(g) = -1
        d_gout -= s.d_diff.backward(scores_to_tensor(gd));
    }
    Tensor d_gin = s.gen.backward(d_gout);
    Tensor dX, d_lch;
    split_channels(d_gin, 3, dX, d_lch);
    s.embed.backward(d_lch);
    s.opt_g.step();
    // discriminator grads picked up during the generator backprop are dropped
    s.d_standard.zero_grad();
    s.d_diff.zero_grad();
    if (hook) hook("g_step");

    s.iteration = r.iteration;
    return r;
}

std::unique_ptr<TrainState> train(const RunConfig& cfg, const std::vector<TrainingPair>& data,
                                  const TrainOptions& opts) {
    cfg.validate();
    if (cfg.max_iterations < 0)
        throw std::invalid_argument("train: max_iterations is required and has no default");
    if (data.empty()) throw std::invalid_argument("train: empty dataset");

    auto state = std::make_unique<TrainState>(cfg);

    std::ofstream log;
    if (!opts.log_path.empty()) {
        log.open(opts.log_path);
        if (!log) throw std::runtime_error("train: cannot open log file " + opts.log_path);
        log << kLossCsvHeader << "\n";
    }
    auto checkpoint = [&](const std::string& name) {
        if (opts.checkpoint_dir.empty()) return;
        std::filesystem::create_directories(opts.checkpoint_dir);
        save_checkpoint(*state, opts.checkpoint_dir + "/" + name);
    };

    for (int64_t it = 0; it < cfg.max_iterations; ++it) {
        auto idx = batch_indices(it, static_cast<int>(data.size()), cfg.batch_size, cfg.seed);
        LossReport r = train_step(*state, data, idx);
        if (log.is_open()) log << loss_csv_line(r) << "\n";
        if (opts.on_report) opts.on_report(r);
        if ((it + 1) % cfg.checkpoint_every == 0)
            checkpoint("checkpoint_" + std::to_string(it + 1) + ".ckpt");
    }
    checkpoint("checkpoint_final.ckpt");
    return state;
}

// ------------------------------------------------------------- checkpoint

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian");

constexpr char kMagic[8] = {'D', 'G', 'A', 'N', 'C', 'K', 'P', '1'};
constexpr char kEndMark[8] = {'D', 'G', 'A', 'N', 'E', 'N', 'D', '1'};
constexpr uint32_t kVersion = 1;

template <class T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is, const char* what) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error(std::string("checkpoint: truncated while reading ") + what);
    return v;
}

void write_str(std::ostream& os, const std::string& s) {
    write_pod<uint64_t>(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& is, const char* what) {
    uint64_t n = read_pod<uint64_t>(is, what);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error(std::string("checkpoint: truncated while reading ") + what);
    return s;
}

}  // namespace

void save_checkpoint(TrainState& s, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("checkpoint: cannot open " + tmp + " for writing");
        os.write(kMagic, 8);
        write_pod<uint32_t>(os, kVersion);
        write_pod<int64_t>(os, s.iteration);
        write_pod<int64_t>(os, s.opt_g.t);
        write_pod<int64_t>(os, s.opt_d_standard.t);
        write_pod<int64_t>(os, s.opt_d_diff.t);
        write_str(os, config_to_text(s.cfg));
        auto named = s.named_state();
        write_pod<uint32_t>(os, static_cast<uint32_t>(named.size()));
        for (auto& [name, t] : named) {
            write_str(os, name);
            write_pod<uint8_t>(os, 0);  // dtype f64
            write_pod<uint32_t>(os, static_cast<uint32_t>(t->rank()));
            for (int d : t->shape()) write_pod<uint32_t>(os, static_cast<uint32_t>(d));
            os.write(reinterpret_cast<const char*>(t->data()),
                     static_cast<std::streamsize>(t->size() * static_cast<int64_t>(sizeof(double))));
        }
        write_str(os, s.rng.serialize());
        os.write(kEndMark, 8);
        if (!os) throw std::runtime_error("checkpoint: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::unique_ptr<TrainState> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const uint32_t version = read_pod<uint32_t>(is, "version");
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported format version " +
                                 std::to_string(version));
    const int64_t iteration = read_pod<int64_t>(is, "iteration");
    const int64_t t_g = read_pod<int64_t>(is, "optimizer step count");
    const int64_t t_dstd = read_pod<int64_t>(is, "optimizer step count");
    const int64_t t_ddiff = read_pod<int64_t>(is, "optimizer step count");
    RunConfig cfg = parse_config_text(read_str(is, "config"));

    auto state = std::make_unique<TrainState>(cfg);
    auto named = state->named_state();
    std::unordered_map<std::string, Tensor*> by_name;
    for (auto& [name, t] : named) by_name[name] = t;

    const uint32_t n_tensors = read_pod<uint32_t>(is, "tensor count");
    if (n_tensors != named.size())
        throw std::runtime_error("checkpoint: tensor count " + std::to_string(n_tensors) +
                                 " does not match model (" + std::to_string(named.size()) + ")");
    for (uint32_t i = 0; i < n_tensors; ++i) {
        const std::string name = read_str(is, "tensor name");
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw std::runtime_error("checkpoint: unknown tensor \"" + name + "\"");
        const uint8_t dtype = read_pod<uint8_t>(is, name.c_str());
        if (dtype != 0)
            throw std::runtime_error("checkpoint: unsupported dtype for \"" + name + "\"");
        const uint32_t rank = read_pod<uint32_t>(is, name.c_str());
        std::vector<int> dims(rank);
        for (auto& d : dims) d = static_cast<int>(read_pod<uint32_t>(is, name.c_str()));
        Tensor* dst = it->second;
        if (dst->shape() != dims)
            throw std::runtime_error("checkpoint: shape mismatch for \"" + name + "\": file has " +
                                     shape_str(dims) + ", model has " + shape_str(dst->shape()));
        is.read(reinterpret_cast<char*>(dst->data()),
                static_cast<std::streamsize>(dst->size() * static_cast<int64_t>(sizeof(double))));
        if (!is)
            throw std::runtime_error("checkpoint: truncated payload for \"" + name + "\"");
        by_name.erase(it);
    }
    if (!by_name.empty())
        throw std::runtime_error("checkpoint: missing tensor \"" + by_name.begin()->first + "\"");

    state->rng = Rng::deserialize(read_str(is, "rng state"));
    char endmark[8];
    is.read(endmark, 8);
    if (!is || std::memcmp(endmark, kEndMark, 8) != 0)
        throw std::runtime_error("checkpoint: truncated file (missing end marker)");
    state->iteration = iteration;
    state->opt_g.t = t_g;
    state->opt_d_standard.t = t_dstd;
    state->opt_d_diff.t = t_ddiff;
    return state;
}

}  // namespace dgan
