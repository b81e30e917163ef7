#include "dgan/objectives.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dgan {

namespace {

double clamp_score(double s, bool* clamped) {
    if (s < kScoreClampEps) {
        if (clamped) *clamped = true;
        return kScoreClampEps;
    }
    if (s > 1.0 - kScoreClampEps) {
        if (clamped) *clamped = true;
        return 1.0 - kScoreClampEps;
    }
    return s;
}

void check_nonempty(const std::vector<double>& s, const char* what) {
    if (s.empty()) throw std::invalid_argument(std::string(what) + ": empty score batch");
}

}  // namespace

std::string loss_csv_line(const LossReport& r) {
    std::ostringstream os;
    os.precision(12);
    os << r.iteration << ',' << r.d_standard << ',' << r.d_diff << ',' << r.d_total << ','
       << r.g_standard << ',' << r.g_diff << ',' << r.recon << ',' << r.g_total;
    return os.str();
}

double loss_d_standard(const std::vector<double>& scores_real,
                       const std::vector<double>& scores_fake, bool* clamped) {
    check_nonempty(scores_real, "loss_d");
    if (scores_real.size() != scores_fake.size())
        throw std::invalid_argument("loss_d: real/fake batch size mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < scores_real.size(); ++i) {
        acc -= std::log(clamp_score(scores_real[i], clamped));
        acc -= std::log(1.0 - clamp_score(scores_fake[i], clamped));
    }
    return acc / static_cast<double>(scores_real.size());
}

double loss_g_standard(const std::vector<double>& scores_fake, bool* clamped) {
    check_nonempty(scores_fake, "loss_g");
    double acc = 0.0;
    for (double s : scores_fake) acc -= std::log(clamp_score(s, clamped));
    return acc / static_cast<double>(scores_fake.size());
}

double loss_d_diff(const std::vector<double>& scores_real_diff,
                   const std::vector<double>& scores_fake_diff, bool* clamped) {
    return loss_d_standard(scores_real_diff, scores_fake_diff, clamped);
}

double loss_g_diff(const std::vector<double>& scores_fake_diff, bool* clamped) {
    return loss_g_standard(scores_fake_diff, clamped);
}

double loss_recon(const Tensor& y, const Tensor& g_out) {
    if (!y.same_shape(g_out))
        throw std::invalid_argument("loss_recon: shape mismatch " + shape_str(y.shape()) +
                                    " vs " + shape_str(g_out.shape()));
    double acc = 0.0;
    for (int64_t i = 0; i < y.size(); ++i) acc += std::fabs(y[i] - g_out[i]);
    return acc / static_cast<double>(y.size());
}

double total_d_loss(double d_diff, double d_standard) { return d_diff + d_standard; }

double total_g_loss(double g_diff, double g_standard, double recon, const RunConfig& cfg) {
    return cfg.lambda_diff * g_diff + cfg.lambda_standard * g_standard +
           cfg.lambda_recon * recon;
}

std::vector<double> grad_d_loss_real(const std::vector<double>& scores_real) {
    const double n = static_cast<double>(scores_real.size());
    std::vector<double> g(scores_real.size());
    for (size_t i = 0; i < scores_real.size(); ++i)
        g[i] = -1.0 / (n * clamp_score(scores_real[i], nullptr));
    return g;
}

std::vector<double> grad_d_loss_fake(const std::vector<double>& scores_fake) {
    const double n = static_cast<double>(scores_fake.size());
    std::vector<double> g(scores_fake.size());
    for (size_t i = 0; i < scores_fake.size(); ++i)
        g[i] = 1.0 / (n * (1.0 - clamp_score(scores_fake[i], nullptr)));
    return g;
}

std::vector<double> grad_g_loss_fake(const std::vector<double>& scores_fake) {
    const double n = static_cast<double>(scores_fake.size());
    std::vector<double> g(scores_fake.size());
    for (size_t i = 0; i < scores_fake.size(); ++i)
        g[i] = -1.0 / (n * clamp_score(scores_fake[i], nullptr));
    return g;
}

Tensor grad_recon(const Tensor& y, const Tensor& g_out) {
    if (!y.same_shape(g_out))
        throw std::invalid_argument("grad_recon: shape mismatch");
    Tensor g(y.shape());
    const double inv = 1.0 / static_cast<double>(y.size());
    for (int64_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - g_out[i];
        g[i] = d > 0 ? -inv : (d < 0 ? inv : 0.0);
    }
    return g;
}

}  // namespace dgan
