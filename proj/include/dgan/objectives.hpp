#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dgan/config.hpp"
#include "dgan/tensor.hpp"

namespace dgan {

// Per-iteration loss values (batch means). d_total is the sum of the two
// discriminator losses; g_total is the lambda-weighted sum of the generator
// terms. scores_clamped flags that some score hit the log-clamp.
struct LossReport {
    int64_t iteration = 0;
    double d_standard = 0.0;
    double d_diff = 0.0;
    double d_total = 0.0;
    double g_standard = 0.0;
    double g_diff = 0.0;
    double recon = 0.0;
    double g_total = 0.0;
    bool scores_clamped = false;
};

inline constexpr double kScoreClampEps = 1e-7;
inline constexpr const char* kLossCsvHeader =
    "iteration,d_standard,d_diff,d_total,g_standard,g_diff,recon,g_total";

std::string loss_csv_line(const LossReport& r);

// mean(-log r - log(1 - f)) over equal-length batches; scores are clamped to
// [eps, 1-eps] before the log and the clamp is flagged.
double loss_d_standard(const std::vector<double>& scores_real,
                       const std::vector<double>& scores_fake, bool* clamped = nullptr);

// mean(-log f): the non-saturating generator loss.
double loss_g_standard(const std::vector<double>& scores_fake, bool* clamped = nullptr);

// Same functional forms applied to differential-image scores.
double loss_d_diff(const std::vector<double>& scores_real_diff,
                   const std::vector<double>& scores_fake_diff, bool* clamped = nullptr);
double loss_g_diff(const std::vector<double>& scores_fake_diff, bool* clamped = nullptr);

// Mean absolute difference over batch, channels and pixels.
double loss_recon(const Tensor& y, const Tensor& g_out);

double total_d_loss(double d_diff, double d_standard);
double total_g_loss(double g_diff, double g_standard, double recon, const RunConfig& cfg);

// Gradient helpers for the training loop (d loss / d score, mean-reduced).
std::vector<double> grad_d_loss_real(const std::vector<double>& scores_real);
std::vector<double> grad_d_loss_fake(const std::vector<double>& scores_fake);
std::vector<double> grad_g_loss_fake(const std::vector<double>& scores_fake);
// d(mean|y - g|)/d(g): -sign(y - g)/count.
Tensor grad_recon(const Tensor& y, const Tensor& g_out);

}  // namespace dgan
