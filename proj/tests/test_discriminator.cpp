#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dgan/discriminator.hpp"
#include "dgan/rng.hpp"
#include "testutil.hpp"

using namespace dgan;
using namespace dgan::testutil;

namespace {

Tensor random_images(int n, int size, uint64_t seed, double lo = -1, double hi = 1) {
    Rng rng(seed);
    Tensor x({n, 3, size, size});
    for (int64_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo, hi);
    return x;
}

int64_t trainable_count(DiscriminatorNet& d) {
    std::vector<ParamRef> refs;
    d.params(refs, "d");
    int64_t n = 0;
    for (auto& r : refs)
        if (r.grad) n += r.value->size();
    return n;
}

}  // namespace

TEST_CASE("seeded builds are reproducible and independent seeds differ") {
    DiscArch arch;
    Rng r1(3), r2(3), r3(4);
    DiscriminatorNet a(arch, r1), b(arch, r2), c(arch, r3);
    std::vector<ParamRef> ra, rb, rc;
    a.params(ra, "d");
    b.params(rb, "d");
    c.params(rc, "d");
    double same = 0.0, diff = 0.0;
    for (size_t i = 0; i < ra.size(); ++i) {
        same = std::max(same, (*ra[i].value - *rb[i].value).abs_max());
        diff = std::max(diff, (*ra[i].value - *rc[i].value).abs_max());
    }
    CHECK(same == 0.0);
    CHECK(diff > 0.0);
}

TEST_CASE("five conv layers at 64x64 with batchnorm on blocks 2-4 only") {
    DiscArch arch;
    CHECK(arch.conv_layer_count() == 5);
    CHECK(arch.widths() == std::vector<int>{64, 128, 256, 512});
    Rng rng(1);
    DiscriminatorNet d(arch, rng);
    auto info = d.structure();
    REQUIRE(info.size() == 5);
    CHECK_FALSE(info[0].batchnorm);
    CHECK(info[1].batchnorm);
    CHECK(info[2].batchnorm);
    CHECK(info[3].batchnorm);
    CHECK_FALSE(info[4].batchnorm);
    CHECK(info[4].activation == "sigmoid");
    CHECK(info[4].out_ch == 1);
}

TEST_CASE("parameter count equals the analytic layer-table sum") {
    DiscArch arch;
    Rng rng(2);
    DiscriminatorNet d(arch, rng);
    const auto w = arch.widths();
    int64_t expect = 0;
    int cin = 3;
    for (size_t i = 0; i < w.size(); ++i) {
        expect += static_cast<int64_t>(w[i]) * cin * 16 + w[i];
        if (i != 0) expect += 2 * w[i];
        cin = w[i];
    }
    expect += static_cast<int64_t>(cin) * 16 + 1;  // 4x4 valid head
    CHECK(trainable_count(d) == expect);
}

TEST_CASE("structurally identical standard and differential discriminators") {
    DiscArch arch;
    Rng r1(5), r2(6);
    DiscriminatorNet d_std(arch, r1), d_diff(arch, r2);
    auto a = d_std.structure();
    auto b = d_diff.structure();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].in_ch == b[i].in_ch);
        CHECK(a[i].out_ch == b[i].out_ch);
        CHECK(a[i].batchnorm == b[i].batchnorm);
    }
}

TEST_CASE("scores live strictly inside (0,1) and inference is deterministic") {
    DiscArch arch;
    arch.image_size = 32;
    arch.base_width = 8;
    Rng rng(7);
    DiscriminatorNet d(arch, rng);
    Tensor x = random_images(3, 32, 11);
    Tensor s1 = d.infer(x);
    Tensor s2 = d.infer(x);
    for (int i = 0; i < 3; ++i) {
        CHECK(s1[i] > 0.0);
        CHECK(s1[i] < 1.0);
        CHECK(s1[i] == s2[i]);
    }
}

TEST_CASE("differential-range inputs pass through without clamping") {
    DiscArch arch;
    arch.image_size = 32;
    arch.base_width = 8;
    Rng rng(8);
    DiscriminatorNet d(arch, rng);
    Tensor x = random_images(2, 32, 13, -2.0, 2.0);
    CHECK(x.min() < -1.5);
    CHECK(x.max() > 1.5);
    Tensor s = d.infer(x);
    for (int i = 0; i < 2; ++i) {
        CHECK(std::isfinite(s[i]));
        CHECK(s[i] > 0.0);
        CHECK(s[i] < 1.0);
    }
    // twice the input amplitude actually changes the score: nothing saturated it away
    Tensor half = x;
    half *= 0.5;
    Tensor s2 = d.infer(half);
    CHECK((s - s2).abs_max() > 0.0);
}

TEST_CASE("8x8 reduced discriminator matches a direct convolution + sigmoid oracle") {
    DiscArch arch;
    arch.image_size = 8;
    arch.base_width = 2;
    Rng rng(9);
    DiscriminatorNet d(arch, rng);
    // layer table: conv1 3->2 (8->4, k4 s2 p1, no bn, lrelu), head 2->1 (4x4 valid, sigmoid)
    std::vector<ParamRef> refs;
    d.params(refs, "d");
    REQUIRE(refs.size() == 4);  // conv1.w conv1.b head.w head.b
    Rng wr(100);
    for (auto& r : refs)
        for (int64_t i = 0; i < r.value->size(); ++i) (*r.value)[i] = 0.3 * wr.normal();

    Tensor x = random_images(1, 8, 55);
    const double got = discriminator_forward(d, x.reshaped({3, 8, 8}));

    // direct convolution oracle (independent loops, no im2col)
    const Tensor& w1 = *refs[0].value;  // {2,3,4,4}
    const Tensor& b1 = *refs[1].value;
    Tensor h({2, 4, 4});
    for (int co = 0; co < 2; ++co)
        for (int ho = 0; ho < 4; ++ho)
            for (int wo = 0; wo < 4; ++wo) {
                double acc = b1[co];
                for (int ci = 0; ci < 3; ++ci)
                    for (int kh = 0; kh < 4; ++kh)
                        for (int kw = 0; kw < 4; ++kw) {
                            const int hi = ho * 2 - 1 + kh;
                            const int wi = wo * 2 - 1 + kw;
                            if (hi < 0 || hi >= 8 || wi < 0 || wi >= 8) continue;
                            acc += w1.at4(co, ci, kh, kw) * x.at4(0, ci, hi, wi);
                        }
                h.at3(co, ho, wo) = acc > 0 ? acc : 0.2 * acc;  // leaky relu
            }
    const Tensor& w2 = *refs[2].value;  // {1,2,4,4}
    const Tensor& b2 = *refs[3].value;
    double logit = b2[0];
    for (int ci = 0; ci < 2; ++ci)
        for (int kh = 0; kh < 4; ++kh)
            for (int kw = 0; kw < 4; ++kw) logit += w2.at4(0, ci, kh, kw) * h.at3(ci, kh, kw);
    const double want = 1.0 / (1.0 + std::exp(-logit));
    CHECK(got == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("score gradient wrt input matches finite differences") {
    DiscArch arch;
    arch.image_size = 16;
    arch.base_width = 4;
    Rng rng(10);
    DiscriminatorNet d(arch, rng);
    Tensor x = random_images(2, 16, 77);

    auto loss = [&]() {
        Tensor s = d.forward(x);
        return s[0] + 0.5 * s[1];
    };
    d.zero_grad();
    d.forward(x);
    Tensor dscore({2});
    dscore[0] = 1.0;
    dscore[1] = 0.5;
    Tensor dx = d.backward(dscore);
    Rng pick(3);
    for (int k = 0; k < 6; ++k) {
        const int64_t i = pick.uniform_int(static_cast<int>(x.size()));
        const double numeric = central_difference(loss, &x[i]);
        CHECK(rel_err(dx[i], numeric) < 1e-3);
    }
}

TEST_CASE("parameter gradients match finite differences") {
    DiscArch arch;
    arch.image_size = 16;
    arch.base_width = 4;
    Rng rng(11);
    DiscriminatorNet d(arch, rng);
    Tensor x = random_images(2, 16, 78);
    auto loss = [&]() {
        Tensor s = d.forward(x);
        return s[0] - 2.0 * s[1];
    };
    auto recompute = [&]() {
        d.zero_grad();
        d.forward(x);
        Tensor ds({2});
        ds[0] = 1.0;
        ds[1] = -2.0;
        d.backward(ds);
    };
    std::vector<ParamRef> refs;
    d.params(refs, "d");
    std::vector<ParamRef> trainable;
    for (auto& r : refs)
        if (r.grad) trainable.push_back(r);
    auto res = check_gradients(trainable, loss, recompute, 1e-3, 1e-4, 2);
    CHECK(res.passed == res.checked);
}
