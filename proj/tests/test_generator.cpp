#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgan/generator.hpp"
#include "dgan/rng.hpp"
#include "testutil.hpp"

using namespace dgan;
using namespace dgan::testutil;

namespace {

Tensor random_input(const GenArch& a, int n, uint64_t seed) {
    Rng rng(seed);
    Tensor x({n, a.in_channels, a.image_size, a.image_size});
    for (int64_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
    return x;
}

int64_t trainable_count(Generator& g) {
    std::vector<ParamRef> refs;
    g.params(refs, "g");
    int64_t n = 0;
    for (auto& r : refs)
        if (r.grad) n += r.value->size();
    return n;
}

}  // namespace

TEST_CASE("same seed builds identical generators") {
    GenArch arch;  // 64, depth 6, width 64
    Rng r1(7), r2(7);
    Generator a(arch, r1), b(arch, r2);
    std::vector<ParamRef> ra, rb;
    a.params(ra, "g");
    b.params(rb, "g");
    REQUIRE(ra.size() == rb.size());
    for (size_t i = 0; i < ra.size(); ++i)
        CHECK((*ra[i].value - *rb[i].value).abs_max() == 0.0);
}

TEST_CASE("parameter count equals the closed-form sum over the layer table") {
    GenArch arch;
    Rng rng(1);
    Generator g(arch, rng);

    // encoder widths (64,128,256,512,512,512), decoder (512,512,256,128,64,3)
    const std::vector<int> enc = arch.encoder_widths();
    const std::vector<int> dec = arch.decoder_widths();
    REQUIRE(enc == std::vector<int>{64, 128, 256, 512, 512, 512});
    REQUIRE(dec == std::vector<int>{512, 512, 256, 128, 64, 3});

    int64_t expect = 0;
    int cin = 4;
    for (size_t i = 0; i < enc.size(); ++i) {
        expect += static_cast<int64_t>(enc[i]) * cin * 16 + enc[i];  // conv w + b
        if (i != 0) expect += 2 * enc[i];                            // bn gamma/beta
        cin = enc[i];
    }
    for (size_t k = 0; k < dec.size(); ++k) {
        const int in = (k == 0) ? enc.back() : dec[k - 1] + enc[enc.size() - 1 - k];
        expect += static_cast<int64_t>(in) * dec[k] * 16 + dec[k];
        if (k != 0 && k + 1 != dec.size()) expect += 2 * dec[k];
    }
    CHECK(trainable_count(g) == expect);
}

TEST_CASE("encoder bottleneck reaches 1x1 through six halvings") {
    GenArch arch;
    int s = arch.image_size;
    for (int i = 0; i < arch.depth; ++i) s /= 2;
    CHECK(s == 1);
    // and the declared widths make the bottleneck 512 channels
    CHECK(arch.encoder_widths().back() == 512);
}

TEST_CASE("unsupported image size is rejected") {
    GenArch arch;
    arch.image_size = 48;
    CHECK_THROWS_WITH_AS(arch.validate(), doctest::Contains("unsupported image size"),
                         std::invalid_argument);
}

TEST_CASE("batchnorm and dropout exceptions match the declared layout") {
    GenArch arch;
    Rng rng(2);
    Generator g(arch, rng);
    auto info = g.structure();
    REQUIRE(info.size() == 12);
    // encoder: no BN on the first block only
    CHECK_FALSE(info[0].batchnorm);
    for (int i = 1; i < 6; ++i) CHECK(info[static_cast<size_t>(i)].batchnorm);
    // decoder: no BN on the first decoder block and on the output block
    CHECK_FALSE(info[6].batchnorm);
    for (int i = 7; i < 11; ++i) CHECK(info[static_cast<size_t>(i)].batchnorm);
    CHECK_FALSE(info[11].batchnorm);
    // dropout on the first two decoder blocks only
    CHECK(info[6].dropout);
    CHECK(info[7].dropout);
    for (int i = 8; i < 12; ++i) CHECK_FALSE(info[static_cast<size_t>(i)].dropout);
    CHECK(info[11].activation == "relu+tanh");
}

TEST_CASE("forward output is 64x64x3 strictly inside (-1,1)") {
    GenArch arch;
    arch.base_width = 8;  // keep the test quick
    Rng rng(3);
    Generator g(arch, rng);
    Tensor x = random_input(arch, 2, 17);
    Tensor y = g.infer(x);
    CHECK(y.shape() == std::vector<int>{2, 3, 64, 64});
    CHECK(y.min() > -1.0);
    CHECK(y.max() < 1.0);
}

TEST_CASE("deterministic without dropout, stochastic with") {
    GenArch arch;
    arch.image_size = 16;
    arch.depth = 3;
    arch.base_width = 8;
    Rng rng(4);
    Generator g(arch, rng);
    Tensor x = random_input(arch, 2, 5);

    Tensor a = g.infer(x);
    Tensor b = g.infer(x);
    CHECK((a - b).abs_max() == 0.0);

    GenForwardOpts opts;
    Rng d1(9), d2(9), d3(10);
    opts.dropout_rng = &d1;
    Tensor c1 = g.infer(x, opts);
    opts.dropout_rng = &d2;
    Tensor c2 = g.infer(x, opts);
    opts.dropout_rng = &d3;
    Tensor c3 = g.infer(x, opts);
    CHECK((c1 - c2).abs_max() == 0.0);  // same dropout seed
    CHECK((c1 - c3).abs_max() > 0.0);   // different seed
}

TEST_CASE("shape mismatch is rejected naming expected dims") {
    GenArch arch;
    arch.image_size = 16;
    arch.depth = 3;
    arch.base_width = 8;
    Rng rng(5);
    Generator g(arch, rng);
    Tensor bad({1, 4, 32, 32});
    CHECK_THROWS_WITH_AS(g.infer(bad), doctest::Contains("expected {N,4,16,16}"),
                         std::invalid_argument);
}

TEST_CASE("zeroing the level-1 encoder skip changes the output") {
    GenArch arch;
    arch.image_size = 16;
    arch.depth = 4;
    arch.base_width = 8;
    Rng rng(6);
    Generator g(arch, rng);
    Tensor x = random_input(arch, 1, 21);
    Tensor base = g.infer(x);
    for (int level = 1; level < arch.depth; ++level) {
        GenForwardOpts opts;
        opts.zero_skip_level = level;
        Tensor cut = g.infer(x, opts);
        CHECK((cut - base).abs_max() > 0.0);
    }
}

TEST_CASE("generator training-path gradients match finite differences") {
    GenArch arch;
    arch.image_size = 16;
    arch.depth = 3;
    arch.base_width = 8;
    Rng rng(8);
    Generator g(arch, rng);
    Tensor x = random_input(arch, 2, 31);

    Tensor w;
    {
        Rng r(99);
        Tensor probe = g.infer(x);
        w = Tensor(probe.shape());
        for (int64_t i = 0; i < w.size(); ++i) w[i] = r.normal();
    }
    auto obj = [&](const Tensor& out) {
        double s = 0.0;
        for (int64_t i = 0; i < out.size(); ++i) s += w[i] * out[i];
        return s;
    };
    auto loss = [&]() {
        Rng drop(42);
        return obj(g.forward(x, drop));
    };
    auto recompute = [&]() {
        g.zero_grad();
        Rng drop(42);
        g.forward(x, drop);
        g.backward(w);
    };
    std::vector<ParamRef> refs;
    g.params(refs, "g");
    std::vector<ParamRef> trainable;
    for (auto& r : refs)
        if (r.grad) trainable.push_back(r);
    auto res = check_gradients(trainable, loss, recompute, 1e-3, 1e-4, 3);
    CHECK(res.checked > 40);
    CHECK(res.passed == res.checked);
}

TEST_CASE("input gradient flows through both image and label channel") {
    GenArch arch;
    arch.image_size = 16;
    arch.depth = 3;
    arch.base_width = 8;
    Rng rng(9);
    Generator g(arch, rng);
    Tensor x = random_input(arch, 1, 41);
    Rng drop(7);
    Tensor y = g.forward(x, drop);
    Tensor dy = Tensor::full(y.shape(), 1.0 / y.size());
    Tensor dx = g.backward(dy);
    CHECK(dx.shape() == x.shape());
    // channel 3 is the label channel; its gradient must be nonzero
    double label_grad = 0.0;
    for (int h = 0; h < 16; ++h)
        for (int ww = 0; ww < 16; ++ww) label_grad += std::fabs(dx.at4(0, 3, h, ww));
    CHECK(label_grad > 0.0);
}
