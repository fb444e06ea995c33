#include <gtest/gtest.h>

#include <cmath>

#include "lsrl/layers.hpp"
#include "lsrl/losses.hpp"
#include "lsrl/optim.hpp"
#include "lsrl/rng.hpp"
#include "lsrl/tensor.hpp"

using namespace lsrl;

TEST(Tensor, ShapeAndNumel) {
    Tensor t({2, 3, 4});
    EXPECT_EQ(t.numel(), 24u);
    EXPECT_EQ(t.dim(1), 3u);
    for (double v : t.data) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(t.reshaped({5, 5}), std::invalid_argument);
    Tensor r = t.reshaped({4, 6});
    EXPECT_EQ(r.dim(0), 4u);
}

TEST(Dense, IdentityWeightsPassThrough) {
    nn::Dense d(3, 3);
    std::vector<nn::ParamRef> ps;
    d.collect_params(ps);
    Tensor& w = *ps[0].value;
    for (int i = 0; i < 3; ++i) w[i * 3 + i] = 1.0;

    Tensor x({1, 3});
    x.data = {1.5, -2.0, 0.25};
    Tensor y = d.forward(x);
    EXPECT_EQ(y.data, x.data);
}

TEST(Dense, HandComputedTwoToOne) {
    nn::Dense d(2, 1);
    std::vector<nn::ParamRef> ps;
    d.collect_params(ps);
    ps[0].value->data = {1.0, 2.0};
    ps[1].value->data = {3.0};

    Tensor x({1, 2});
    x.data = {4.0, 5.0};
    Tensor y = d.forward(x);
    EXPECT_DOUBLE_EQ(y[0], 17.0);
}

TEST(Dense, ShapeMismatchThrows) {
    nn::Dense d(4, 2);
    Tensor x({1, 3});
    EXPECT_THROW(d.forward(x), std::invalid_argument);
}

TEST(Conv2d, OneByOneIdentityKernel) {
    nn::Conv2d conv(1, 1, 1, 1, 0);
    std::vector<nn::ParamRef> ps;
    conv.collect_params(ps);
    ps[0].value->data = {1.0};

    Rng rng(1);
    Tensor x({1, 1, 5, 5});
    for (double& v : x.data) v = rng.uniform(-1, 1);
    Tensor y = conv.forward(x);
    ASSERT_EQ(y.shape, x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_DOUBLE_EQ(y[i], x[i]);
}

TEST(Conv2d, OnesKernelOnOnesInput) {
    nn::Conv2d conv(1, 1, 2, 1, 0);
    std::vector<nn::ParamRef> ps;
    conv.collect_params(ps);
    ps[0].value->fill(1.0);

    Tensor x({1, 1, 3, 3});
    x.fill(1.0);
    Tensor y = conv.forward(x);
    ASSERT_EQ(y.shape, (std::vector<std::size_t>{1, 1, 2, 2}));
    for (double v : y.data) EXPECT_DOUBLE_EQ(v, 4.0);
}

TEST(Conv2d, PaperShapeContracts) {
    // k=4, s=2, p=1 halves 64 -> 32; k=4, s=1, p=0 maps 4 -> 1
    nn::Conv2d halve(2, 3, 4, 2, 1);
    Tensor x({1, 2, 64, 64});
    EXPECT_EQ(halve.forward(x).shape, (std::vector<std::size_t>{1, 3, 32, 32}));

    nn::Conv2d collapse(2, 3, 4, 1, 0);
    Tensor x4({1, 2, 4, 4});
    EXPECT_EQ(collapse.forward(x4).shape, (std::vector<std::size_t>{1, 3, 1, 1}));
}

TEST(Conv2d, NonIntegerOutputSizeThrows) {
    nn::Conv2d conv(1, 1, 4, 2, 0);
    Tensor x({1, 1, 5, 5});
    EXPECT_THROW(conv.forward(x), std::invalid_argument);
}

TEST(Conv2d, HalvingAndDoublingProperty) {
    Rng rng(7);
    for (std::size_t s : {8u, 16u, 32u}) {
        nn::Conv2d down(1, 2, 4, 2, 1, &rng);
        Tensor x({2, 1, s, s});
        for (double& v : x.data) v = rng.uniform(-1, 1);
        Tensor y = down.forward(x);
        EXPECT_EQ(y.dim(2), s / 2);

        nn::TConv2d up(2, 1, 4, 2, 1, &rng);
        Tensor z = up.forward(y);
        EXPECT_EQ(z.dim(2), s);
        EXPECT_EQ(z.dim(3), s);
    }
}

TEST(TConv2d, ExpandsOneToFour) {
    nn::TConv2d t(3, 2, 4, 1, 0);
    Tensor x({1, 3, 1, 1});
    x.fill(1.0);
    EXPECT_EQ(t.forward(x).shape, (std::vector<std::size_t>{1, 2, 4, 4}));
}

TEST(Activations, ReluAndLeaky) {
    EXPECT_EQ(nn::relu(-3.0), 0.0);
    EXPECT_EQ(nn::relu(3.0), 3.0);
    EXPECT_DOUBLE_EQ(nn::leaky_relu(-10.0, 0.2), -2.0);
    EXPECT_DOUBLE_EQ(nn::leaky_relu(10.0, 0.2), 10.0);
}

TEST(Activations, SoftmaxUniformAndShiftInvariance) {
    Tensor logits({13, 1, 1});
    logits.fill(0.7);
    Tensor p = nn::softmax_channels(logits);
    for (double v : p.data) EXPECT_NEAR(v, 1.0 / 13.0, 1e-12);

    Rng rng(2);
    Tensor a({13, 2, 2});
    for (double& v : a.data) v = rng.uniform(-3, 3);
    Tensor b = a;
    for (double& v : b.data) v += 5.25;
    Tensor pa = nn::softmax_channels(a);
    Tensor pb = nn::softmax_channels(b);
    for (std::size_t i = 0; i < pa.numel(); ++i) EXPECT_NEAR(pa[i], pb[i], 1e-12);
}

TEST(Activations, SoftmaxIsDistribution) {
    Rng rng(11);
    Tensor logits({2, 13, 3, 3});
    for (double& v : logits.data) v = rng.uniform(-20, 20);
    Tensor p = nn::softmax_channels(logits);
    const std::size_t plane = 9;
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t px = 0; px < plane; ++px) {
            double sum = 0.0;
            for (int c = 0; c < 13; ++c) {
                double v = p[b * 13 * plane + c * plane + px];
                EXPECT_GE(v, 0.0);
                sum += v;
            }
            EXPECT_NEAR(sum, 1.0, 1e-6);
        }
}

TEST(WeightedCe, HalfProbabilityPixel) {
    // two equally likely classes; true class carries all the weight
    Tensor logits({13, 1, 1});
    logits.fill(-1000.0);
    logits[0] = 2.0;
    logits[1] = 2.0;
    SemanticGrid target(1, 1);
    target.cells[0] = 0;
    ClassWeights w{};
    w.w[0] = 1.0;
    OneHotVolume tv = one_hot(target);
    nn::CeLossResult r = nn::weighted_ce_loss(logits, tv, w);
    EXPECT_NEAR(r.loss, 0.6931471805599453, 1e-9);
}

TEST(WeightedCe, PerfectPredictionLossVanishes) {
    Tensor logits({13, 1, 1});
    logits.fill(0.0);
    logits[0] = 60.0;
    SemanticGrid target(1, 1);
    target.cells[0] = 0;
    ClassWeights w{};
    w.w.fill(1.0 / 13.0);
    nn::CeLossResult r = nn::weighted_ce_loss(logits, one_hot(target), w);
    EXPECT_NEAR(r.loss, 0.0, 1e-9);
}

TEST(WeightedCe, ShapeMismatchThrows) {
    Tensor logits({13, 2, 2});
    SemanticGrid target(3, 3);
    ClassWeights w{};
    w.w.fill(1.0 / 13.0);
    EXPECT_THROW(nn::weighted_ce_loss(logits, one_hot(target), w), std::invalid_argument);
}

TEST(TdLoss, ZeroAtFixedPoint) {
    auto r = nn::td_loss(3.0, 3.0);
    EXPECT_EQ(r.loss, 0.0);
    EXPECT_EQ(r.dpredicted, 0.0);
}

TEST(TdLoss, HandComputed) {
    auto r = nn::td_loss(1.0, 3.0);
    EXPECT_DOUBLE_EQ(r.loss, 2.0);
    EXPECT_DOUBLE_EQ(r.dpredicted, -2.0);
}

TEST(TdLoss, SymmetricInErrorSign) {
    EXPECT_DOUBLE_EQ(nn::td_loss(2.0, 0.0).loss, nn::td_loss(0.0, 2.0).loss);
}

TEST(Optim, SgdHandComputed) {
    Tensor w({1}), g({1});
    w[0] = 1.0;
    g[0] = 2.0;
    std::vector<nn::ParamRef> ps{{&w, &g}};
    nn::Sgd opt(0.1);
    opt.step(ps);
    EXPECT_DOUBLE_EQ(w[0], 0.8);
}

TEST(Optim, ZeroGradientIsNoOp) {
    Rng rng(4);
    Tensor w({8}), g({8});
    for (double& v : w.data) v = rng.uniform(-2, 2);
    Tensor w0 = w;
    std::vector<nn::ParamRef> ps{{&w, &g}};

    nn::Sgd sgd(0.5);
    sgd.step(ps);
    EXPECT_EQ(w.data, w0.data);

    nn::Adam adam(0.5);
    adam.step(ps);
    for (std::size_t i = 0; i < w.numel(); ++i) EXPECT_NEAR(w[i], w0[i], 1e-12);
}

TEST(Optim, AdamFirstStepMagnitude) {
    for (double c : {3.0, -0.25, 1e-3}) {
        Tensor w({4}), g({4});
        w.fill(1.0);
        g.fill(c);
        std::vector<nn::ParamRef> ps{{&w, &g}};
        nn::Adam adam(0.01);
        adam.step(ps);
        // bias correction makes the first step -lr * sign(c), up to eps rounding
        for (double v : w.data) EXPECT_NEAR(v, 1.0 - 0.01 * (c > 0 ? 1.0 : -1.0), 1e-5);
    }
}

TEST(Optim, AdamShapeMismatchThrows) {
    Tensor w({4}), g({3});
    std::vector<nn::ParamRef> ps{{&w, &g}};
    nn::Adam adam(0.01);
    EXPECT_THROW(adam.step(ps), std::invalid_argument);
}

TEST(Sequential, CloneAndCopyParamsBitwise) {
    Rng rng(8);
    nn::Sequential net;
    net.emplace<nn::Dense>(6, 5, &rng);
    net.emplace<nn::Relu>();
    net.emplace<nn::Dense>(5, 2, &rng);

    nn::Sequential copy = net;
    Tensor x({3, 6});
    for (double& v : x.data) v = rng.uniform(-1, 1);
    Tensor y1 = net.forward(x);
    Tensor y2 = copy.forward(x);
    EXPECT_EQ(y1.data, y2.data);

    // diverge, then re-sync
    auto ps = net.params();
    (*ps[0].value)[0] += 0.5;
    EXPECT_NE(net.forward(x).data, copy.forward(x).data);
    copy.copy_params_from(net);
    EXPECT_EQ(net.forward(x).data, copy.forward(x).data);
}
