#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gazekex/optim.hpp"
#include "gazekex/tensor.hpp"

using namespace gazekex;
using Catch::Approx;

TEST_CASE("first rmsprop step matches the closed form", "[optim]") {
    // theta = 0, g = 1: v = 0.1, step = lr / (sqrt(0.1) + eps).
    ParamSet p;
    p.add("w", Tensor::row({0.0}));
    ParamSet g = p.zeros_like();
    g.at("w")[0] = 1.0;

    RmsProp opt(p, RmsPropConfig{});
    opt.step(p, g);
    REQUIRE(p.at("w")[0] == Approx(-0.0031622775601683824).margin(1e-15));
}

TEST_CASE("rmsprop accumulates squared-gradient state across steps", "[optim]") {
    ParamSet p;
    p.add("w", Tensor::row({0.0}));

    RmsPropConfig cfg;
    RmsProp opt(p, cfg);
    double v = 0.0, theta = 0.0;
    for (int step = 0; step < 5; ++step) {
        ParamSet g = p.zeros_like();
        g.at("w")[0] = 1.0;
        opt.step(p, g);
        v = cfg.decay * v + (1.0 - cfg.decay) * 1.0;
        theta -= cfg.learning_rate * 1.0 / (std::sqrt(v) + cfg.epsilon);
        REQUIRE(p.at("w")[0] == Approx(theta).margin(1e-15));
    }
}

TEST_CASE("global norm clipping rescales only oversized gradients", "[optim]") {
    ParamSet g;
    g.add("a", Tensor::row({3.0, 4.0}));  // norm 5 across both tensors combined with b
    g.add("b", Tensor::row({12.0}));      // total norm 13

    const double norm = global_grad_norm(g);
    REQUIRE(norm == Approx(13.0));

    ParamSet clipped = g;
    double pre = clip_by_global_norm(clipped, 5.0);
    REQUIRE(pre == Approx(13.0));
    REQUIRE(global_grad_norm(clipped) == Approx(5.0).margin(1e-12));
    // Direction preserved.
    REQUIRE(clipped.at("a")[0] / clipped.at("a")[1] == Approx(3.0 / 4.0));

    ParamSet small;
    small.add("a", Tensor::row({0.3, 0.4}));
    clip_by_global_norm(small, 5.0);
    REQUIRE(small.at("a")[0] == 0.3);
    REQUIRE(small.at("a")[1] == 0.4);
}

TEST_CASE("clipping can be disabled", "[optim]") {
    ParamSet p;
    p.add("w", Tensor::row({0.0}));
    ParamSet g = p.zeros_like();
    g.at("w")[0] = 100.0;

    RmsPropConfig cfg;
    cfg.clip = false;
    RmsProp opt(p, cfg);
    opt.step(p, g);
    // Unclipped g = 100: v = 1000, step = lr * 100 / sqrt(1000).
    const double expect = -cfg.learning_rate * 100.0 / (std::sqrt(1000.0) + cfg.epsilon);
    REQUIRE(p.at("w")[0] == Approx(expect).margin(1e-15));
}

TEST_CASE("rmsprop drives a quadratic toward its minimum", "[optim]") {
    ParamSet p;
    p.add("w", Tensor::row({5.0}));
    RmsPropConfig cfg;
    cfg.learning_rate = 0.05;
    RmsProp opt(p, cfg);
    for (int i = 0; i < 400; ++i) {
        ParamSet g = p.zeros_like();
        g.at("w")[0] = 2.0 * p.at("w")[0];  // d/dw w^2
        opt.step(p, g);
    }
    REQUIRE(std::abs(p.at("w")[0]) < 0.05);
}
