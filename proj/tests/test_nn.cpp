#include <doctest.h>

#include <cmath>

#include "opev/nn.hpp"

using namespace opev;
using namespace opev::nn;

namespace {

Tensor2 random_tensor(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Tensor2 t(r, c);
    for (double& x : t.vec()) x = rng.uniform(-scale, scale);
    return t;
}

// Loss used by the gradient checks: L = sum_ij u_ij * y_ij for a fixed
// random projection u, so every output entry contributes.
double projected_loss(const Mlp& net, const Tensor2& input, const Tensor2& u) {
    const Tensor2 y = net.forward(input);
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) loss += u.vec()[i] * y.vec()[i];
    return loss;
}

// Central finite differences over every parameter; the independent oracle
// for backward().
struct FdResult {
    double max_rel_err = 0.0;
};

FdResult finite_diff_check(Mlp& net, const Tensor2& input, const Tensor2& u, double h = 1e-5) {
    GradTape tape;
    net.forward(input, tape);
    Grads analytic = net.backward(tape, u);

    FdResult res;
    auto check_tensor = [&](Tensor2& param, const Tensor2& grad) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double saved = param.vec()[i];
            param.vec()[i] = saved + h;
            const double lp = projected_loss(net, input, u);
            param.vec()[i] = saved - h;
            const double lm = projected_loss(net, input, u);
            param.vec()[i] = saved;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = grad.vec()[i];
            const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
            res.max_rel_err = std::max(res.max_rel_err, std::fabs(fd - an) / denom);
        }
    };
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        check_tensor(net.weights()[l], analytic.w[l]);
        check_tensor(net.biases()[l], analytic.b[l]);
    }
    return res;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("zero net maps any input to zero") {
    Rng rng(1);
    Mlp net({{4, 3, 2}, Act::Relu, Act::Linear}, rng);
    for (auto& w : net.weights()) w.fill(0.0);
    for (auto& b : net.biases()) b.fill(0.0);
    Tensor2 x = random_tensor(5, 4, rng);
    Tensor2 y = net.forward(x);
    for (double v : y.vec()) CHECK(v == 0.0);
}

TEST_CASE("identity single layer passes input through") {
    Rng rng(2);
    Mlp net({{3, 3}, Act::Relu, Act::Linear}, rng);
    net.weights()[0].fill(0.0);
    for (int i = 0; i < 3; ++i) net.weights()[0](i, i) = 1.0;
    net.biases()[0].fill(0.0);
    Tensor2 x = random_tensor(2, 3, rng);
    Tensor2 y = net.forward(x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.vec()[i] == doctest::Approx(x.vec()[i]));
}

TEST_CASE("single sine unit: sin(pi/2) = 1") {
    Rng rng(3);
    Mlp net({{1, 1}, Act::Relu, Act::Sine}, rng);
    net.weights()[0](0, 0) = 1.0;
    net.biases()[0](0, 0) = 0.0;
    Tensor2 x(1, 1, {M_PI / 2.0});
    CHECK(net.forward(x)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("sine output stays in [-1, 1] for arbitrary inputs") {
    Rng rng(4);
    Mlp net({{6, 16, 4}, Act::Relu, Act::Sine}, rng);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor2 x = random_tensor(3, 6, rng, 100.0);
        Tensor2 y = net.forward(x);
        for (double v : y.vec()) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("backward: linear case dL/dw = x") {
    Rng rng(5);
    Mlp net({{1, 1}, Act::Relu, Act::Linear}, rng);
    net.weights()[0](0, 0) = 0.7;
    net.biases()[0](0, 0) = 0.0;
    Tensor2 x(1, 1, {3.0});
    GradTape tape;
    net.forward(x, tape);
    Grads g = net.backward(tape, Tensor2(1, 1, {1.0}));
    CHECK(g.w[0](0, 0) == doctest::Approx(3.0));
}

TEST_CASE("backward: sine chain dL/dw = x*cos(wx)") {
    Rng rng(6);
    Mlp net({{1, 1}, Act::Relu, Act::Sine}, rng);
    net.weights()[0](0, 0) = 0.0;
    net.biases()[0](0, 0) = 0.0;
    Tensor2 x(1, 1, {2.0});
    GradTape tape;
    net.forward(x, tape);
    Grads g = net.backward(tape, Tensor2(1, 1, {1.0}));
    CHECK(g.w[0](0, 0) == doctest::Approx(2.0));  // 2*cos(0)
}

TEST_CASE("tape reuse raises StateError") {
    Rng rng(7);
    Mlp net({{2, 2}, Act::Relu, Act::Linear}, rng);
    Tensor2 x = random_tensor(1, 2, rng);
    GradTape tape;
    net.forward(x, tape);
    Tensor2 u(1, 2, {1.0, 1.0});
    net.backward(tape, u);
    CHECK_THROWS_AS(net.backward(tape, u), StateError);
}

TEST_CASE("gradients match finite differences on random 3-layer nets") {
    Rng rng(8);
    const Act outputs[] = {Act::Linear, Act::Tanh, Act::Sine};
    const Act hiddens[] = {Act::Relu, Act::Tanh};
    for (Act hid : hiddens) {
        for (Act out : outputs) {
            for (int trial = 0; trial < 3; ++trial) {
                Mlp net({{5, 8, 7, 3}, hid, out}, rng);
                Tensor2 x = random_tensor(4, 5, rng);
                Tensor2 u = random_tensor(4, 3, rng);
                FdResult res = finite_diff_check(net, x, u);
                CHECK(res.max_rel_err <= 1e-4);
            }
        }
    }
}

TEST_CASE("backward input gradient matches finite differences") {
    Rng rng(9);
    Mlp net({{4, 10, 2}, Act::Relu, Act::Tanh}, rng);
    Tensor2 x = random_tensor(2, 4, rng);
    Tensor2 u = random_tensor(2, 2, rng);
    GradTape tape;
    net.forward(x, tape);
    Grads g = net.backward(tape, u);
    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Tensor2 xp = x, xm = x;
        xp.vec()[i] += h;
        xm.vec()[i] -= h;
        const double fd = (projected_loss(net, xp, u) - projected_loss(net, xm, u)) / (2 * h);
        CHECK(g.input.vec()[i] == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    Rng rng(10);
    Mlp net({{3, 4, 2}, Act::Relu, Act::Linear}, rng);
    auto before_w = net.weights();
    AdamState st = adam_state_for(net);
    Grads g;
    for (const auto& w : net.weights()) g.w.emplace_back(w.rows(), w.cols(), 0.0);
    for (const auto& b : net.biases()) g.b.emplace_back(b.rows(), b.cols(), 0.0);
    adam_step_net(st, net, g, AdamConfig{});
    for (std::size_t l = 0; l < before_w.size(); ++l)
        CHECK(net.weights()[l].vec() == before_w[l].vec());
    CHECK(st.step == 1);
}

TEST_CASE("adam: first step moves by ~lr*sign(g)") {
    AdamConfig cfg;
    cfg.lr = 1e-2;
    cfg.clip_norm = 0.0;  // no clipping in this check
    Tensor2 p(1, 2, {0.5, -0.25});
    AdamState st = AdamState::like({p});
    std::vector<Tensor2> gs{Tensor2(1, 2, {0.3, -0.7})};
    adam_step(st, {&p}, gs, cfg);
    // sqrt(vhat) = |g| after bias correction, so the step is lr*sign(g) up to eps.
    CHECK(p(0, 0) == doctest::Approx(0.5 - cfg.lr).epsilon(1e-4));
    CHECK(p(0, 1) == doctest::Approx(-0.25 + cfg.lr).epsilon(1e-4));
}

TEST_CASE("adam: constant gradient converges to lr-sized steps") {
    AdamConfig cfg;
    cfg.lr = 1e-3;
    cfg.clip_norm = 0.0;
    Tensor2 p(1, 1, {0.0});
    AdamState st = AdamState::like({p});
    std::vector<Tensor2> gs{Tensor2(1, 1, {2.5})};
    double prev = 0.0;
    double delta = 0.0;
    for (int i = 0; i < 2000; ++i) {
        prev = p(0, 0);
        adam_step(st, {&p}, gs, cfg);
        delta = prev - p(0, 0);
    }
    CHECK(delta == doctest::Approx(cfg.lr).epsilon(1e-3));
}

TEST_CASE("adam rejects non-finite gradients") {
    Tensor2 p(1, 1, {0.0});
    AdamState st = AdamState::like({p});
    std::vector<Tensor2> gs{Tensor2(1, 1, {std::nan("")})};
    CHECK_THROWS_AS(adam_step(st, {&p}, gs, AdamConfig{}), OptimizerError);
}

TEST_CASE("global norm clip scales down long gradients") {
    std::vector<Tensor2> gs{Tensor2(1, 2, {3.0, 4.0})};  // norm 5
    const double pre = clip_by_global_norm(gs, 1.0);
    CHECK(pre == doctest::Approx(5.0));
    CHECK(global_norm(gs) == doctest::Approx(1.0));
}

TEST_CASE("identical seeds give identical nets and updates") {
    auto build_and_train = [](std::uint64_t seed) {
        Rng rng(seed);
        Mlp net({{3, 8, 2}, Act::Relu, Act::Tanh}, rng);
        AdamState st = adam_state_for(net);
        for (int i = 0; i < 10; ++i) {
            Tensor2 x = random_tensor(4, 3, rng);
            Tensor2 u = random_tensor(4, 2, rng);
            GradTape tape;
            net.forward(x, tape);
            Grads g = net.backward(tape, u);
            adam_step_net(st, net, g, AdamConfig{});
        }
        return net.param_hash();
    };
    CHECK(build_and_train(42) == build_and_train(42));
    CHECK(build_and_train(42) != build_and_train(43));
}

}  // TEST_SUITE
