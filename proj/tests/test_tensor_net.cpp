#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "genco/net.hpp"
#include "genco/rng.hpp"

using namespace genco;

namespace {

// Straight-line re-evaluation of a dense net with plain loops; shares no code
// with DenseNet::eval or the tape.
std::vector<double> naive_forward(const DenseNet& net, const std::vector<double>& input) {
    std::vector<double> cur = input;
    for (const auto& layer : net.layers()) {
        std::vector<double> next(layer.W.rows(), 0.0);
        for (int r = 0; r < layer.W.rows(); ++r) {
            double acc = layer.b[r];
            for (int c = 0; c < layer.W.cols(); ++c) acc += layer.W(r, c) * cur[c];
            switch (layer.act) {
                case Activation::identity: break;
                case Activation::relu: acc = acc > 0 ? acc : 0; break;
                case Activation::tanh: acc = std::tanh(acc); break;
                case Activation::sigmoid: acc = 1.0 / (1.0 + std::exp(-acc)); break;
            }
            next[r] = acc;
        }
        cur = std::move(next);
    }
    return cur;
}

double loss_value(DenseNet& net, const Vec& input, const Vec& target) {
    Tape tape;
    TensorF in = tape.constant({static_cast<int>(input.size())}, input);
    TensorF out = forward(net, tape, in);
    TensorF diff = sub(out, tape.constant({static_cast<int>(target.size())}, target));
    return sq_norm(diff).value();
}

} // namespace

TEST_CASE("identity net reproduces its input") {
    RngStream rng(1);
    DenseNet net = DenseNet::make({3, 3}, {Activation::identity}, rng);
    // overwrite with identity weights, zero bias
    net.layers()[0].W = Mat::Identity(3, 3);
    net.layers()[0].b = Vec::Zero(3);
    Vec v(3);
    v << 0.5, -2.0, 7.25;
    Tape tape;
    TensorF out = forward(net, tape, tape.constant({3}, v));
    CHECK(out.data() == v);
}

TEST_CASE("relu clamps a negative pre-activation") {
    RngStream rng(2);
    DenseNet net = DenseNet::make({1, 1}, {Activation::relu}, rng);
    net.layers()[0].W(0, 0) = 2.0;
    net.layers()[0].b[0] = 1.0;
    Vec v(1);
    v << -3.0;
    Tape tape;
    TensorF out = forward(net, tape, tape.constant({1}, v));
    CHECK(out.data()[0] == 0.0); // 2*(-3)+1 = -5 -> relu -> 0
}

TEST_CASE("two-layer forward matches a hand-rolled oracle") {
    RngStream rng(42);
    DenseNet net = DenseNet::make({4, 6, 3}, {Activation::tanh, Activation::identity}, rng);
    Vec input(4);
    input << 0.3, -1.2, 0.77, 2.5;
    Tape tape;
    TensorF out = forward(net, tape, tape.constant({4}, input));
    std::vector<double> expect = naive_forward(net, {0.3, -1.2, 0.77, 2.5});
    for (int i = 0; i < 3; ++i) CHECK(std::abs(out.data()[i] - expect[i]) < 1e-12);
}

TEST_CASE("forward rejects shape mismatch") {
    RngStream rng(3);
    DenseNet net = DenseNet::make({4, 2}, {Activation::identity}, rng);
    Tape tape;
    CHECK_THROWS_AS(forward(net, tape, tape.constant({3}, Vec::Zero(3))), DimensionError);
}

TEST_CASE("backward: gradient of sum(W x) w.r.t. W replicates x per row") {
    RngStream rng(4);
    DenseNet net = DenseNet::make({3, 2}, {Activation::identity}, rng);
    Vec x(3);
    x << 1.0, -2.0, 0.5;
    Tape tape;
    TensorF out = forward(net, tape, tape.constant({3}, x));
    backward(sum(out));
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) CHECK(net.layers()[0].gW(r, c) == x[c]);
    CHECK(net.layers()[0].gb == Vec::Ones(2));
}

TEST_CASE("backward: unreached parameters get exactly zero gradient") {
    RngStream rng(5);
    DenseNet used = DenseNet::make({2, 2}, {Activation::identity}, rng);
    DenseNet unused = DenseNet::make({2, 2}, {Activation::identity}, rng);
    Tape tape;
    TensorF out = forward(used, tape, tape.constant({2}, Vec::Ones(2)));
    backward(sum(out));
    CHECK(unused.layers()[0].gW == Mat::Zero(2, 2));
    CHECK(!unused.has_grads());
}

TEST_CASE("backward requires a scalar loss") {
    RngStream rng(6);
    DenseNet net = DenseNet::make({2, 2}, {Activation::identity}, rng);
    Tape tape;
    TensorF out = forward(net, tape, tape.constant({2}, Vec::Ones(2)));
    CHECK_THROWS_AS(backward(out), ContractError);
}

TEST_CASE("gradients match central finite differences on random nets") {
    RngStream rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        DenseNet net = DenseNet::make({5, 8, 8, 2},
                                      {Activation::tanh, Activation::relu, Activation::identity},
                                      rng);
        Vec input(5), target(2);
        for (int i = 0; i < 5; ++i) input[i] = rng.uniform(-1, 1);
        for (int i = 0; i < 2; ++i) target[i] = rng.uniform(-1, 1);

        net.zero_grads();
        Tape tape;
        TensorF in = tape.constant({5}, input);
        TensorF out = forward(net, tape, in);
        TensorF loss = sq_norm(sub(out, tape.constant({2}, target)));
        backward(loss);
        Vec analytic;
        net.gather_grads(analytic);

        Vec params;
        net.gather_params(params);
        const double h = 1e-5;
        for (Eigen::Index p = 0; p < params.size(); p += 7) { // sampled coordinates
            Vec plus = params, minus = params;
            plus[p] += h;
            minus[p] -= h;
            net.scatter_params(plus);
            double lp = loss_value(net, input, target);
            net.scatter_params(minus);
            double lm = loss_value(net, input, target);
            net.scatter_params(params);
            double fd = (lp - lm) / (2 * h);
            double denom = std::max({1.0, std::abs(fd), std::abs(analytic[p])});
            CHECK(std::abs(analytic[p] - fd) / denom < 1e-5);
        }
    }
}

TEST_CASE("batched forward equals per-column forward") {
    RngStream rng(8);
    DenseNet net = DenseNet::make({3, 5, 2}, {Activation::relu, Activation::identity}, rng);
    Mat batch(3, 4);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 3; ++i) batch(i, j) = rng.uniform(-2, 2);
    Mat out = net.eval(batch);
    for (int j = 0; j < 4; ++j) {
        Vec single = net.eval(Vec(batch.col(j)));
        CHECK((out.col(j) - single).norm() == 0.0);
    }
}

TEST_CASE("sgd step: lr=1, param=0, grad=2 gives param=-2") {
    RngStream rng(9);
    DenseNet net = DenseNet::make({1, 1}, {Activation::identity}, rng);
    net.layers()[0].W(0, 0) = 0.0;
    net.layers()[0].b[0] = 0.0;
    net.layers()[0].gW(0, 0) = 2.0;
    net.layers()[0].gb[0] = 2.0;
    net.mark_grads();
    OptimState opt(OptimMethod::sgd, 1.0, net.param_count());
    optim_step(net, opt);
    CHECK(net.layers()[0].W(0, 0) == -2.0);
    CHECK(net.layers()[0].b[0] == -2.0);
}

TEST_CASE("weight clip bounds every parameter after the update") {
    RngStream rng(10);
    DenseNet net = DenseNet::make({1, 1}, {Activation::identity}, rng);
    net.layers()[0].W(0, 0) = 0.6;
    net.layers()[0].gW(0, 0) = -10.0; // pushes the weight up
    net.layers()[0].gb[0] = 0.0;
    net.mark_grads();
    OptimState opt(OptimMethod::sgd, 0.01, net.param_count(), 0.01);
    optim_step(net, opt);
    CHECK(net.layers()[0].W(0, 0) == 0.01);
}

TEST_CASE("optim_step without grads is a contract error") {
    RngStream rng(11);
    DenseNet net = DenseNet::make({1, 1}, {Activation::identity}, rng);
    OptimState opt(OptimMethod::sgd, 0.1, net.param_count());
    CHECK_THROWS_AS(optim_step(net, opt), ContractError);
}

TEST_CASE("adam reduces a scalar quadratic by >90% in 100 steps") {
    RngStream rng(12);
    DenseNet net = DenseNet::make({1, 1}, {Activation::identity}, rng);
    net.layers()[0].W(0, 0) = 3.0;
    net.layers()[0].b[0] = 0.0;
    OptimState opt(OptimMethod::adam, 0.1, net.param_count());
    Vec one = Vec::Ones(1);
    auto current_loss = [&] {
        Tape tape;
        TensorF out = forward(net, tape, tape.constant({1}, one));
        return sq_norm(out).value();
    };
    double initial = current_loss();
    for (int i = 0; i < 100; ++i) {
        net.zero_grads();
        Tape tape;
        TensorF out = forward(net, tape, tape.constant({1}, one));
        backward(sq_norm(out));
        optim_step(net, opt);
    }
    CHECK(current_loss() < 0.1 * initial);
}

TEST_CASE("fixed seed gives bitwise-identical parameter trajectories") {
    auto train_once = [] {
        RngStream rng(77);
        DenseNet net = DenseNet::make({2, 4, 1}, {Activation::tanh, Activation::identity}, rng);
        OptimState opt(OptimMethod::adam, 0.01, net.param_count());
        RngStream data_rng(1234);
        for (int i = 0; i < 25; ++i) {
            Vec in(2);
            in << data_rng.uniform(-1, 1), data_rng.uniform(-1, 1);
            net.zero_grads();
            Tape tape;
            TensorF out = forward(net, tape, tape.constant({2}, in));
            backward(sq_norm(out));
            optim_step(net, opt);
        }
        Vec params;
        net.gather_params(params);
        return params;
    };
    Vec a = train_once();
    Vec b = train_once();
    CHECK(a == b);
}

TEST_CASE("rng stream: same seed, same sequence; counter round-trips") {
    RngStream a(99), b(99);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream c(99, a.counter());
    CHECK(c.uniform() == b.uniform());
}

TEST_CASE("checkpoint round trip is bit exact") {
    RngStream rng(13);
    Checkpoint ckpt;
    ckpt.seed = 42;
    ckpt.rng_counter = 777;
    ckpt.step = 12345;
    ckpt.nets["gen"] =
        DenseNet::make({3, 5, 2}, {Activation::relu, Activation::identity}, rng);
    ckpt.nets["adv"] = DenseNet::make({2, 4, 1}, {Activation::tanh, Activation::sigmoid}, rng);
    ckpt.matrices["codebook"] = Mat::Random(4, 3);

    std::string path = (std::filesystem::temp_directory_path() / "genco_ckpt_test.txt").string();
    save_checkpoint(path, ckpt);
    Checkpoint back = load_checkpoint(path);
    CHECK(back.seed == ckpt.seed);
    CHECK(back.rng_counter == ckpt.rng_counter);
    CHECK(back.step == ckpt.step);
    for (const auto& [name, net] : ckpt.nets) {
        Vec p0, p1;
        net.gather_params(p0);
        back.nets.at(name).gather_params(p1);
        CHECK(p0 == p1);
        REQUIRE(back.nets.at(name).layers().size() == net.layers().size());
        for (std::size_t l = 0; l < net.layers().size(); ++l)
            CHECK(back.nets.at(name).layers()[l].act == net.layers()[l].act);
    }
    CHECK(back.matrices.at("codebook") == ckpt.matrices.at("codebook"));

    // saving the loaded checkpoint reproduces the file byte for byte
    std::string path2 = path + ".2";
    save_checkpoint(path2, back);
    std::ifstream f1(path), f2(path2);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("no NaNs appear in parameters after training steps") {
    RngStream rng(14);
    DenseNet net = DenseNet::make({3, 8, 3}, {Activation::relu, Activation::identity}, rng);
    OptimState opt(OptimMethod::adam, 0.05, net.param_count());
    for (int i = 0; i < 50; ++i) {
        Vec in(3);
        for (int d = 0; d < 3; ++d) in[d] = rng.normal();
        net.zero_grads();
        Tape tape;
        TensorF out = forward(net, tape, tape.constant({3}, in));
        backward(sq_norm(out));
        optim_step(net, opt); // throws on any non-finite value
    }
    Vec params;
    net.gather_params(params);
    CHECK(params.allFinite());
}
