#ifndef GENCO_NET_HPP
#define GENCO_NET_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genco/rng.hpp"
#include "genco/tensor.hpp"

namespace genco {

enum class Activation { identity, relu, tanh, sigmoid };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct DenseLayer {
    Mat W;  // out x in
    Vec b;  // out
    // Gradient accumulators; filled by backward closures while the net is
    // otherwise frozen, hence mutable.
    mutable Mat gW;
    mutable Vec gb;
    Activation act = Activation::identity;
};

// Plain fully connected network, 64-bit weights. Mutable only between steps;
// forward/backward of one step treat it as frozen.
class DenseNet {
public:
    DenseNet() = default;

    // dims = {in, h1, ..., out}; acts has dims.size()-1 entries.
    static DenseNet make(const std::vector<int>& dims, const std::vector<Activation>& acts,
                         RngStream& rng);

    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    Eigen::Index param_count() const;
    void gather_params(Vec& out) const;
    void scatter_params(const Vec& in);
    void gather_grads(Vec& out) const;
    void zero_grads();
    bool has_grads() const { return has_grads_; }
    void mark_grads() { has_grads_ = true; }
    void clear_grad_flag() { has_grads_ = false; }

    // Recorded forward pass; input shape {in} or {in, K}.
    TensorF forward_tape(Tape& tape, TensorF input) const;

    // Plain evaluation without recording; columns of `input` are samples.
    Mat eval(const Mat& input) const;
    Vec eval(const Vec& input) const;

private:
    std::vector<DenseLayer> layers_;
    int input_dim_ = 0;
    int output_dim_ = 0;
    mutable bool has_grads_ = false;

    friend DenseNet checkpoint_read_net(std::istream& in);
};

// forward/backward per the module contract. backward checks the loss is a
// recorded scalar and sweeps the whole tape.
TensorF forward(const DenseNet& net, Tape& tape, TensorF input);
void backward(TensorF loss_scalar);

enum class OptimMethod { sgd, adam };

// Optimizer over one flat parameter vector. Holds Adam moments; w_clip, when
// set, clamps every parameter after the update (WGAN critic clipping).
class OptimState {
public:
    OptimState() = default;
    OptimState(OptimMethod method, double learning_rate, Eigen::Index n_params,
               std::optional<double> w_clip = std::nullopt);

    void apply(Vec& params, const Vec& grads);

    OptimMethod method() const { return method_; }
    double learning_rate() const { return lr_; }
    std::int64_t step_count() const { return step_; }
    std::optional<double> w_clip() const { return w_clip_; }

private:
    OptimMethod method_ = OptimMethod::sgd;
    double lr_ = 1e-3;
    std::optional<double> w_clip_;
    Vec m_, v_;
    std::int64_t step_ = 0;
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;
};

// One optimizer update from the net's accumulated grads. Throws ContractError
// if no backward pass populated them; clears and re-zeroes grads afterwards.
void optim_step(DenseNet& net, OptimState& state);

// ---- checkpoints -----------------------------------------------------------
//
// Structured text, bit-exact round trip (shortest round-trip decimal for
// every double). Holds named nets and named raw matrices plus the rng state
// and a step counter.

struct Checkpoint {
    std::uint64_t seed = 0;
    std::uint64_t rng_counter = 0;
    std::int64_t step = 0;
    std::map<std::string, DenseNet> nets;
    std::map<std::string, Mat> matrices;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
double parse_double(const std::string& s);

} // namespace genco

#endif // GENCO_NET_HPP
