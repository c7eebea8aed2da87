#ifndef GENCO_TENSOR_HPP
#define GENCO_TENSOR_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "genco/errors.hpp"

namespace genco {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// All tensor payloads are stored flat in row-major order; RowMat maps give
// them a matrix view without copying.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatMap = Eigen::Map<RowMat>;
using ConstRowMatMap = Eigen::Map<const RowMat>;

class Tape;

// Handle to a node on a tape. Copying the handle does not copy the payload.
class TensorF {
public:
    TensorF() = default;
    TensorF(Tape* tape, int id) : tape_(tape), id_(id) {}

    Tape* tape() const { return tape_; }
    int id() const { return id_; }
    bool valid() const { return tape_ != nullptr && id_ >= 0; }

    const std::vector<int>& shape() const;
    Eigen::Index size() const;
    const Vec& data() const;
    const Vec& grad() const;
    bool is_scalar() const;
    double value() const; // scalar nodes only

private:
    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Record of one forward computation. Nodes are created in evaluation order,
// so walking them backwards is a valid reverse topological sweep.
class Tape {
public:
    // A backward closure receives the tape and its own node id; it reads
    // grad(id) and accumulates into parent grads or external buffers.
    using Backward = std::function<void(Tape&, int)>;

    TensorF make(std::vector<int> shape, Vec value, Backward back);
    TensorF constant(std::vector<int> shape, Vec value);
    TensorF scalar(double v);

    const Vec& value(int id) const { return nodes_[id].value; }
    Vec& grad(int id) { return nodes_[id].grad; }
    const std::vector<int>& shape(int id) const { return nodes_[id].shape; }
    int size() const { return static_cast<int>(nodes_.size()); }

    // Seeds d(loss)/d(loss) = 1 and sweeps every node from loss down to the
    // start of the tape. Throws ContractError unless loss is a scalar node.
    void backward(const TensorF& loss);

private:
    struct Node {
        std::vector<int> shape;
        Vec value;
        Vec grad;
        Backward back;
    };
    std::vector<Node> nodes_;
};

inline Eigen::Index shape_size(const std::vector<int>& shape) {
    Eigen::Index n = 1;
    for (int d : shape) n *= d;
    return n;
}

// ---- elementwise / reduction ops ------------------------------------------

TensorF add(TensorF a, TensorF b);
TensorF sub(TensorF a, TensorF b);
TensorF mul(TensorF a, TensorF b); // elementwise
TensorF scale(TensorF a, double s);
TensorF sum(TensorF a);  // -> scalar
TensorF mean(TensorF a); // -> scalar
TensorF sq_norm(TensorF a); // sum of squares -> scalar

TensorF relu(TensorF a);
TensorF tanh_op(TensorF a);
TensorF sigmoid(TensorF a);

// Column j of a {rows, cols} tensor as a {rows} vector node.
TensorF col(TensorF m, int j);

// Scalar dot product with a fixed (non-learned) vector.
TensorF dot_const(TensorF a, const Vec& w);

// Quantization pass-through: value is q, gradient flows to a unchanged.
TensorF straight_through(TensorF a, const Vec& q);

// Sum of scalar nodes (empty list -> scalar 0 constant on `tape`).
TensorF add_all(Tape& tape, const std::vector<TensorF>& terms);

void check_finite(const Vec& v, const char* what);

} // namespace genco

#endif // GENCO_TENSOR_HPP
