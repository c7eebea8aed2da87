#include "genco/tensor.hpp"

#include <cmath>
#include <utility>

namespace genco {

const std::vector<int>& TensorF::shape() const { return tape_->shape(id_); }
Eigen::Index TensorF::size() const { return tape_->value(id_).size(); }
const Vec& TensorF::data() const { return tape_->value(id_); }
const Vec& TensorF::grad() const { return tape_->grad(id_); }
bool TensorF::is_scalar() const { return size() == 1; }

double TensorF::value() const {
    if (!is_scalar()) throw ContractError("TensorF::value: node is not scalar");
    return data()[0];
}

TensorF Tape::make(std::vector<int> shape, Vec value, Backward back) {
    if (shape_size(shape) != value.size())
        throw DimensionError("Tape::make: shape does not match value length");
    Node n;
    n.shape = std::move(shape);
    n.grad = Vec::Zero(value.size());
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return TensorF(this, static_cast<int>(nodes_.size()) - 1);
}

TensorF Tape::constant(std::vector<int> shape, Vec value) {
    return make(std::move(shape), std::move(value), Backward());
}

TensorF Tape::scalar(double v) {
    Vec value(1);
    value[0] = v;
    return constant({1}, std::move(value));
}

void Tape::backward(const TensorF& loss) {
    if (loss.tape() != this) throw ContractError("backward: loss lives on another tape");
    if (!loss.is_scalar()) throw ContractError("backward: loss must be scalar");
    nodes_[loss.id()].grad[0] = 1.0;
    for (int id = loss.id(); id >= 0; --id) {
        if (nodes_[id].back) nodes_[id].back(*this, id);
    }
}

void check_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) throw DomainError(std::string(what) + ": non-finite values");
}

namespace {

void require_same_shape(const TensorF& a, const TensorF& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": operand shapes differ");
    if (a.tape() != b.tape())
        throw ContractError(std::string(op) + ": operands live on different tapes");
}

} // namespace

TensorF add(TensorF a, TensorF b) {
    require_same_shape(a, b, "add");
    Tape& t = *a.tape();
    int ia = a.id(), ib = b.id();
    return t.make(a.shape(), a.data() + b.data(), [ia, ib](Tape& tp, int self) {
        tp.grad(ia) += tp.grad(self);
        tp.grad(ib) += tp.grad(self);
    });
}

TensorF sub(TensorF a, TensorF b) {
    require_same_shape(a, b, "sub");
    Tape& t = *a.tape();
    int ia = a.id(), ib = b.id();
    return t.make(a.shape(), a.data() - b.data(), [ia, ib](Tape& tp, int self) {
        tp.grad(ia) += tp.grad(self);
        tp.grad(ib) -= tp.grad(self);
    });
}

TensorF mul(TensorF a, TensorF b) {
    require_same_shape(a, b, "mul");
    Tape& t = *a.tape();
    int ia = a.id(), ib = b.id();
    return t.make(a.shape(), a.data().cwiseProduct(b.data()), [ia, ib](Tape& tp, int self) {
        tp.grad(ia) += tp.grad(self).cwiseProduct(tp.value(ib));
        tp.grad(ib) += tp.grad(self).cwiseProduct(tp.value(ia));
    });
}

TensorF scale(TensorF a, double s) {
    Tape& t = *a.tape();
    int ia = a.id();
    return t.make(a.shape(), s * a.data(), [ia, s](Tape& tp, int self) {
        tp.grad(ia) += s * tp.grad(self);
    });
}

TensorF sum(TensorF a) {
    Tape& t = *a.tape();
    int ia = a.id();
    Vec v(1);
    v[0] = a.data().sum();
    return t.make({1}, std::move(v), [ia](Tape& tp, int self) {
        tp.grad(ia).array() += tp.grad(self)[0];
    });
}

TensorF mean(TensorF a) {
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

TensorF sq_norm(TensorF a) {
    Tape& t = *a.tape();
    int ia = a.id();
    Vec v(1);
    v[0] = a.data().squaredNorm();
    return t.make({1}, std::move(v), [ia](Tape& tp, int self) {
        tp.grad(ia) += 2.0 * tp.grad(self)[0] * tp.value(ia);
    });
}

TensorF relu(TensorF a) {
    Tape& t = *a.tape();
    int ia = a.id();
    return t.make(a.shape(), a.data().cwiseMax(0.0), [ia](Tape& tp, int self) {
        tp.grad(ia).array() +=
            tp.grad(self).array() * (tp.value(self).array() > 0.0).cast<double>();
    });
}

TensorF tanh_op(TensorF a) {
    Tape& t = *a.tape();
    int ia = a.id();
    return t.make(a.shape(), a.data().array().tanh().matrix(), [ia](Tape& tp, int self) {
        tp.grad(ia).array() +=
            tp.grad(self).array() * (1.0 - tp.value(self).array().square());
    });
}

TensorF sigmoid(TensorF a) {
    Tape& t = *a.tape();
    int ia = a.id();
    Vec v = (1.0 / (1.0 + (-a.data().array()).exp())).matrix();
    return t.make(a.shape(), std::move(v), [ia](Tape& tp, int self) {
        const auto& y = tp.value(self).array();
        tp.grad(ia).array() += tp.grad(self).array() * y * (1.0 - y);
    });
}

TensorF col(TensorF m, int j) {
    const auto& sh = m.shape();
    if (sh.size() != 2) throw DimensionError("col: tensor is not 2-d");
    int rows = sh[0], cols = sh[1];
    if (j < 0 || j >= cols) throw DimensionError("col: column index out of range");
    Tape& t = *m.tape();
    int im = m.id();
    Vec v(rows);
    for (int i = 0; i < rows; ++i) v[i] = m.data()[static_cast<Eigen::Index>(i) * cols + j];
    return t.make({rows}, std::move(v), [im, rows, cols, j](Tape& tp, int self) {
        for (int i = 0; i < rows; ++i)
            tp.grad(im)[static_cast<Eigen::Index>(i) * cols + j] += tp.grad(self)[i];
    });
}

TensorF dot_const(TensorF a, const Vec& w) {
    if (a.size() != w.size()) throw DimensionError("dot_const: length mismatch");
    Tape& t = *a.tape();
    int ia = a.id();
    Vec v(1);
    v[0] = a.data().dot(w);
    Vec wc = w;
    return t.make({1}, std::move(v), [ia, wc](Tape& tp, int self) {
        tp.grad(ia) += tp.grad(self)[0] * wc;
    });
}

TensorF straight_through(TensorF a, const Vec& q) {
    if (a.size() != q.size()) throw DimensionError("straight_through: length mismatch");
    Tape& t = *a.tape();
    int ia = a.id();
    return t.make(a.shape(), q, [ia](Tape& tp, int self) {
        tp.grad(ia) += tp.grad(self);
    });
}

TensorF add_all(Tape& tape, const std::vector<TensorF>& terms) {
    if (terms.empty()) return tape.scalar(0.0);
    TensorF acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
    return acc;
}

} // namespace genco
