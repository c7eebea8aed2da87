#include "genco/net.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace genco {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    throw IoError("unknown activation: " + name);
}

DenseNet DenseNet::make(const std::vector<int>& dims, const std::vector<Activation>& acts,
                        RngStream& rng) {
    if (dims.size() < 2) throw ContractError("DenseNet::make: need at least in and out dims");
    if (acts.size() != dims.size() - 1)
        throw ContractError("DenseNet::make: one activation per layer required");
    DenseNet net;
    net.input_dim_ = dims.front();
    net.output_dim_ = dims.back();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        int in = dims[l], out = dims[l + 1];
        if (in <= 0 || out <= 0) throw ContractError("DenseNet::make: dims must be positive");
        double s = std::sqrt(6.0 / static_cast<double>(in + out));
        layer.W = Mat(out, in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) layer.W(r, c) = rng.uniform(-s, s);
        layer.b = Vec::Zero(out);
        layer.gW = Mat::Zero(out, in);
        layer.gb = Vec::Zero(out);
        layer.act = acts[l];
        net.layers_.push_back(std::move(layer));
    }
    return net;
}

Eigen::Index DenseNet::param_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers_) n += l.W.size() + l.b.size();
    return n;
}

void DenseNet::gather_params(Vec& out) const {
    out.resize(param_count());
    Eigen::Index at = 0;
    for (const auto& l : layers_) {
        for (int r = 0; r < l.W.rows(); ++r)
            for (int c = 0; c < l.W.cols(); ++c) out[at++] = l.W(r, c);
        for (Eigen::Index i = 0; i < l.b.size(); ++i) out[at++] = l.b[i];
    }
}

void DenseNet::scatter_params(const Vec& in) {
    if (in.size() != param_count()) throw DimensionError("scatter_params: length mismatch");
    Eigen::Index at = 0;
    for (auto& l : layers_) {
        for (int r = 0; r < l.W.rows(); ++r)
            for (int c = 0; c < l.W.cols(); ++c) l.W(r, c) = in[at++];
        for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b[i] = in[at++];
    }
}

void DenseNet::gather_grads(Vec& out) const {
    out.resize(param_count());
    Eigen::Index at = 0;
    for (const auto& l : layers_) {
        for (int r = 0; r < l.gW.rows(); ++r)
            for (int c = 0; c < l.gW.cols(); ++c) out[at++] = l.gW(r, c);
        for (Eigen::Index i = 0; i < l.gb.size(); ++i) out[at++] = l.gb[i];
    }
}

void DenseNet::zero_grads() {
    for (auto& l : layers_) {
        l.gW.setZero();
        l.gb.setZero();
    }
    has_grads_ = false;
}

namespace {

TensorF apply_activation(TensorF t, Activation act) {
    switch (act) {
        case Activation::identity: return t;
        case Activation::relu: return relu(t);
        case Activation::tanh: return tanh_op(t);
        case Activation::sigmoid: return sigmoid(t);
    }
    return t;
}

} // namespace

TensorF DenseNet::forward_tape(Tape& tape, TensorF input) const {
    const auto& sh = input.shape();
    int in_rows = sh[0];
    int batch = sh.size() == 2 ? sh[1] : 1;
    bool vector_input = sh.size() == 1;
    if (sh.size() > 2 || in_rows != input_dim_)
        throw DimensionError("forward: input shape does not match input_dim");

    TensorF cur = input;
    for (const auto& layer : layers_) {
        const DenseLayer* lp = &layer;
        const DenseNet* self = this;
        int rows = static_cast<int>(layer.W.rows());
        int cols = static_cast<int>(layer.W.cols());
        int ic = cur.id();
        ConstRowMatMap x(cur.data().data(), cols, batch);
        RowMat y = (layer.W * x).eval();
        y.colwise() += layer.b;
        Vec flat = Eigen::Map<const Vec>(y.data(), y.size());
        std::vector<int> out_shape = vector_input ? std::vector<int>{rows}
                                                  : std::vector<int>{rows, batch};
        TensorF lin = tape.make(std::move(out_shape), std::move(flat),
                                [lp, self, ic, rows, cols, batch](Tape& tp, int selfid) {
            ConstRowMatMap g(tp.grad(selfid).data(), rows, batch);
            ConstRowMatMap xv(tp.value(ic).data(), cols, batch);
            lp->gW.noalias() += g * xv.transpose();
            lp->gb.noalias() += g.rowwise().sum();
            RowMatMap gx(tp.grad(ic).data(), cols, batch);
            gx.noalias() += lp->W.transpose() * g;
            self->has_grads_ = true;
        });
        cur = apply_activation(lin, layer.act);
    }
    return cur;
}

Mat DenseNet::eval(const Mat& input) const {
    if (input.rows() != input_dim_)
        throw DimensionError("eval: input rows do not match input_dim");
    Mat cur = input;
    for (const auto& layer : layers_) {
        Mat y = layer.W * cur;
        y.colwise() += layer.b;
        switch (layer.act) {
            case Activation::identity: break;
            case Activation::relu: y = y.cwiseMax(0.0); break;
            case Activation::tanh: y = y.array().tanh().matrix(); break;
            case Activation::sigmoid: y = (1.0 / (1.0 + (-y.array()).exp())).matrix(); break;
        }
        cur = std::move(y);
    }
    return cur;
}

Vec DenseNet::eval(const Vec& input) const {
    Mat out = eval(Mat(input));
    return Vec(Eigen::Map<const Vec>(out.data(), out.size()));
}

TensorF forward(const DenseNet& net, Tape& tape, TensorF input) {
    return net.forward_tape(tape, input);
}

void backward(TensorF loss_scalar) {
    if (!loss_scalar.valid()) throw ContractError("backward: invalid tensor");
    loss_scalar.tape()->backward(loss_scalar);
}

OptimState::OptimState(OptimMethod method, double learning_rate, Eigen::Index n_params,
                       std::optional<double> w_clip)
    : method_(method), lr_(learning_rate), w_clip_(w_clip) {
    if (learning_rate <= 0) throw ContractError("OptimState: learning rate must be positive");
    if (method == OptimMethod::adam) {
        m_ = Vec::Zero(n_params);
        v_ = Vec::Zero(n_params);
    }
}

void OptimState::apply(Vec& params, const Vec& grads) {
    if (params.size() != grads.size()) throw DimensionError("OptimState::apply: size mismatch");
    ++step_;
    if (method_ == OptimMethod::sgd) {
        params -= lr_ * grads;
    } else {
        if (m_.size() != params.size()) throw DimensionError("OptimState::apply: moment size mismatch");
        m_ = kBeta1 * m_ + (1.0 - kBeta1) * grads;
        v_ = kBeta2 * v_ + (1.0 - kBeta2) * grads.cwiseProduct(grads);
        double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
        double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
        params.array() -=
            lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + kEps);
    }
    if (w_clip_) {
        double w = *w_clip_;
        params = params.cwiseMax(-w).cwiseMin(w);
    }
}

void optim_step(DenseNet& net, OptimState& state) {
    if (!net.has_grads())
        throw ContractError("optim_step: no gradients accumulated since last step");
    Vec params, grads;
    net.gather_params(params);
    net.gather_grads(grads);
    check_finite(grads, "optim_step grads");
    state.apply(params, grads);
    check_finite(params, "optim_step params");
    net.scatter_params(params);
    net.zero_grads();
}

// ---- text serialization -----------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError("bad double literal: " + s);
    return v;
}

namespace {

void write_matrix(std::ostream& out, const Mat& m) {
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (c) out << ' ';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> parts;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) parts.push_back(tok);
    return parts;
}

std::string next_line(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("checkpoint: unexpected end of file");
    return line;
}

Mat read_matrix(std::istream& in, int rows, int cols) {
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        auto parts = split_ws(next_line(in));
        if (static_cast<int>(parts.size()) != cols)
            throw IoError("checkpoint: bad matrix row width");
        for (int c = 0; c < cols; ++c) m(r, c) = parse_double(parts[c]);
    }
    return m;
}

void expect_tag(const std::vector<std::string>& parts, const char* tag, std::size_t nfields) {
    if (parts.empty() || parts[0] != tag || parts.size() != nfields)
        throw IoError(std::string("checkpoint: expected '") + tag + "' record");
}

} // namespace

DenseNet checkpoint_read_net(std::istream& in) {
    auto head = split_ws(next_line(in));
    expect_tag(head, "layers", 2);
    int nlayers = std::stoi(head[1]);
    DenseNet net;
    for (int l = 0; l < nlayers; ++l) {
        auto lh = split_ws(next_line(in));
        expect_tag(lh, "layer", 4);
        int in_dim = std::stoi(lh[1]);
        int out_dim = std::stoi(lh[2]);
        DenseLayer layer;
        layer.act = activation_from_name(lh[3]);
        layer.W = read_matrix(in, out_dim, in_dim);
        Mat b = read_matrix(in, 1, out_dim);
        layer.b = b.row(0).transpose();
        layer.gW = Mat::Zero(out_dim, in_dim);
        layer.gb = Vec::Zero(out_dim);
        if (l == 0) net.input_dim_ = in_dim;
        net.output_dim_ = out_dim;
        net.layers_.push_back(std::move(layer));
    }
    return net;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    out << "genco-checkpoint v1\n";
    out << "seed " << ckpt.seed << '\n';
    out << "rng_counter " << ckpt.rng_counter << '\n';
    out << "step " << ckpt.step << '\n';
    out << "nets " << ckpt.nets.size() << '\n';
    for (const auto& [name, net] : ckpt.nets) {
        out << "net " << name << '\n';
        out << "layers " << net.layers().size() << '\n';
        for (const auto& l : net.layers()) {
            out << "layer " << l.W.cols() << ' ' << l.W.rows() << ' '
                << activation_name(l.act) << '\n';
            write_matrix(out, l.W);
            write_matrix(out, l.b.transpose());
        }
    }
    out << "matrices " << ckpt.matrices.size() << '\n';
    for (const auto& [name, m] : ckpt.matrices) {
        out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        write_matrix(out, m);
    }
    if (!out) throw IoError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    if (next_line(in) != "genco-checkpoint v1")
        throw IoError("checkpoint: bad magic line");
    Checkpoint ckpt;
    auto seed = split_ws(next_line(in));
    expect_tag(seed, "seed", 2);
    ckpt.seed = std::stoull(seed[1]);
    auto ctr = split_ws(next_line(in));
    expect_tag(ctr, "rng_counter", 2);
    ckpt.rng_counter = std::stoull(ctr[1]);
    auto step = split_ws(next_line(in));
    expect_tag(step, "step", 2);
    ckpt.step = std::stoll(step[1]);
    auto nets = split_ws(next_line(in));
    expect_tag(nets, "nets", 2);
    int nnets = std::stoi(nets[1]);
    for (int i = 0; i < nnets; ++i) {
        auto nh = split_ws(next_line(in));
        expect_tag(nh, "net", 2);
        ckpt.nets[nh[1]] = checkpoint_read_net(in);
    }
    auto mats = split_ws(next_line(in));
    expect_tag(mats, "matrices", 2);
    int nmats = std::stoi(mats[1]);
    for (int i = 0; i < nmats; ++i) {
        auto mh = split_ws(next_line(in));
        expect_tag(mh, "matrix", 4);
        ckpt.matrices[mh[1]] = read_matrix(in, std::stoi(mh[2]), std::stoi(mh[3]));
    }
    return ckpt;
}

} // namespace genco
