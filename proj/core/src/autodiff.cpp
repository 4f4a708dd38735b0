#include "misa/autodiff.hpp"

#include "misa/error.hpp"

#include <algorithm>
#include <cmath>

namespace misa::grad {

const char* op_name(Op op) {
    switch (op) {
    case Op::constant: return "constant";
    case Op::parameter: return "parameter";
    case Op::matmul: return "matmul";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::add_row: return "add_row";
    case Op::scale: return "scale";
    case Op::sigmoid: return "sigmoid";
    case Op::tanh: return "tanh";
    case Op::relu: return "relu";
    case Op::square: return "square";
    case Op::concat_cols: return "concat_cols";
    case Op::sum: return "sum";
    case Op::sum_squares: return "sum_squares";
    case Op::bce: return "bce";
    case Op::softmax_xent: return "softmax_xent";
    }
    return "?";
}

const Matrix& Var::value() const {
    return tape_->node(id_).value;
}

Matrix Var::grad() const {
    const auto& n = tape_->node(id_);
    if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
}

double Var::scalar() const {
    const Matrix& v = value();
    if (v.size() != 1) throw contract_error("scalar() on non-scalar node " + shape_string(v));
    return v(0, 0);
}

Var Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    n.op = Op::constant;
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
    if (auto it = param_leaf_.find(&p); it != param_leaf_.end()) return Var(this, it->second);
    Node n;
    n.value = p.value;
    n.op = Op::parameter;
    n.requires_grad = true;
    n.param = &p;
    nodes_.push_back(std::move(n));
    param_leaf_.emplace(&p, nodes_.size() - 1);
    return Var(this, nodes_.size() - 1);
}

Var Tape::push(Op op, Matrix value, std::size_t a, std::size_t b, double scalar) {
    Node n;
    n.value = std::move(value);
    n.op = op;
    n.parents = {a, b};
    n.scalar = scalar;
    n.requires_grad = (a != no_parent && nodes_[a].requires_grad) ||
                      (b != no_parent && nodes_[b].requires_grad);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Matrix& Tape::grad_of(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad.setZero(n.value.rows(), n.value.cols());
    return n.grad;
}

template <typename Expr>
void Tape::accumulate(std::size_t id, const Expr& expr) {
    Matrix& g = nodes_[id].grad;
    if (g.size() == 0)
        g.noalias() = expr;
    else
        g.noalias() += expr;
}

void Tape::backward(Var loss) {
    if (loss.tape() != this) throw contract_error("backward: loss belongs to another tape");
    const Node& out = nodes_[loss.id()];
    if (out.value.size() != 1)
        throw contract_error("backward: loss must be scalar, got " + shape_string(out.value));
    if (!std::isfinite(out.value(0, 0))) throw numeric_error("backward: non-finite loss");

    // Gradient buffers are allocated on first contribution; nodes the loss
    // never reaches keep an empty buffer.
    for (auto& n : nodes_) n.grad.resize(0, 0);
    if (!nodes_[loss.id()].requires_grad) {
        for (auto& n : nodes_)
            if (n.param != nullptr) n.param->grad.setZero(n.value.rows(), n.value.cols());
        return;
    }

    nodes_[loss.id()].grad = Matrix::Ones(1, 1);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        if (!nodes_[i].requires_grad || nodes_[i].grad.size() == 0) continue;
        propagate(i);
    }
    for (auto& n : nodes_) {
        if (n.param == nullptr) continue;
        if (n.grad.size() == 0)
            n.param->grad.setZero(n.value.rows(), n.value.cols());
        else
            n.param->grad = n.grad;
    }
}

void Tape::propagate(std::size_t id) {
    Node& n = nodes_[id];
    const auto [pa, pb] = n.parents;
    const bool ga = pa != no_parent && nodes_[pa].requires_grad;
    const bool gb = pb != no_parent && nodes_[pb].requires_grad;
    const Matrix& g = n.grad;

    switch (n.op) {
    case Op::constant:
    case Op::parameter:
        break;
    case Op::matmul:
        if (ga) accumulate(pa, g * nodes_[pb].value.transpose());
        if (gb) accumulate(pb, nodes_[pa].value.transpose() * g);
        break;
    case Op::add:
        if (ga) accumulate(pa, g);
        if (gb) accumulate(pb, g);
        break;
    case Op::sub:
        if (ga) accumulate(pa, g);
        if (gb) accumulate(pb, -g);
        break;
    case Op::mul:
        if (ga) accumulate(pa, g.cwiseProduct(nodes_[pb].value));
        if (gb) accumulate(pb, g.cwiseProduct(nodes_[pa].value));
        break;
    case Op::add_row:
        if (ga) accumulate(pa, g);
        if (gb) accumulate(pb, g.colwise().sum());
        break;
    case Op::scale:
        if (ga) accumulate(pa, n.scalar * g);
        break;
    case Op::sigmoid:
        if (ga) accumulate(pa, (g.array() * n.value.array() * (1.0 - n.value.array())).matrix());
        break;
    case Op::tanh:
        if (ga) accumulate(pa, (g.array() * (1.0 - n.value.array().square())).matrix());
        break;
    case Op::relu:
        if (ga)
            accumulate(pa, (nodes_[pa].value.array() > 0.0).select(g.array(), 0.0).matrix());
        break;
    case Op::square:
        if (ga) accumulate(pa, (2.0 * g.array() * nodes_[pa].value.array()).matrix());
        break;
    case Op::concat_cols: {
        const Eigen::Index left = nodes_[pa].value.cols();
        if (ga) accumulate(pa, g.leftCols(left));
        if (gb) accumulate(pb, g.rightCols(g.cols() - left));
        break;
    }
    case Op::sum:
        if (ga) accumulate(pa, Matrix::Constant(nodes_[pa].value.rows(), nodes_[pa].value.cols(), g(0, 0)));
        break;
    case Op::sum_squares:
        if (ga) accumulate(pa, (2.0 * g(0, 0)) * nodes_[pa].value);
        break;
    case Op::bce: {
        if (!ga || n.scalar == 0.0) break;
        const Matrix& p = nodes_[pa].value;
        const Matrix& t = n.aux_a;
        const Matrix& w = n.aux_b;
        const double coef = g(0, 0) / n.scalar;
        Matrix& gp = grad_of(pa);
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double wi = w.data()[i];
            const double pi = p.data()[i];
            if (wi == 0.0 || pi < bce_clamp || pi > 1.0 - bce_clamp) continue;
            const double ti = t.data()[i];
            gp.data()[i] += -coef * wi * (ti / pi - (1.0 - ti) / (1.0 - pi));
        }
        break;
    }
    case Op::softmax_xent: {
        if (!ga) break;
        // aux_b caches the softmax probabilities.
        const double inv_n = 1.0 / static_cast<double>(n.aux_a.rows());
        accumulate(pa, (g(0, 0) * inv_n) * (n.aux_b - n.aux_a));
        break;
    }
    }
}

namespace {

Tape& tape_of(Var a, Var b) {
    if (a.tape() == nullptr || a.tape() != b.tape())
        throw contract_error("operands belong to different tapes");
    return *a.tape();
}

void require_elementwise(Var a, Var b, const char* what) {
    require_same_shape(a.value(), b.value(), what);
}

} // namespace

Var matmul(Var a, Var b) {
    Tape& t = tape_of(a, b);
    if (a.cols() != b.rows())
        throw dimension_error("matmul: inner dimensions differ " + shape_string(a.value()) +
                              " * " + shape_string(b.value()));
    Matrix out;
    out.noalias() = a.value() * b.value();
    return t.push(Op::matmul, std::move(out), a.id(), b.id());
}

Var add(Var a, Var b) {
    Tape& t = tape_of(a, b);
    require_elementwise(a, b, "add");
    return t.push(Op::add, a.value() + b.value(), a.id(), b.id());
}

Var sub(Var a, Var b) {
    Tape& t = tape_of(a, b);
    require_elementwise(a, b, "sub");
    return t.push(Op::sub, a.value() - b.value(), a.id(), b.id());
}

Var mul(Var a, Var b) {
    Tape& t = tape_of(a, b);
    require_elementwise(a, b, "mul");
    return t.push(Op::mul, a.value().cwiseProduct(b.value()), a.id(), b.id());
}

Var add_row(Var x, Var row) {
    Tape& t = tape_of(x, row);
    if (row.rows() != 1 || row.cols() != x.cols())
        throw dimension_error("add_row: expected 1x" + std::to_string(x.cols()) + " row, got " +
                              shape_string(row.value()));
    Matrix out = x.value();
    out.rowwise() += row.value().row(0);
    return t.push(Op::add_row, std::move(out), x.id(), row.id());
}

Var scale(Var a, double factor) {
    return a.tape()->push(Op::scale, factor * a.value(), a.id(), Tape::no_parent, factor);
}

Matrix sigmoid_values(const Matrix& x) {
    // exp(-|v|) never overflows; flip the result back for negative inputs.
    const auto v = x.array();
    const Eigen::ArrayXXd e = (-v.abs()).exp();
    const Eigen::ArrayXXd pos = 1.0 / (1.0 + e);
    return (v >= 0.0).select(pos, e * pos).matrix();
}

Matrix tanh_values(const Matrix& x) {
    // Eigen vectorizes exp for doubles but not tanh.
    const auto v = x.array();
    const Eigen::ArrayXXd e = (-2.0 * v.abs()).exp();
    const Eigen::ArrayXXd mag = (1.0 - e) / (1.0 + e);
    return (v >= 0.0).select(mag, -mag).matrix();
}

Var sigmoid(Var a) {
    return a.tape()->push(Op::sigmoid, sigmoid_values(a.value()), a.id());
}

Var tanh(Var a) {
    return a.tape()->push(Op::tanh, tanh_values(a.value()), a.id());
}

Var relu(Var a) {
    return a.tape()->push(Op::relu, a.value().cwiseMax(0.0), a.id());
}

Var square(Var a) {
    return a.tape()->push(Op::square, a.value().array().square().matrix(), a.id());
}

Var concat_cols(Var a, Var b) {
    Tape& t = tape_of(a, b);
    if (a.rows() != b.rows())
        throw dimension_error("concat_cols: row counts differ " + shape_string(a.value()) +
                              " vs " + shape_string(b.value()));
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a.value(), b.value();
    return t.push(Op::concat_cols, std::move(out), a.id(), b.id());
}

Var sum(Var a) {
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    return a.tape()->push(Op::sum, std::move(out), a.id());
}

Var sum_squares(Var a) {
    Matrix out(1, 1);
    out(0, 0) = a.value().squaredNorm();
    return a.tape()->push(Op::sum_squares, std::move(out), a.id());
}

Var bce_loss(Var pred, const Matrix& target, const Matrix& weight) {
    require_same_shape(pred.value(), target, "bce_loss target");
    require_same_shape(pred.value(), weight, "bce_loss weight");
    const Matrix& p = pred.value();
    const double total_weight = weight.sum();
    double acc = 0.0;
    if (total_weight != 0.0) {
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double w = weight.data()[i];
            if (w == 0.0) continue;
            const double pc = std::clamp(p.data()[i], bce_clamp, 1.0 - bce_clamp);
            const double t = target.data()[i];
            acc -= w * (t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc));
        }
        acc /= total_weight;
    }
    Matrix out(1, 1);
    out(0, 0) = acc;
    Var v = pred.tape()->push(Op::bce, std::move(out), pred.id(), Tape::no_parent, total_weight);
    auto& node = pred.tape()->node(v.id());
    node.aux_a = target;
    node.aux_b = weight;
    return v;
}

Var softmax_cross_entropy(Var logits, const std::vector<int>& labels) {
    const Matrix& z = logits.value();
    if (static_cast<Eigen::Index>(labels.size()) != z.rows())
        throw dimension_error("softmax_cross_entropy: " + std::to_string(labels.size()) +
                              " labels for " + std::to_string(z.rows()) + " rows");
    Matrix probs(z.rows(), z.cols());
    Matrix onehot = Matrix::Zero(z.rows(), z.cols());
    double acc = 0.0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const int label = labels[static_cast<std::size_t>(r)];
        if (label < 0 || label >= z.cols())
            throw contract_error("softmax_cross_entropy: label out of range");
        const double peak = z.row(r).maxCoeff();
        const auto shifted = (z.row(r).array() - peak).eval();
        const double log_norm = std::log(shifted.exp().sum());
        probs.row(r) = (shifted - log_norm).exp().matrix();
        onehot(r, label) = 1.0;
        acc -= shifted(label) - log_norm;
    }
    Matrix out(1, 1);
    out(0, 0) = acc / static_cast<double>(z.rows());
    Var v = logits.tape()->push(Op::softmax_xent, std::move(out), logits.id());
    auto& node = logits.tape()->node(v.id());
    node.aux_a = std::move(onehot);
    node.aux_b = std::move(probs);
    return v;
}

} // namespace misa::grad
