#pragma once

// Tape-based reverse-mode differentiation over dense matrices.
//
// A Tape records every operation of one forward pass in creation order, so
// the node vector is already a topological order and backward() is a single
// reverse sweep. Tapes are cheap and meant to be rebuilt for every step.
// Trainable weights live outside the tape as Parameter objects; the tape
// references them through leaf nodes and writes gradients back on backward().

#include "misa/tensor.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace misa::grad {

struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;

    Parameter() = default;
    Parameter(std::string n, Matrix v)
        : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}
};

enum class Op : std::uint8_t {
    constant,
    parameter,
    matmul,
    add,
    sub,
    mul,
    add_row,
    scale,
    sigmoid,
    tanh,
    relu,
    square,
    concat_cols,
    sum,
    sum_squares,
    bce,
    softmax_xent,
};

const char* op_name(Op op);

inline constexpr double bce_clamp = 1e-7;

class Tape;

// Handle to a node on a tape. Valid for the lifetime of its tape.
class Var {
public:
    Var() = default;

    const Matrix& value() const;
    // Zero matrix for nodes the last backward() did not reach.
    Matrix grad() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
    // Value of a 1x1 node.
    double scalar() const;

    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }

private:
    friend class Tape;
    Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    static constexpr std::size_t no_parent = std::numeric_limits<std::size_t>::max();

    struct Node {
        Matrix value;
        Matrix grad;
        std::array<std::size_t, 2> parents{no_parent, no_parent};
        Op op = Op::constant;
        bool requires_grad = false;
        double scalar = 0.0;
        Matrix aux_a;  // bce: target; softmax_xent: one-hot labels
        Matrix aux_b;  // bce: weight
        Parameter* param = nullptr;
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    // The same Parameter always maps to one leaf, so several forward passes
    // over shared weights accumulate into a single gradient.
    Var param(Parameter& p);

    Var push(Op op, Matrix value, std::size_t a, std::size_t b = no_parent, double scalar = 0.0);

    // Recomputes d(loss)/d(node) from scratch for every node the loss
    // reaches. Parameter::grad receives the result (zero if unreached).
    void backward(Var loss);

    const Node& node(std::size_t id) const { return nodes_[id]; }
    Node& node(std::size_t id) { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }

private:
    void propagate(std::size_t id);
    Matrix& grad_of(std::size_t id);
    template <typename Expr>
    void accumulate(std::size_t id, const Expr& expr);

    std::vector<Node> nodes_;
    std::unordered_map<const Parameter*, std::size_t> param_leaf_;
};

// Matrix product; a.cols() must equal b.rows().
Var matmul(Var a, Var b);

// Elementwise binary ops require equal shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

// x (n x k) plus a 1 x k row broadcast over every row.
Var add_row(Var x, Var row);
Var scale(Var a, double factor);

// Forward kernels shared with tape-free inference.
Matrix sigmoid_values(const Matrix& x);
Matrix tanh_values(const Matrix& x);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var square(Var a);

Var concat_cols(Var a, Var b);

// 1x1 reductions.
Var sum(Var a);
Var sum_squares(Var a);

// Weighted binary cross-entropy averaged over the total weight. Predictions
// are clamped into [bce_clamp, 1 - bce_clamp] before the log; a zero total
// weight yields a 0 loss with zero gradient.
Var bce_loss(Var pred, const Matrix& target, const Matrix& weight);

// Mean over rows of -log softmax(logits)[label].
Var softmax_cross_entropy(Var logits, const std::vector<int>& labels);

// Wraps an operation's inputs as constants on a fresh node; convenience for
// mixing plain matrices with tape values.
inline Var constant_like(Var v, Matrix m) { return v.tape()->constant(std::move(m)); }

} // namespace misa::grad
