#include "misa/nn.hpp"

#include "misa/error.hpp"

#include <cmath>

namespace misa::nn {

const char* activation_name(Activation a) {
    switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

Activation parse_activation(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    throw config_error("unknown activation '" + name + "'");
}

grad::Var activate(grad::Var v, Activation a) {
    switch (a) {
    case Activation::identity: return v;
    case Activation::relu: return grad::relu(v);
    case Activation::tanh: return grad::tanh(v);
    case Activation::sigmoid: return grad::sigmoid(v);
    }
    return v;
}

namespace {

Matrix activate_plain(Matrix m, Activation a) {
    switch (a) {
    case Activation::identity: return m;
    case Activation::relu: return m.cwiseMax(0.0);
    case Activation::tanh: return grad::tanh_values(m);
    case Activation::sigmoid: return grad::sigmoid_values(m);
    }
    return m;
}

} // namespace

Mlp::Mlp(MlpSpec spec, Rng& init_rng, const std::string& name_prefix) : spec_(std::move(spec)) {
    if (spec_.widths.size() < 3) throw config_error("mlp: need at least one hidden layer");
    for (int w : spec_.widths)
        if (w < 1) throw config_error("mlp: layer widths must be positive");

    for (std::size_t l = 0; l + 1 < spec_.widths.size(); ++l) {
        const int fan_in = spec_.widths[l];
        const int fan_out = spec_.widths[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_in, fan_out);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = uniform(init_rng, -limit, limit);
        const std::string tag = name_prefix + ".layer" + std::to_string(l);
        layers_.push_back(Dense{grad::Parameter(tag + ".weight", std::move(w)),
                                grad::Parameter(tag + ".bias", Matrix::Zero(1, fan_out))});
    }
}

grad::Var Mlp::forward(grad::Tape& tape, grad::Var input) {
    if (input.cols() != input_width())
        throw dimension_error("mlp: expected " + std::to_string(input_width()) +
                              " input columns, got " + std::to_string(input.cols()));
    grad::Var h = input;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        h = grad::add_row(grad::matmul(h, tape.param(layers_[l].weight)),
                          tape.param(layers_[l].bias));
        h = activate(h, l + 1 == layers_.size() ? spec_.output : spec_.hidden);
    }
    return h;
}

Matrix Mlp::predict(const Matrix& input) const {
    if (input.cols() != input_width())
        throw dimension_error("mlp: expected " + std::to_string(input_width()) +
                              " input columns, got " + std::to_string(input.cols()));
    Matrix h = input;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Matrix z;
        z.noalias() = h * layers_[l].weight.value;
        z.rowwise() += layers_[l].bias.value.row(0);
        h = activate_plain(std::move(z), l + 1 == layers_.size() ? spec_.output : spec_.hidden);
    }
    return h;
}

std::vector<grad::Parameter*> Mlp::parameters() {
    std::vector<grad::Parameter*> out;
    for (auto& l : layers_) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

std::vector<const grad::Parameter*> Mlp::parameters() const {
    std::vector<const grad::Parameter*> out;
    for (const auto& l : layers_) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

} // namespace misa::nn
