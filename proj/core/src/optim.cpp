#include "misa/optim.hpp"

#include "misa/error.hpp"

#include <cmath>

namespace misa::grad {

Adam::Adam(std::vector<Parameter*> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
    if (!(options_.learning_rate > 0.0)) throw config_error("adam: learning rate must be > 0");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Parameter* p : params_) {
        m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
}

void Adam::step() {
    ++steps_;
    const double t = static_cast<double>(steps_);
    const double correction1 = 1.0 - std::pow(options_.beta1, t);
    const double correction2 = 1.0 - std::pow(options_.beta2, t);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i];
        require_same_shape(p.value, p.grad, "adam step");
        m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * p.grad;
        v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * p.grad.cwiseAbs2();
        p.value.array() -= options_.learning_rate * (m_[i].array() / correction1) /
                           ((v_[i].array() / correction2).sqrt() + options_.epsilon);
    }
}

GradientDescent::GradientDescent(std::vector<Parameter*> params, double learning_rate)
    : params_(std::move(params)), learning_rate_(learning_rate) {
    if (!(learning_rate_ > 0.0)) throw config_error("gradient descent: learning rate must be > 0");
}

void GradientDescent::step() {
    ++steps_;
    for (Parameter* p : params_) {
        require_same_shape(p->value, p->grad, "gradient descent step");
        p->value -= learning_rate_ * p->grad;
    }
}

double global_grad_norm(std::span<Parameter* const> params) {
    double sq = 0.0;
    for (const Parameter* p : params) sq += p->grad.squaredNorm();
    return std::sqrt(sq);
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
    const double norm = global_grad_norm(params);
    if (norm > max_norm) {
        const double factor = max_norm / norm;
        for (Parameter* p : params) p->grad *= factor;
    }
    return norm;
}

} // namespace misa::grad
