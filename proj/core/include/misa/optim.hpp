#pragma once

#include "misa/autodiff.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace misa::grad {

struct AdamOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Bias-corrected adaptive-moment optimizer. Reads Parameter::grad and
// updates Parameter::value in place.
class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamOptions options = {});

    void step();

    std::int64_t steps() const { return steps_; }
    const AdamOptions& options() const { return options_; }
    const std::vector<Matrix>& first_moments() const { return m_; }
    const std::vector<Matrix>& second_moments() const { return v_; }

private:
    std::vector<Parameter*> params_;
    AdamOptions options_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    std::int64_t steps_ = 0;
};

// Plain gradient descent, w <- w - lr * g.
class GradientDescent {
public:
    GradientDescent(std::vector<Parameter*> params, double learning_rate);

    void step();

    std::int64_t steps() const { return steps_; }

private:
    std::vector<Parameter*> params_;
    double learning_rate_;
    std::int64_t steps_ = 0;
};

double global_grad_norm(std::span<Parameter* const> params);

// Rescales all gradients so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

inline constexpr double default_clip_norm = 5.0;

} // namespace misa::grad
