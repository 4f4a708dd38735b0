#pragma once

#include "misa/autodiff.hpp"
#include "misa/random.hpp"

#include <string>
#include <vector>

namespace misa::nn {

enum class Activation { identity, relu, tanh, sigmoid };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

// Layer widths include input and output: {in, h1, ..., out}.
struct MlpSpec {
    std::vector<int> widths;
    Activation hidden = Activation::relu;
    Activation output = Activation::sigmoid;
};

// Fully connected network. Weights are Glorot-uniform in
// +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
class Mlp {
public:
    Mlp() = default;
    Mlp(MlpSpec spec, Rng& init_rng, const std::string& name_prefix = "mlp");

    grad::Var forward(grad::Tape& tape, grad::Var input);
    // Forward pass without recording gradients.
    Matrix predict(const Matrix& input) const;

    const MlpSpec& spec() const { return spec_; }
    int input_width() const { return spec_.widths.front(); }
    int output_width() const { return spec_.widths.back(); }

    std::vector<grad::Parameter*> parameters();
    std::vector<const grad::Parameter*> parameters() const;

private:
    struct Dense {
        grad::Parameter weight;
        grad::Parameter bias;
    };

    MlpSpec spec_;
    std::vector<Dense> layers_;
};

grad::Var activate(grad::Var v, Activation a);

} // namespace misa::nn
