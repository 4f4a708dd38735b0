#pragma once

// Generative imputers behind one GeneratorModel contract.
//
// Every generator sees the concatenation [x_filled | m] (width 2d) and emits
// a d-wide sigmoid reconstruction. The imputed sample keeps observed values
// and takes the network output only where m == 0.

#include "misa/autodiff.hpp"
#include "misa/missingness.hpp"
#include "misa/nn.hpp"
#include "misa/optim.hpp"
#include "misa/random.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <utility>
#include <string>
#include <vector>

namespace misa::models {

enum class ModelKind { dae, gain };

const char* model_name(ModelKind k);
ModelKind parse_model(const std::string& name);

// (1 - m) * g_out + m * x_m
Matrix compose_imputation(const Matrix& x_m, const MaskMatrix& m, const Matrix& g_out);
grad::Var compose_imputation(grad::Var x_m, const MaskMatrix& m, grad::Var g_out);

// A mini-batch of scaled data: x holds true values where m == 1; entries
// where m == 0 are never read.
struct Batch {
    Matrix x;
    MaskMatrix m;
};

struct ObjectiveOptions {
    // Let auxiliary networks (the GAIN discriminator) take their optimizer
    // step before the generator loss is built.
    bool update_auxiliary = true;
    // Also record the imputed result x_G of the clean batch on the tape.
    bool need_imputed = false;
};

// The baseline objective of one step plus, on request, the imputed result
// x_G = (1 - m) * G(x_filled, m) + m * x_filled.
struct OriginalObjective {
    grad::Var loss;
    std::optional<grad::Var> imputed;
};

class GeneratorModel {
public:
    virtual ~GeneratorModel() = default;

    virtual ModelKind kind() const = 0;
    virtual mask::FillKind fill_kind() const = 0;
    int width() const { return generator().output_width(); }

    // Raw network output G(x_filled, m), recorded on `tape`.
    grad::Var generate(grad::Tape& tape, grad::Var x_filled, grad::Var m);
    // Raw network output without recording gradients.
    Matrix impute_raw(const Matrix& x_filled, const MaskMatrix& m) const;
    // Fill, run the generator and compose: the model's imputation of x.
    Matrix impute(const Matrix& x, const MaskMatrix& m, Rng& fill_rng) const;

    // Builds the baseline generator loss for one mini-batch. All randomness
    // comes from `rng`.
    virtual OriginalObjective original_objective(grad::Tape& tape, const Batch& batch, Rng& rng,
                                                 const ObjectiveOptions& options) = 0;

    std::vector<grad::Parameter*> generator_parameters() { return generator().parameters(); }

    nn::Mlp& generator() { return const_cast<nn::Mlp&>(std::as_const(*this).generator()); }
    virtual const nn::Mlp& generator() const = 0;
    // Every trainable network, for checkpointing.
    virtual std::vector<std::pair<std::string, const nn::Mlp*>> networks() const = 0;
    virtual std::vector<std::pair<std::string, nn::Mlp*>> networks() = 0;
};

struct DaeOptions {
    double corruption = 0.5;
    // Reconstruct every observed entry (true) or only the entries left
    // visible after corruption (false).
    bool reconstruct_corrupted = true;
};

// Overcomplete denoising autoencoder: 2d -> 2d+7 -> 2d+14 -> 2d+7 -> d,
// tanh hidden, sigmoid out, zero fill.
class DaeImputer final : public GeneratorModel {
public:
    DaeImputer(int d, Rng& init_rng, DaeOptions options = {});

    ModelKind kind() const override { return ModelKind::dae; }
    mask::FillKind fill_kind() const override { return mask::FillKind::zeros; }

    OriginalObjective original_objective(grad::Tape& tape, const Batch& batch, Rng& rng,
                                         const ObjectiveOptions& options) override;

    const nn::Mlp& generator() const override { return net_; }
    std::vector<std::pair<std::string, const nn::Mlp*>> networks() const override;
    std::vector<std::pair<std::string, nn::Mlp*>> networks() override;

    const DaeOptions& options() const { return options_; }

private:
    DaeOptions options_;
    nn::Mlp net_;
};

// Denoising reconstruction loss sum(s * (g_out - x)^2) / sum(s), where the
// support s is `kept` or, with reconstruct_corrupted, all of `m`. An empty
// support gives 0.
grad::Var dae_loss(grad::Tape& tape, grad::Var g_out, const Matrix& x_m, const MaskMatrix& m,
                   const MaskMatrix& kept, bool reconstruct_corrupted);

// Samples which observed entries stay visible: kept = m * Bernoulli(1 - p).
MaskMatrix dae_corrupt(const MaskMatrix& m, double corruption, Rng& rng);

struct GainOptions {
    double hint_rate = 0.9;
    double reconstruction_weight = 100.0;
    grad::AdamOptions discriminator_optimizer{};
    double clip_norm = grad::default_clip_norm;
};

// H = B * m + 0.5 * (1 - B), B ~ Bernoulli(hint_rate).
Matrix gain_hint(const MaskMatrix& m, double hint_rate, Rng& rng);

// -mean over missing entries of log D + weight * mean over observed of (g - x)^2
grad::Var gain_generator_loss(grad::Var d_prob, grad::Var g_out, const Matrix& x_m,
                              const MaskMatrix& m, double reconstruction_weight);
// BCE between D(x_hat, hint) and m over entries where hint == 0.5.
grad::Var gain_discriminator_loss(grad::Var d_prob, const MaskMatrix& m, const Matrix& hint);

// Adversarial imputer with hint matrix. G and D are 2d -> 2d -> d -> d MLPs
// with relu hidden and sigmoid output; uniform [0, 0.01] fill.
class GainImputer final : public GeneratorModel {
public:
    GainImputer(int d, Rng& init_rng, GainOptions options = {});

    ModelKind kind() const override { return ModelKind::gain; }
    mask::FillKind fill_kind() const override { return mask::FillKind::uniform_noise; }

    OriginalObjective original_objective(grad::Tape& tape, const Batch& batch, Rng& rng,
                                         const ObjectiveOptions& options) override;

    // D(x_hat, hint) on a tape.
    grad::Var discriminate(grad::Tape& tape, grad::Var x_hat, grad::Var hint);
    // One discriminator update on a fixed imputed batch. Returns the loss.
    double discriminator_step(const Matrix& x_hat, const MaskMatrix& m, const Matrix& hint);

    const nn::Mlp& generator() const override { return gen_; }
    nn::Mlp& discriminator() { return disc_; }
    const nn::Mlp& discriminator() const { return disc_; }
    std::vector<std::pair<std::string, const nn::Mlp*>> networks() const override;
    std::vector<std::pair<std::string, nn::Mlp*>> networks() override;

    const GainOptions& options() const { return options_; }
    double last_discriminator_loss() const { return last_d_loss_; }

private:
    GainOptions options_;
    nn::Mlp gen_;
    nn::Mlp disc_;
    std::unique_ptr<grad::Adam> disc_opt_;
    double last_d_loss_ = 0.0;
};

nn::MlpSpec dae_spec(int d);
nn::MlpSpec gain_spec(int d);

std::unique_ptr<GeneratorModel> make_model(ModelKind kind, int d, Rng& init_rng);

// JSON dump: architecture descriptor plus every parameter array. Doubles are
// written with round-trip precision, so loading reproduces the weights bit
// for bit.
void save_checkpoint(const GeneratorModel& model, const std::filesystem::path& path);
std::unique_ptr<GeneratorModel> load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_json(const GeneratorModel& model);
std::unique_ptr<GeneratorModel> checkpoint_from_json(const std::string& text);

} // namespace misa::models
