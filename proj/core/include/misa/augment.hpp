#pragma once

// Missingness augmentation.
//
// For every row of a mini-batch an artificial mask m~ is drawn with
// P(m~_i = 1) equal to the row's observed fraction. The generator's own
// imputation x_G is re-masked with it (hidden entries refilled with noise z
// matching the model's fill convention), imputed a second time, and the
// result is pulled back toward the raw observations on entries that were
// observed in the data but hidden by m~:
//
//   L_aug = mean over {m = 1, m~ = 0} of (x~_G - x_m)^2
//   objective = L_ori + alpha * L_aug
//
// The baseline path and the augmentation path draw from separate RNG
// streams, so alpha = 0 reproduces a baseline run bit for bit.

#include "misa/models.hpp"
#include "misa/optim.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace misa::augment {

struct MisaConfig {
    bool enabled = false;
    double alpha = 0.0;
    // Pick alpha from the first batch instead of using `alpha`.
    bool auto_alpha = false;
    // Keep x_G attached to the graph when building x~_m, so L_aug also
    // trains the first generator pass.
    bool backprop_through_imputation = false;

    void validate() const;
};

// Default alpha per model: DAE 5, GAIN 100.
double default_alpha(models::ModelKind kind);

// Candidate grid for auto_alpha.
inline constexpr double alpha_grid[] = {1, 5, 10, 20, 50, 100, 200};

struct AugmentedBatch {
    MaskMatrix m_tilde;
    Matrix x_tilde;
    Matrix z;
};

// One artificial mask row for a raw mask row of length d.
std::vector<double> sample_artificial_mask(std::span<const double> m_row, Rng& rng);
// Row-wise sample_artificial_mask over a whole mask matrix.
MaskMatrix sample_artificial_mask(const MaskMatrix& m, Rng& rng);

// m~ * x_G + (1 - m~) * z
Matrix build_augmented(const Matrix& x_g, const MaskMatrix& m_tilde, const Matrix& z);
grad::Var build_augmented(grad::Var x_g, const MaskMatrix& m_tilde, const Matrix& z);

// x~_G = (1 - m~) * G(x~_m, m~) + m~ * x~_m
Matrix augmented_impute(const models::GeneratorModel& model, const Matrix& x_tilde,
                        const MaskMatrix& m_tilde);
grad::Var augmented_impute(models::GeneratorModel& model, grad::Var x_tilde,
                           const MaskMatrix& m_tilde);

// Squared error of x~_G against x_m on entries with m = 1 and m~ = 0,
// averaged over that support. Empty support gives 0.
double aug_loss(const Matrix& x_tilde_g, const Matrix& x_m, const MaskMatrix& m_tilde,
                const MaskMatrix& m);
grad::Var aug_loss(grad::Var x_tilde_g, const Matrix& x_m, const MaskMatrix& m_tilde,
                   const MaskMatrix& m);

struct StepLosses {
    double l_ori = 0.0;
    double l_aug = 0.0;
    double hybrid = 0.0;
};

// Two independent streams: `base` feeds the baseline model (corruption,
// fills, hints), `augment` feeds m~ and z.
struct StepStreams {
    Rng& base;
    Rng& augment;
};

// One optimizer step on L_ori + alpha * L_aug (or L_ori alone when
// augmentation is disabled). Gradients are clipped to `clip_norm` first.
StepLosses hybrid_step(models::GeneratorModel& model, const models::Batch& batch,
                       const MisaConfig& cfg, grad::Adam& optimizer, StepStreams streams,
                       double clip_norm = grad::default_clip_norm);

struct AutoAlpha {
    double alpha = 1.0;
    double ratio = 0.0;  // L_ori / L_aug on the first batch, 0 if undefined
    bool fallback = false;
};

// Grid value closest in log space to L_ori / L_aug on `first_batch`,
// measured before any update. Falls back to 1 when L_aug is 0.
AutoAlpha auto_alpha(models::GeneratorModel& model, const models::Batch& first_batch, Rng& rng);
double nearest_grid_alpha(double ratio);

struct TrainPlan {
    int epochs = 300;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double clip_norm = grad::default_clip_norm;
    std::uint64_t seed = 0;
};

// 2000 epochs for n < 500, 300 otherwise.
int default_epochs(Eigen::Index n);

struct EpochLoss {
    int epoch = 0;
    double l_ori = 0.0;
    double l_aug = 0.0;
    double hybrid = 0.0;
};

struct TrainResult {
    std::vector<EpochLoss> curve;
    double alpha = 0.0;
    bool alpha_fallback = false;
};

// Optional per-step hook, called after each optimizer step.
using StepObserver = std::function<void(int epoch, int step, const models::GeneratorModel&)>;

// Trains `model` on (x, m). Streams derive from plan.seed: "train.base" for
// shuffling and the baseline objective, "train.augment" for augmentation,
// "train.auto_alpha" for the alpha probe.
TrainResult train(models::GeneratorModel& model, const Matrix& x, const MaskMatrix& m,
                  const TrainPlan& plan, const MisaConfig& cfg, const StepObserver& observer = {});

} // namespace misa::augment
