#pragma once

#include "misa/augment.hpp"
#include "misa/dataio.hpp"
#include "misa/missingness.hpp"
#include "misa/models.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace misa::metrics {

// sqrt(mean over entries with m == 0 of (x_true - x_imputed)^2). Throws
// config_error when nothing is missing.
double rmse_missing(const Matrix& x_true, const Matrix& x_imputed, const MaskMatrix& m);

struct ClassifierPlan {
    int hidden = 64;
    int epochs = 200;
    int batch_size = 64;
    double learning_rate = 1e-3;
};

// Trains a d -> 64 -> C relu network with softmax cross-entropy on the
// training rows and returns accuracy on the test rows.
double post_impute_accuracy(const Matrix& train_x, const std::vector<int>& train_labels,
                            const Matrix& test_x, const std::vector<int>& test_labels,
                            std::uint64_t seed, const ClassifierPlan& plan = {});

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    double min = 0.0;
    double max = 0.0;
};

Summary summarize(const std::vector<double>& values);

struct ScoreReport {
    Summary rmse;
    std::vector<double> rmse_per_repeat;
    std::vector<double> rmse_per_fold;  // repeat-major
    std::optional<Summary> accuracy;
    std::vector<double> accuracy_per_repeat;
    std::vector<double> accuracy_per_fold;
    std::vector<double> alpha_per_fold;  // alpha actually used (0 when off)
    std::vector<augment::EpochLoss> mean_curve;  // averaged over every fold
    int repeats = 0;
    int folds = 0;
};

struct CvConfig {
    models::ModelKind model = models::ModelKind::gain;
    mask::MechanismSpec mechanism;
    augment::MisaConfig misa;
    // Epochs default to augment::default_epochs(n) when unset.
    std::optional<int> epochs;
    int batch_size = 64;
    double learning_rate = 1e-3;
    int repeats = 1;
    int folds = 5;
    std::uint64_t seed = 0;
    bool with_accuracy = false;
    ClassifierPlan classifier{};
    // Called with "mask", "train", "impute", "score" as each phase starts.
    std::function<void(const char*)> on_stage;
};

// For each repeat: derive a repeat seed, mask the whole dataset once, split
// rows into folds, then per fold fit scaling on the training rows' observed
// entries, train, impute the held-out rows and score them. With one repeat
// the spread is taken over folds; otherwise over per-repeat means.
ScoreReport cross_validated_run(const data::Dataset& dataset, const CvConfig& cfg);

} // namespace misa::metrics
