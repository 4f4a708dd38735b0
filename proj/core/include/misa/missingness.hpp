#pragma once

// Missingness simulators over complete data.
//
// MCAR drops every entry independently. MAR keeps a random subset O of
// columns fully observed and drops each remaining entry with probability
// sigmoid(w_j . x_O + b), where w_j ~ N(0, 1) / sqrt(|O|) per maskable column
// and a single bias b is solved for the requested rate. MNAR runs the same
// logistic model on inputs that were themselves MCAR-masked (hidden inputs
// read as 0), and the MCAR self-mask is kept on the input columns.

#include "misa/random.hpp"
#include "misa/tensor.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace misa::mask {

enum class Mechanism { mcar, mar, mnar };

const char* mechanism_name(Mechanism m);
Mechanism parse_mechanism(const std::string& name);

struct MechanismSpec {
    Mechanism kind = Mechanism::mcar;
    double target_rate = 0.5;
    double observed_fraction = 0.3;
    // MNAR input self-mask probability; defaults to target_rate.
    std::optional<double> self_mask_rate;
    std::uint64_t seed = 0;

    void validate() const;
};

MaskMatrix mcar_mask(Eigen::Index n, Eigen::Index d, double rate, Rng& rng);

struct LogisticMaskDetail {
    MaskMatrix mask;
    std::vector<Eigen::Index> input_columns;     // O
    std::vector<Eigen::Index> maskable_columns;  // complement of O
    double bias = 0.0;
    Matrix scores;  // n x |maskable|, before the bias
};

LogisticMaskDetail mar_mask_detail(const Matrix& x, const MechanismSpec& spec);
LogisticMaskDetail mnar_mask_detail(const Matrix& x, const MechanismSpec& spec);

MaskMatrix mar_mask(const Matrix& x, const MechanismSpec& spec);
MaskMatrix mnar_mask(const Matrix& x, const MechanismSpec& spec);

// Dispatches on spec.kind with an RNG seeded from spec.seed.
MaskMatrix generate_mask(const Matrix& x, const MechanismSpec& spec);

// b such that mean(sigmoid(score_i + b)) is within 1e-4 of target_rate,
// found by bisection on [-30, 30]. Throws numeric_error if 200 iterations
// do not reach the tolerance.
double fit_bias(std::span<const double> scores, double target_rate);

inline constexpr double fit_bias_tolerance = 1e-4;

enum class FillKind { zeros, uniform_noise };

const char* fill_name(FillKind f);

inline constexpr double noise_fill_high = 0.01;

// Observed entries copied; missing entries set to 0 or U[0, 0.01].
Matrix fill_missing(const Matrix& x, const MaskMatrix& m, FillKind fill, Rng& rng);

// Missing fraction of a mask.
double missing_fraction(const MaskMatrix& m);

} // namespace misa::mask
