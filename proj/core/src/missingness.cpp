#include "misa/missingness.hpp"

#include "misa/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace misa::mask {

namespace {

double logistic(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

double mean_probability(std::span<const double> scores, double bias) {
    double acc = 0.0;
    for (double s : scores) acc += logistic(s + bias);
    return acc / static_cast<double>(scores.size());
}

void require_open_unit(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0))
        throw config_error(std::string(what) + " must lie in (0, 1), got " + std::to_string(v));
}

// Partial Fisher-Yates: the first `count` entries of a shuffled 0..d-1.
std::vector<Eigen::Index> sample_columns(Eigen::Index d, Eigen::Index count, Rng& rng) {
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(d));
    std::iota(cols.begin(), cols.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto remaining = static_cast<double>(d - i);
        const auto j = i + std::min<Eigen::Index>(static_cast<Eigen::Index>(uniform01(rng) * remaining),
                                                 d - i - 1);
        std::swap(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
    }
    cols.resize(static_cast<std::size_t>(count));
    std::sort(cols.begin(), cols.end());
    return cols;
}

// Shared logistic construction. `inputs` is the n x |O| matrix the scores
// are computed from (raw for MAR, self-masked for MNAR).
LogisticMaskDetail logistic_mask(const Matrix& x, const MechanismSpec& spec,
                                 const std::vector<Eigen::Index>& input_cols, const Matrix& inputs) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    LogisticMaskDetail out;
    out.input_columns = input_cols;
    for (Eigen::Index c = 0; c < d; ++c)
        if (!std::binary_search(input_cols.begin(), input_cols.end(), c))
            out.maskable_columns.push_back(c);

    const auto n_in = static_cast<Eigen::Index>(input_cols.size());
    const auto n_mask = static_cast<Eigen::Index>(out.maskable_columns.size());
    Rng weight_rng = make_rng(spec.seed, "logistic.weights");
    Matrix weights(n_in, n_mask);
    const double weight_scale = 1.0 / std::sqrt(static_cast<double>(n_in));
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        weights.data()[i] = standard_normal(weight_rng) * weight_scale;

    out.scores.noalias() = inputs * weights;
    out.bias = fit_bias(std::span<const double>(out.scores.data(), static_cast<std::size_t>(out.scores.size())),
                        spec.target_rate);

    Rng draw_rng = make_rng(spec.seed, "logistic.draws");
    out.mask = MaskMatrix::Ones(n, d);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index j = 0; j < n_mask; ++j)
            if (bernoulli(draw_rng, logistic(out.scores(r, j) + out.bias)))
                out.mask(r, out.maskable_columns[static_cast<std::size_t>(j)]) = 0.0;
    return out;
}

std::vector<Eigen::Index> choose_inputs(const Matrix& x, const MechanismSpec& spec) {
    spec.validate();
    const Eigen::Index d = x.cols();
    const auto count = static_cast<Eigen::Index>(std::ceil(spec.observed_fraction * static_cast<double>(d)));
    if (count < 1 || d - count < 1)
        throw config_error("logistic mask: " + std::to_string(d) +
                           " columns leave no maskable column at observed_fraction " +
                           std::to_string(spec.observed_fraction));
    if (x.rows() < 1) throw config_error("logistic mask: no rows");
    Rng rng = make_rng(spec.seed, "logistic.columns");
    return sample_columns(d, count, rng);
}

} // namespace

const char* mechanism_name(Mechanism m) {
    switch (m) {
    case Mechanism::mcar: return "mcar";
    case Mechanism::mar: return "mar";
    case Mechanism::mnar: return "mnar";
    }
    return "?";
}

Mechanism parse_mechanism(const std::string& name) {
    if (name == "mcar" || name == "MCAR") return Mechanism::mcar;
    if (name == "mar" || name == "MAR") return Mechanism::mar;
    if (name == "mnar" || name == "MNAR") return Mechanism::mnar;
    throw config_error("unknown mechanism '" + name + "'");
}

void MechanismSpec::validate() const {
    require_open_unit(target_rate, "target_rate");
    if (kind != Mechanism::mcar) require_open_unit(observed_fraction, "observed_fraction");
    if (self_mask_rate && !(*self_mask_rate >= 0.0 && *self_mask_rate < 1.0))
        throw config_error("self_mask_rate must lie in [0, 1)");
}

MaskMatrix mcar_mask(Eigen::Index n, Eigen::Index d, double rate, Rng& rng) {
    require_open_unit(rate, "MCAR rate");
    if (n < 1 || d < 1) throw config_error("mcar_mask: empty shape");
    MaskMatrix m(n, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = bernoulli(rng, rate) ? 0.0 : 1.0;
    return m;
}

double fit_bias(std::span<const double> scores, double target_rate) {
    require_open_unit(target_rate, "fit_bias target");
    if (scores.empty()) throw config_error("fit_bias: no scores");
    for (double s : scores)
        if (!std::isfinite(s)) throw numeric_error("fit_bias: non-finite score");

    double lo = -30.0;
    double hi = 30.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double rate = mean_probability(scores, mid);
        if (std::abs(rate - target_rate) <= 0.1 * fit_bias_tolerance) return mid;
        (rate < target_rate ? lo : hi) = mid;
    }
    const double b = 0.5 * (lo + hi);
    if (std::abs(mean_probability(scores, b) - target_rate) > fit_bias_tolerance)
        throw numeric_error("fit_bias: target rate " + std::to_string(target_rate) +
                            " not reached within 200 bisection steps on [-30, 30]");
    return b;
}

LogisticMaskDetail mar_mask_detail(const Matrix& x, const MechanismSpec& spec) {
    const auto inputs = choose_inputs(x, spec);
    return logistic_mask(x, spec, inputs, gather_cols(x, inputs));
}

LogisticMaskDetail mnar_mask_detail(const Matrix& x, const MechanismSpec& spec) {
    const auto input_cols = choose_inputs(x, spec);
    const double self_rate = spec.self_mask_rate.value_or(spec.target_rate);
    Matrix inputs = gather_cols(x, input_cols);
    MaskMatrix self_mask = MaskMatrix::Ones(inputs.rows(), inputs.cols());
    Rng self_rng = make_rng(spec.seed, "mnar.self_mask");
    for (Eigen::Index i = 0; i < self_mask.size(); ++i)
        if (bernoulli(self_rng, self_rate)) self_mask.data()[i] = 0.0;
    inputs = inputs.cwiseProduct(self_mask);

    LogisticMaskDetail out = logistic_mask(x, spec, input_cols, inputs);
    for (std::size_t k = 0; k < input_cols.size(); ++k)
        out.mask.col(input_cols[k]) = self_mask.col(static_cast<Eigen::Index>(k));
    return out;
}

MaskMatrix mar_mask(const Matrix& x, const MechanismSpec& spec) {
    return mar_mask_detail(x, spec).mask;
}

MaskMatrix mnar_mask(const Matrix& x, const MechanismSpec& spec) {
    return mnar_mask_detail(x, spec).mask;
}

MaskMatrix generate_mask(const Matrix& x, const MechanismSpec& spec) {
    spec.validate();
    switch (spec.kind) {
    case Mechanism::mcar: {
        Rng rng = make_rng(spec.seed, "mcar");
        return mcar_mask(x.rows(), x.cols(), spec.target_rate, rng);
    }
    case Mechanism::mar: return mar_mask(x, spec);
    case Mechanism::mnar: return mnar_mask(x, spec);
    }
    throw config_error("unknown mechanism");
}

const char* fill_name(FillKind f) {
    return f == FillKind::zeros ? "zeros" : "uniform_noise";
}

Matrix fill_missing(const Matrix& x, const MaskMatrix& m, FillKind fill, Rng& rng) {
    require_same_shape(x, m, "fill_missing");
    Matrix out = x;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (m.data()[i] == 1.0) continue;
        out.data()[i] = fill == FillKind::zeros ? 0.0 : uniform(rng, 0.0, noise_fill_high);
    }
    return out;
}

double missing_fraction(const MaskMatrix& m) {
    if (m.size() == 0) return 0.0;
    return 1.0 - m.sum() / static_cast<double>(m.size());
}

} // namespace misa::mask
