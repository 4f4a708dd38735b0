#include "misa/augment.hpp"

#include "misa/error.hpp"

#include <cmath>
#include <numeric>

namespace misa::augment {

using grad::Tape;
using grad::Var;

void MisaConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw config_error("misa alpha must be a finite value >= 0, got " + std::to_string(alpha));
}

double default_alpha(models::ModelKind kind) {
    return kind == models::ModelKind::dae ? 5.0 : 100.0;
}

std::vector<double> sample_artificial_mask(std::span<const double> m_row, Rng& rng) {
    if (m_row.empty()) throw config_error("sample_artificial_mask: empty row");
    const double keep = std::accumulate(m_row.begin(), m_row.end(), 0.0) /
                        static_cast<double>(m_row.size());
    std::vector<double> out(m_row.size());
    for (double& v : out) v = bernoulli(rng, keep) ? 1.0 : 0.0;
    return out;
}

MaskMatrix sample_artificial_mask(const MaskMatrix& m, Rng& rng) {
    if (m.cols() == 0) throw config_error("sample_artificial_mask: empty row");
    MaskMatrix out(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const auto row = sample_artificial_mask(
            std::span<const double>(m.row(r).data(), static_cast<std::size_t>(m.cols())), rng);
        for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = row[static_cast<std::size_t>(c)];
    }
    return out;
}

Matrix build_augmented(const Matrix& x_g, const MaskMatrix& m_tilde, const Matrix& z) {
    return models::compose_imputation(x_g, m_tilde, z);
}

Var build_augmented(Var x_g, const MaskMatrix& m_tilde, const Matrix& z) {
    require_same_shape(z, m_tilde, "build_augmented noise");
    return models::compose_imputation(x_g, m_tilde, x_g.tape()->constant(z));
}

Matrix augmented_impute(const models::GeneratorModel& model, const Matrix& x_tilde,
                        const MaskMatrix& m_tilde) {
    return models::compose_imputation(x_tilde, m_tilde, model.impute_raw(x_tilde, m_tilde));
}

Var augmented_impute(models::GeneratorModel& model, Var x_tilde, const MaskMatrix& m_tilde) {
    Tape& t = *x_tilde.tape();
    Var g = model.generate(t, x_tilde, t.constant(m_tilde));
    return models::compose_imputation(x_tilde, m_tilde, g);
}

namespace {

MaskMatrix aug_support(const MaskMatrix& m_tilde, const MaskMatrix& m) {
    require_same_shape(m_tilde, m, "aug_loss masks");
    return m.cwiseProduct((1.0 - m_tilde.array()).matrix());
}

} // namespace

double aug_loss(const Matrix& x_tilde_g, const Matrix& x_m, const MaskMatrix& m_tilde,
                const MaskMatrix& m) {
    require_same_shape(x_tilde_g, x_m, "aug_loss");
    const MaskMatrix support = aug_support(m_tilde, m);
    const double count = support.sum();
    if (count == 0.0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < support.size(); ++i) {
        if (support.data()[i] == 0.0) continue;
        const double diff = x_tilde_g.data()[i] - x_m.data()[i];
        acc += diff * diff;
    }
    return acc / count;
}

Var aug_loss(Var x_tilde_g, const Matrix& x_m, const MaskMatrix& m_tilde, const MaskMatrix& m) {
    require_same_shape(x_tilde_g.value(), x_m, "aug_loss");
    const MaskMatrix support = aug_support(m_tilde, m);
    const double count = support.sum();
    Tape& t = *x_tilde_g.tape();
    Var diff = grad::sub(x_tilde_g, t.constant(x_m.cwiseProduct(support)));
    Var sq = grad::sum_squares(grad::mul(diff, t.constant(support)));
    return grad::scale(sq, count > 0.0 ? 1.0 / count : 0.0);
}

namespace {

Matrix noise_like(const MaskMatrix& m_tilde, mask::FillKind fill, Rng& rng) {
    return mask::fill_missing(Matrix::Zero(m_tilde.rows(), m_tilde.cols()), m_tilde, fill, rng);
}

} // namespace

StepLosses hybrid_step(models::GeneratorModel& model, const models::Batch& batch,
                       const MisaConfig& cfg, grad::Adam& optimizer, StepStreams streams,
                       double clip_norm) {
    cfg.validate();
    Tape tape;
    models::ObjectiveOptions options;
    options.update_auxiliary = true;
    options.need_imputed = cfg.enabled;
    models::OriginalObjective objective = model.original_objective(tape, batch, streams.base, options);

    StepLosses losses;
    losses.l_ori = objective.loss.scalar();
    Var total = objective.loss;
    if (cfg.enabled) {
        const MaskMatrix m_tilde = sample_artificial_mask(batch.m, streams.augment);
        const Matrix z = noise_like(m_tilde, model.fill_kind(), streams.augment);
        Var x_g = cfg.backprop_through_imputation ? *objective.imputed
                                                  : tape.constant(objective.imputed->value());
        Var x_tilde = build_augmented(x_g, m_tilde, z);
        Var x_tilde_g = augmented_impute(model, x_tilde, m_tilde);
        Var l_aug = aug_loss(x_tilde_g, batch.x, m_tilde, batch.m);
        losses.l_aug = l_aug.scalar();
        total = grad::add(objective.loss, grad::scale(l_aug, cfg.alpha));
    }
    losses.hybrid = total.scalar();

    tape.backward(total);
    auto params = model.generator_parameters();
    grad::clip_grad_norm(params, clip_norm);
    optimizer.step();
    return losses;
}

double nearest_grid_alpha(double ratio) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) return 1.0;
    double best = alpha_grid[0];
    double best_gap = std::abs(std::log(ratio) - std::log(best));
    for (double a : alpha_grid) {
        const double gap = std::abs(std::log(ratio) - std::log(a));
        if (gap < best_gap) {
            best = a;
            best_gap = gap;
        }
    }
    return best;
}

AutoAlpha auto_alpha(models::GeneratorModel& model, const models::Batch& first_batch, Rng& rng) {
    Tape tape;
    models::ObjectiveOptions options;
    options.update_auxiliary = false;
    options.need_imputed = true;
    const auto objective = model.original_objective(tape, first_batch, rng, options);
    const double l_ori = objective.loss.scalar();

    const MaskMatrix m_tilde = sample_artificial_mask(first_batch.m, rng);
    const Matrix z = noise_like(m_tilde, model.fill_kind(), rng);
    const Matrix x_tilde = build_augmented(objective.imputed->value(), m_tilde, z);
    const Matrix x_tilde_g = augmented_impute(model, x_tilde, m_tilde);
    const double l_aug = aug_loss(x_tilde_g, first_batch.x, m_tilde, first_batch.m);

    AutoAlpha out;
    if (l_aug == 0.0) {
        out.fallback = true;
        return out;
    }
    out.ratio = l_ori / l_aug;
    out.alpha = nearest_grid_alpha(out.ratio);
    return out;
}

int default_epochs(Eigen::Index n) {
    return n < 500 ? 2000 : 300;
}

TrainResult train(models::GeneratorModel& model, const Matrix& x, const MaskMatrix& m,
                  const TrainPlan& plan, const MisaConfig& cfg, const StepObserver& observer) {
    require_same_shape(x, m, "train");
    cfg.validate();
    keep_heap_resident();
    if (plan.epochs < 1) throw config_error("train: epochs must be >= 1");
    if (plan.batch_size < 1) throw config_error("train: batch size must be >= 1");
    const Eigen::Index n = x.rows();
    if (n < 1) throw config_error("train: no rows");
    const Eigen::Index batch_size = std::min<Eigen::Index>(plan.batch_size, n);

    Rng base = make_rng(plan.seed, "train.base");
    Rng aug = make_rng(plan.seed, "train.augment");
    grad::Adam optimizer(model.generator_parameters(), grad::AdamOptions{plan.learning_rate});

    TrainResult result;
    MisaConfig effective = cfg;
    if (cfg.enabled && cfg.auto_alpha) {
        std::vector<Eigen::Index> first(static_cast<std::size_t>(batch_size));
        std::iota(first.begin(), first.end(), Eigen::Index{0});
        models::Batch probe{gather_rows(x, first), gather_rows(m, first)};
        Rng probe_rng = make_rng(plan.seed, "train.auto_alpha");
        const AutoAlpha a = auto_alpha(model, probe, probe_rng);
        effective.alpha = a.alpha;
        result.alpha_fallback = a.fallback;
    }
    result.alpha = effective.enabled ? effective.alpha : 0.0;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    result.curve.reserve(static_cast<std::size_t>(plan.epochs));
    int step = 0;
    for (int epoch = 0; epoch < plan.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform01(base) * static_cast<double>(i));
            std::swap(order[i - 1], order[std::min(j, i - 1)]);
        }
        EpochLoss el;
        el.epoch = epoch;
        int batches = 0;
        for (Eigen::Index start = 0; start < n; start += batch_size) {
            const Eigen::Index stop = std::min(n, start + batch_size);
            const std::span<const Eigen::Index> rows(order.data() + start,
                                                     static_cast<std::size_t>(stop - start));
            models::Batch batch{gather_rows(x, rows), gather_rows(m, rows)};
            const StepLosses l = hybrid_step(model, batch, effective, optimizer,
                                             StepStreams{base, aug}, plan.clip_norm);
            el.l_ori += l.l_ori;
            el.l_aug += l.l_aug;
            el.hybrid += l.hybrid;
            ++batches;
            if (observer) observer(epoch, step, model);
            ++step;
        }
        el.l_ori /= batches;
        el.l_aug /= batches;
        el.hybrid /= batches;
        result.curve.push_back(el);
    }
    return result;
}

} // namespace misa::augment
