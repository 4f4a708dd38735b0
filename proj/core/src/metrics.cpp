#include "misa/metrics.hpp"

#include "misa/error.hpp"
#include "misa/nn.hpp"
#include "misa/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace misa::metrics {

double rmse_missing(const Matrix& x_true, const Matrix& x_imputed, const MaskMatrix& m) {
    require_same_shape(x_true, x_imputed, "rmse_missing");
    require_same_shape(x_true, m, "rmse_missing mask");
    double acc = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        if (m.data()[i] != 0.0) continue;
        const double diff = x_true.data()[i] - x_imputed.data()[i];
        acc += diff * diff;
        ++count;
    }
    if (count == 0) throw config_error("rmse_missing: no missing entries to score");
    return std::sqrt(acc / static_cast<double>(count));
}

double post_impute_accuracy(const Matrix& train_x, const std::vector<int>& train_labels,
                            const Matrix& test_x, const std::vector<int>& test_labels,
                            std::uint64_t seed, const ClassifierPlan& plan) {
    if (static_cast<Eigen::Index>(train_labels.size()) != train_x.rows() ||
        static_cast<Eigen::Index>(test_labels.size()) != test_x.rows())
        throw dimension_error("post_impute_accuracy: label count does not match rows");
    if (train_x.cols() != test_x.cols())
        throw dimension_error("post_impute_accuracy: train and test widths differ");
    if (test_x.rows() == 0) throw config_error("post_impute_accuracy: empty test set");
    const std::set<int> classes(train_labels.begin(), train_labels.end());
    if (classes.size() < 2) throw config_error("post_impute_accuracy: need at least two classes");
    const int num_classes =
        1 + std::max(*classes.rbegin(),
                     test_labels.empty() ? 0 : *std::max_element(test_labels.begin(), test_labels.end()));

    keep_heap_resident();
    Rng init = make_rng(seed, "classifier.init");
    Rng shuffle = make_rng(seed, "classifier.shuffle");
    nn::Mlp net(nn::MlpSpec{{static_cast<int>(train_x.cols()), plan.hidden, num_classes},
                            nn::Activation::relu,
                            nn::Activation::identity},
                init, "classifier");
    auto params = net.parameters();
    grad::Adam opt(params, grad::AdamOptions{plan.learning_rate});

    const Eigen::Index n = train_x.rows();
    const Eigen::Index bs = std::min<Eigen::Index>(plan.batch_size, n);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (int epoch = 0; epoch < plan.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform01(shuffle) * static_cast<double>(i));
            std::swap(order[i - 1], order[std::min(j, i - 1)]);
        }
        for (Eigen::Index start = 0; start < n; start += bs) {
            const Eigen::Index stop = std::min(n, start + bs);
            const std::span<const Eigen::Index> rows(order.data() + start,
                                                     static_cast<std::size_t>(stop - start));
            std::vector<int> labels;
            labels.reserve(rows.size());
            for (auto r : rows) labels.push_back(train_labels[static_cast<std::size_t>(r)]);
            grad::Tape tape;
            grad::Var logits = net.forward(tape, tape.constant(gather_rows(train_x, rows)));
            tape.backward(grad::softmax_cross_entropy(logits, labels));
            grad::clip_grad_norm(params, grad::default_clip_norm);
            opt.step();
        }
    }

    const Matrix logits = net.predict(test_x);
    std::size_t correct = 0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index best = 0;
        logits.row(r).maxCoeff(&best);
        if (static_cast<int>(best) == test_labels[static_cast<std::size_t>(r)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / n);
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    return s;
}

ScoreReport cross_validated_run(const data::Dataset& dataset, const CvConfig& cfg) {
    if (cfg.repeats < 1) throw config_error("repeats must be >= 1");
    if (cfg.folds < 2) throw config_error("folds must be >= 2");
    cfg.misa.validate();
    if (cfg.with_accuracy && !dataset.has_labels())
        throw config_error("accuracy requested but the dataset has no label column");

    const Eigen::Index n = dataset.rows();
    const Matrix& raw = dataset.features;
    // The mask is drawn on the globally scaled table so logistic scores are
    // comparable across columns.
    const Matrix globally_scaled = data::apply_scale(raw, data::fit_scale(raw));

    augment::TrainPlan plan;
    plan.epochs = cfg.epochs.value_or(augment::default_epochs(n));
    plan.batch_size = cfg.batch_size;
    plan.learning_rate = cfg.learning_rate;

    const auto stage = [&](const char* name) {
        if (cfg.on_stage) cfg.on_stage(name);
    };

    ScoreReport report;
    report.repeats = cfg.repeats;
    report.folds = cfg.folds;
    std::vector<augment::EpochLoss> curve_sum;
    int curve_count = 0;

    for (int r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t repeat_seed = derive_seed(cfg.seed, "repeat", static_cast<std::uint64_t>(r));
        mask::MechanismSpec mech = cfg.mechanism;
        mech.seed = derive_seed(repeat_seed, "mask");
        stage("mask");
        const MaskMatrix mask_all = mask::generate_mask(globally_scaled, mech);
        const data::FoldPlan folds = data::make_folds(static_cast<std::size_t>(n), cfg.folds,
                                                      derive_seed(repeat_seed, "folds"));
        std::vector<double> fold_rmse;
        std::vector<double> fold_acc;
        for (int f = 0; f < cfg.folds; ++f) {
            const auto fi = static_cast<std::uint64_t>(f);
            const auto train_rows = folds.train_rows(f);
            const auto test_rows = folds.test_rows(f);
            const Matrix train_raw = gather_rows(raw, train_rows);
            const Matrix test_raw = gather_rows(raw, test_rows);
            const MaskMatrix train_m = gather_rows(mask_all, train_rows);
            const MaskMatrix test_m = gather_rows(mask_all, test_rows);

            const data::ScaleParams scale = data::fit_scale(train_raw, train_m);
            const Matrix test_truth = data::apply_scale(test_raw, scale);
            const Matrix train_x = data::apply_scale_clipped(train_raw, scale).cwiseProduct(train_m);
            const Matrix test_x = data::apply_scale_clipped(test_raw, scale).cwiseProduct(test_m);

            stage("train");
            Rng init = make_rng(repeat_seed, "model.init", fi);
            auto model = models::make_model(cfg.model, static_cast<int>(raw.cols()), init);
            plan.seed = derive_seed(repeat_seed, "train", fi);
            const auto trained = augment::train(*model, train_x, train_m, plan, cfg.misa);
            report.alpha_per_fold.push_back(trained.alpha);

            if (curve_sum.empty()) curve_sum.resize(trained.curve.size());
            for (std::size_t e = 0; e < trained.curve.size(); ++e) {
                curve_sum[e].epoch = trained.curve[e].epoch;
                curve_sum[e].l_ori += trained.curve[e].l_ori;
                curve_sum[e].l_aug += trained.curve[e].l_aug;
                curve_sum[e].hybrid += trained.curve[e].hybrid;
            }
            ++curve_count;

            stage("impute");
            Rng fill = make_rng(repeat_seed, "impute", fi);
            const Matrix test_imputed = model->impute(test_x, test_m, fill);
            stage("score");
            const double rmse = rmse_missing(test_truth, test_imputed, test_m);
            fold_rmse.push_back(rmse);
            report.rmse_per_fold.push_back(rmse);

            if (cfg.with_accuracy) {
                const Matrix train_imputed = model->impute(train_x, train_m, fill);
                std::vector<int> train_labels;
                std::vector<int> test_labels;
                for (auto i : train_rows) train_labels.push_back(dataset.labels[static_cast<std::size_t>(i)]);
                for (auto i : test_rows) test_labels.push_back(dataset.labels[static_cast<std::size_t>(i)]);
                const double acc = post_impute_accuracy(train_imputed, train_labels, test_imputed,
                                                        test_labels, derive_seed(repeat_seed, "classifier", fi),
                                                        cfg.classifier);
                fold_acc.push_back(acc);
                report.accuracy_per_fold.push_back(acc);
            }
        }
        report.rmse_per_repeat.push_back(summarize(fold_rmse).mean);
        if (cfg.with_accuracy) report.accuracy_per_repeat.push_back(summarize(fold_acc).mean);
    }

    const bool single = cfg.repeats == 1;
    report.rmse = summarize(single ? report.rmse_per_fold : report.rmse_per_repeat);
    report.rmse.mean = summarize(report.rmse_per_repeat).mean;
    if (cfg.with_accuracy) {
        report.accuracy = summarize(single ? report.accuracy_per_fold : report.accuracy_per_repeat);
        report.accuracy->mean = summarize(report.accuracy_per_repeat).mean;
    }
    for (auto& e : curve_sum) {
        e.l_ori /= curve_count;
        e.l_aug /= curve_count;
        e.hybrid /= curve_count;
    }
    report.mean_curve = std::move(curve_sum);
    return report;
}

} // namespace misa::metrics
