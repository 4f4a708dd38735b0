// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers as arguments to run a
// subset, e.g. `misa_acceptance 1 2 3`.

#include "check_support.hpp"

#include "misa/augment.hpp"
#include "misa/error.hpp"
#include "misa/harness.hpp"
#include "misa/metrics.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace misa;
namespace fs = std::filesystem;
using grad::Parameter;
using grad::Tape;
using grad::Var;

namespace {

// Tolerances and protocol constants.
constexpr double exact_tol = 1e-12;
constexpr double artificial_rate_tol = 0.005;
constexpr int artificial_draws = 100000;
constexpr double fd_step = 1e-4;
constexpr double fd_rel_tol = 1e-3;
constexpr double mcar_tol = 0.005;
constexpr double logistic_tol = 0.02;
constexpr double band = 0.08;
constexpr int repeats = 5;
constexpr std::uint64_t seed = 7;
constexpr double chance_tol = 0.1;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back((ok ? "" : "!! ") + what);
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string fmt4(double v) { return fmt("%.4f", v); }

Matrix row(std::initializer_list<double> v) {
    Matrix m(1, static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) m(0, i++) = x;
    return m;
}

bool close(const Matrix& a, const Matrix& b, double tol = exact_tol) {
    return same_shape(a, b) && (a - b).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// 1

Outcome exactness() {
    Outcome o;
    const Matrix x = row({0.4, 0.6});
    const Matrix g = row({0.9, 0.1});
    const Matrix z = row({0.0, 0.0});

    o.check(close(models::compose_imputation(x, row({1, 0}), g), row({0.4, 0.1})), "compose mixed mask");
    o.check(close(models::compose_imputation(x, row({1, 1}), g), x), "compose all observed");
    o.check(close(models::compose_imputation(x, row({0, 0}), g), g), "compose all missing");

    o.check(close(augment::build_augmented(x, row({1, 0}), z), row({0.4, 0.0})), "augmented (0.4, 0)");
    o.check(close(augment::build_augmented(x, row({1, 1}), z), x), "augmented keeps x_G");
    const Matrix z2 = row({0.004, 0.009});
    o.check(close(augment::build_augmented(x, row({0, 0}), z2), z2), "augmented all noise");

    const Matrix xg = row({0.5, 0.3});
    const Matrix xm = row({0.7, 0.3});
    o.check(std::abs(augment::aug_loss(xg, xm, row({0, 1}), row({1, 1})) - 0.04) <= exact_tol, "L_aug 0.04");
    o.check(augment::aug_loss(xg, xm, row({1, 1}), row({1, 1})) == 0.0, "L_aug empty support");
    o.check(augment::aug_loss(xm, xm, row({0, 0}), row({1, 1})) == 0.0, "L_aug exact reconstruction");
    o.check(augment::aug_loss(xg, xm, row({0, 1}), row({0, 1})) == 0.0, "L_aug raw-missing excluded");

    // Tape versions agree with the plain ones.
    Tape t;
    o.check(close(models::compose_imputation(t.constant(x), row({1, 0}), t.constant(g)).value(),
                  row({0.4, 0.1})),
            "compose on tape");
    o.check(close(augment::build_augmented(t.constant(x), row({1, 0}), z).value(), row({0.4, 0.0})),
            "augmented on tape");
    o.check(std::abs(augment::aug_loss(t.constant(xg), xm, row({0, 1}), row({1, 1})).scalar() - 0.04) <=
                exact_tol,
            "L_aug on tape");

    // Second-pass composition keeps unhidden entries.
    Rng init(1);
    auto model = models::make_model(models::ModelKind::dae, 2, init);
    o.check(close(augment::augmented_impute(*model, x, row({1, 1})), x, 0.0), "x~_G = x~_m when nothing hidden");
    const Matrix second = augment::augmented_impute(*model, x, row({1, 0}));
    o.check(second(0, 0) == 0.4 && second(0, 1) >= 0.0 && second(0, 1) <= 1.0, "x~_G keeps unhidden entry");
    return o;
}

// ---------------------------------------------------------------------------
// 2

Outcome artificial_mask_stats() {
    Outcome o;
    Rng rng(derive_seed(seed, "acceptance.artificial"));
    const int d = 10;
    for (double frac : {0.1, 0.5, 0.9}) {
        std::vector<double> m(d, 0.0);
        for (int i = 0; i < static_cast<int>(frac * d + 0.5); ++i) m[static_cast<std::size_t>(i)] = 1.0;
        double kept = 0.0;
        for (int k = 0; k < artificial_draws; ++k)
            for (double v : augment::sample_artificial_mask(m, rng)) kept += v;
        const double rate = kept / (static_cast<double>(artificial_draws) * d);
        o.check(std::abs(rate - frac) <= artificial_rate_tol,
                "observed " + fmt("%.1f", frac) + ": keep rate " + fmt4(rate));
    }
    return o;
}

// ---------------------------------------------------------------------------
// 3

using misa::testing::check_gradients;
using misa::testing::random_away_from_zero;
using misa::testing::random_matrix;

Outcome gradient_correctness() {
    Outcome o;
    Rng rng(derive_seed(seed, "acceptance.gradients"));
    Parameter a("a", random_matrix(3, 4, rng));
    Parameter b("b", random_matrix(4, 2, rng));
    Parameter c("c", random_matrix(3, 4, rng));
    Parameter r("r", random_matrix(1, 4, rng));
    Parameter k("k", random_away_from_zero(3, 4, rng));
    Parameter p("p", random_matrix(3, 4, rng, 0.05, 0.95));
    const Matrix w34 = random_matrix(3, 4, rng);
    const Matrix w32 = random_matrix(3, 2, rng);
    const Matrix w38 = random_matrix(3, 8, rng);
    const Matrix target = misa::testing::random_mask(3, 4, rng);
    const Matrix weight = misa::testing::random_mask(3, 4, rng);
    const std::vector<int> labels{0, 3, 1};

    // Each op is reduced to a scalar through a fixed random projection.
    auto project = [](Tape& t, Var v, const Matrix& w) { return grad::sum(grad::mul(v, t.constant(w))); };
    struct Case {
        std::string name;
        std::vector<Parameter*> params;
        std::function<Var(Tape&)> loss;
    };
    const std::vector<Case> cases{
        {"matmul", {&a, &b}, [&](Tape& t) { return project(t, grad::matmul(t.param(a), t.param(b)), w32); }},
        {"add", {&a, &c}, [&](Tape& t) { return project(t, grad::add(t.param(a), t.param(c)), w34); }},
        {"sub", {&a, &c}, [&](Tape& t) { return project(t, grad::sub(t.param(a), t.param(c)), w34); }},
        {"mul", {&a, &c}, [&](Tape& t) { return project(t, grad::mul(t.param(a), t.param(c)), w34); }},
        {"add_row", {&a, &r}, [&](Tape& t) { return project(t, grad::add_row(t.param(a), t.param(r)), w34); }},
        {"scale", {&a}, [&](Tape& t) { return project(t, grad::scale(t.param(a), -2.5), w34); }},
        {"sigmoid", {&a}, [&](Tape& t) { return project(t, grad::sigmoid(t.param(a)), w34); }},
        {"tanh", {&a}, [&](Tape& t) { return project(t, grad::tanh(t.param(a)), w34); }},
        {"relu", {&k}, [&](Tape& t) { return project(t, grad::relu(t.param(k)), w34); }},
        {"square", {&a}, [&](Tape& t) { return project(t, grad::square(t.param(a)), w34); }},
        {"concat_cols", {&a, &c}, [&](Tape& t) { return project(t, grad::concat_cols(t.param(a), t.param(c)), w38); }},
        {"sum", {&a}, [&](Tape& t) { return grad::scale(grad::sum(t.param(a)), 1.7); }},
        {"sum_squares", {&a}, [&](Tape& t) { return grad::sum_squares(t.param(a)); }},
        {"bce", {&p}, [&](Tape& t) { return grad::bce_loss(t.param(p), target, weight); }},
        {"softmax_ce", {&a}, [&](Tape& t) { return grad::softmax_cross_entropy(t.param(a), labels); }},
    };
    for (const auto& cs : cases) {
        const auto res = check_gradients(cs.params, cs.loss, fd_step);
        o.check(res.checked > 0 && res.worst_rel <= fd_rel_tol,
                cs.name + ": " + std::to_string(res.checked) + " entries, worst rel " + fmt("%.1e", res.worst_rel) + (res.worst_where.empty() ? "" : " at " + res.worst_where));
    }

    // Full model objectives on a random small batch.
    models::Batch batch{random_matrix(6, 3, rng, 0.0, 1.0), misa::testing::random_mask(6, 3, rng, 0.7)};
    for (Eigen::Index i = 0; i < batch.m.rows(); ++i) batch.m(i, 0) = 1.0;
    for (auto kind : {models::ModelKind::dae, models::ModelKind::gain}) {
        Rng init(derive_seed(seed, "acceptance.model", static_cast<std::uint64_t>(kind)));
        auto model = models::make_model(kind, 3, init);
        auto loss = [&](Tape& t) {
            Rng obj(99);
            return model->original_objective(t, batch, obj, {.update_auxiliary = false}).loss;
        };
        const auto res = check_gradients(model->generator_parameters(), loss, fd_step);
        o.check(res.worst_rel <= fd_rel_tol,
                std::string(models::model_name(kind)) + " generator loss rel " + fmt("%.1e", res.worst_rel));

        // The hybrid objective with augmentation on top. x_G stays attached
        // here: under the default stop-gradient a parameter perturbation
        // also moves the constant x_G, which finite differences would see.
        auto hybrid = [&](Tape& t) {
            Rng obj(99), aug(100);
            auto objective = model->original_objective(t, batch, obj, {.update_auxiliary = false, .need_imputed = true});
            const MaskMatrix mt = augment::sample_artificial_mask(batch.m, aug);
            Rng fill(101);
            const Matrix z = mask::fill_missing(Matrix::Zero(6, 3), mt, model->fill_kind(), fill);
            Var xt = augment::build_augmented(*objective.imputed, mt, z);
            Var l_aug = augment::aug_loss(augment::augmented_impute(*model, xt, mt), batch.x, mt, batch.m);
            return grad::add(objective.loss, grad::scale(l_aug, 5.0));
        };
        const auto hres = check_gradients(model->generator_parameters(), hybrid, fd_step);
        o.check(hres.worst_rel <= fd_rel_tol,
                std::string(models::model_name(kind)) + " hybrid loss rel " + fmt("%.1e", hres.worst_rel));
    }
    Rng init(5);
    models::GainImputer gain(3, init);
    const Matrix hint = models::gain_hint(batch.m, 0.9, rng);
    auto d_loss = [&](Tape& t) {
        Var d = gain.discriminate(t, t.constant(batch.x), t.constant(hint));
        return models::gain_discriminator_loss(d, batch.m, hint);
    };
    const auto dres = check_gradients(gain.discriminator().parameters(), d_loss, fd_step);
    o.check(dres.worst_rel <= fd_rel_tol, "gain discriminator loss rel " + fmt("%.1e", dres.worst_rel));
    return o;
}

// ---------------------------------------------------------------------------
// Shared data

data::Dataset load(const std::string& name) {
    const fs::path dir = misa::testing::data_dir();
    return data::load_csv(dir / (name + ".csv"), data::load_schema(dir / (name + ".schema.json")));
}

// ---------------------------------------------------------------------------
// 4

using Trajectory = std::vector<std::vector<Matrix>>;

Trajectory trajectory(models::ModelKind kind, const Matrix& x, const MaskMatrix& m, bool misa_on) {
    Rng init(derive_seed(seed, "acceptance.alpha0.init"));
    auto model = models::make_model(kind, static_cast<int>(x.cols()), init);
    augment::TrainPlan plan;
    plan.epochs = 10;
    plan.seed = derive_seed(seed, "acceptance.alpha0.train");
    Trajectory out;
    augment::train(*model, x, m, plan, augment::MisaConfig{misa_on, 0.0},
                   [&](int, int, const models::GeneratorModel& mdl) {
                       std::vector<Matrix> snap;
                       for (const auto& [name, net] : mdl.networks())
                           for (const auto* p : net->parameters()) snap.push_back(p->value);
                       out.push_back(std::move(snap));
                   });
    return out;
}

Outcome alpha_zero() {
    Outcome o;
    const data::Dataset ds = load("wine");
    const Matrix x = data::apply_scale(ds.features, data::fit_scale(ds.features));
    Rng mrng(derive_seed(seed, "acceptance.alpha0.mask"));
    const MaskMatrix m = mask::mcar_mask(x.rows(), x.cols(), 0.5, mrng);
    const Matrix xm = x.cwiseProduct(m);
    for (auto kind : {models::ModelKind::dae, models::ModelKind::gain}) {
        const Trajectory off = trajectory(kind, xm, m, false);
        const Trajectory on = trajectory(kind, xm, m, true);
        o.check(!off.empty() && off == on,
                std::string(models::model_name(kind)) + ": " + std::to_string(off.size()) +
                    " steps bit-identical");
    }
    return o;
}

// ---------------------------------------------------------------------------
// 5

Outcome mechanism_calibration() {
    Outcome o;
    Rng rng(derive_seed(seed, "acceptance.mcar"));
    const double f = mask::missing_fraction(mask::mcar_mask(1000, 100, 0.5, rng));
    o.check(std::abs(f - 0.5) <= mcar_tol, "MCAR rate " + fmt4(f));

    Rng xr(derive_seed(seed, "acceptance.table"));
    const Matrix x = random_matrix(5000, 10, xr, 0.0, 1.0);
    for (auto kind : {mask::Mechanism::mar, mask::Mechanism::mnar}) {
        const mask::MechanismSpec spec{kind, 0.4, 0.3, std::nullopt, derive_seed(seed, "acceptance.logistic")};
        const auto det = kind == mask::Mechanism::mar ? mask::mar_mask_detail(x, spec)
                                                      : mask::mnar_mask_detail(x, spec);
        double missing = 0.0;
        for (auto c : det.maskable_columns) missing += static_cast<double>(x.rows()) - det.mask.col(c).sum();
        const double rate = missing / static_cast<double>(x.rows() * static_cast<Eigen::Index>(det.maskable_columns.size()));
        o.check(std::abs(rate - 0.4) <= logistic_tol,
                std::string(mask::mechanism_name(kind)) + " maskable rate " + fmt4(rate));
        if (kind == mask::Mechanism::mar) {
            double o_missing = 0.0;
            for (auto c : det.input_columns) o_missing += static_cast<double>(x.rows()) - det.mask.col(c).sum();
            o.check(o_missing == 0.0 && det.input_columns.size() == 3,
                    "MAR never-missing columns: " + fmt("%.0f", o_missing) + " missing");
        }
    }
    return o;
}

// ---------------------------------------------------------------------------
// Experiments shared by 6-9, cached by (dataset, model, misa, alpha, rate).

struct Key {
    std::string dataset;
    models::ModelKind model;
    bool misa;
    double alpha;
    double rate;
    bool accuracy;
    auto operator<=>(const Key&) const = default;
};

std::map<Key, metrics::ScoreReport> cache;

const metrics::ScoreReport& experiment(const std::string& dataset, models::ModelKind model, bool misa_on,
                                       std::optional<double> alpha = std::nullopt, double rate = 0.5,
                                       bool accuracy = false) {
    harness::ExperimentConfig c;
    c.dataset = misa::testing::data_dir() / (dataset + ".csv");
    c.schema = misa::testing::data_dir() / (dataset + ".schema.json");
    c.model = model;
    c.rate = rate;
    c.misa = misa_on;
    c.alpha = alpha;
    c.repeats = repeats;
    c.seed = seed;
    c.accuracy = accuracy;
    const Key key{dataset, model, misa_on, misa_on ? c.effective_alpha() : 0.0, rate, accuracy};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    auto r = harness::evaluate(c);
    std::fprintf(stderr, "  [run] %s %s%s alpha %g rate %.1f: rmse %.4f (%.0f s)\n", dataset.c_str(),
                 models::model_name(model), misa_on ? "+" : "", key.alpha, rate, r.report.rmse.mean,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return cache.emplace(key, std::move(r.report)).first->second;
}

// ---------------------------------------------------------------------------
// 6

struct Published {
    double base;
    double plus;
};

Outcome desk_reproduction() {
    Outcome o;
    const std::map<std::pair<std::string, models::ModelKind>, Published> table{
        {{"wine", models::ModelKind::dae}, {0.2110, 0.2015}},
        {{"sonar", models::ModelKind::dae}, {0.2028, 0.1919}},
        {{"ionosphere", models::ModelKind::dae}, {0.2476, 0.2410}},
        {{"wine", models::ModelKind::gain}, {0.2476, 0.2170}},
        {{"sonar", models::ModelKind::gain}, {0.3035, 0.2480}},
        {{"ionosphere", models::ModelKind::gain}, {0.2941, 0.2509}},
    };
    for (auto kind : {models::ModelKind::dae, models::ModelKind::gain}) {
        int improved = 0;
        for (const std::string ds : {"wine", "sonar", "ionosphere"}) {
            const double base = experiment(ds, kind, false).rmse.mean;
            const double plus = experiment(ds, kind, true).rmse.mean;
            const Published pub = table.at({ds, kind});
            if (plus < base) ++improved;
            const std::string name = ds + " " + models::model_name(kind);
            o.check(std::abs(base - pub.base) <= band,
                    name + " " + fmt4(base) + " vs published " + fmt4(pub.base));
            o.check(std::abs(plus - pub.plus) <= band,
                    name + "+ " + fmt4(plus) + " vs published " + fmt4(pub.plus));
            o.notes.push_back("   " + name + (plus < base ? " improved" : " not improved"));
        }
        o.check(improved >= 2, std::string(models::model_name(kind)) + " improved on " +
                                   std::to_string(improved) + "/3 datasets");
    }
    return o;
}

// ---------------------------------------------------------------------------
// 7

Outcome alpha_sensitivity() {
    Outcome o;
    const double base = experiment("wine", models::ModelKind::gain, false).rmse.mean;
    for (double a : {10.0, 50.0, 100.0, 200.0}) {
        const double plus = experiment("wine", models::ModelKind::gain, true, a).rmse.mean;
        o.check(plus < base, "alpha " + fmt("%g", a) + ": " + fmt4(plus) + " vs baseline " + fmt4(base));
    }
    return o;
}

// ---------------------------------------------------------------------------
// 8

Outcome missing_rate_trend() {
    Outcome o;
    std::map<double, double> gain;
    for (double rate : {0.2, 0.4, 0.6, 0.8}) {
        const double base = experiment("wine", models::ModelKind::gain, false, std::nullopt, rate).rmse.mean;
        const double plus = experiment("wine", models::ModelKind::gain, true, std::nullopt, rate).rmse.mean;
        gain[rate] = base - plus;
        o.check(base - plus >= 0.0, "rate " + fmt("%.1f", rate) + ": " + fmt4(base) + " -> " + fmt4(plus));
    }
    o.check(gain[0.8] > gain[0.2],
            "improvement at 0.8 (" + fmt4(gain[0.8]) + ") exceeds 0.2 (" + fmt4(gain[0.2]) + ")");
    return o;
}

// ---------------------------------------------------------------------------
// 9

Outcome post_imputation_utility() {
    Outcome o;
    const auto& base = experiment("abalone", models::ModelKind::gain, false, std::nullopt, 0.5, true);
    const auto& plus = experiment("abalone", models::ModelKind::gain, true, std::nullopt, 0.5, true);
    const double a = base.accuracy->mean;
    const double b = plus.accuracy->mean;
    o.check(b >= a, "accuracy gain " + fmt4(a) + " -> gain+ " + fmt4(b) + " (" +
                        std::to_string(base.accuracy_per_repeat.size()) + " seeds)");

    Rng rng(derive_seed(seed, "acceptance.oracles"));
    // Separable: two tight clusters.
    auto blobs = [&](Eigen::Index n, Matrix& x, std::vector<int>& y) {
        x.resize(n, 4);
        y.resize(static_cast<std::size_t>(n));
        for (Eigen::Index r = 0; r < n; ++r) {
            const int c = static_cast<int>(r % 2);
            y[static_cast<std::size_t>(r)] = c;
            for (Eigen::Index j = 0; j < 4; ++j) x(r, j) = (c ? 0.8 : 0.2) + 0.05 * standard_normal(rng);
        }
    };
    Matrix tx, vx;
    std::vector<int> ty, vy;
    blobs(200, tx, ty);
    blobs(100, vx, vy);
    const double sep = metrics::post_impute_accuracy(tx, ty, vx, vy, seed);
    o.check(sep == 1.0, "separable oracle " + fmt4(sep));

    // Chance: balanced labels shuffled independently of the features.
    const Eigen::Index n = 900;
    const Matrix x = random_matrix(n, 6, rng, 0.0, 1.0);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 3);
    for (std::size_t i = y.size(); i > 1; --i)
        std::swap(y[i - 1], y[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i))]);
    metrics::ClassifierPlan plan;
    plan.epochs = 50;
    const double chance = metrics::post_impute_accuracy(
        x.topRows(600), std::vector<int>(y.begin(), y.begin() + 600), x.bottomRows(300),
        std::vector<int>(y.begin() + 600, y.end()), seed, plan);
    o.check(std::abs(chance - 1.0 / 3.0) <= chance_tol, "chance oracle " + fmt4(chance));
    return o;
}

// ---------------------------------------------------------------------------
// 10

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string without_timing(const fs::path& p) {
    auto j = nlohmann::json::parse(slurp(p));
    j.erase("timing");
    return j.dump();
}

Outcome determinism_and_persistence() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "misa_acceptance";
    fs::remove_all(root);
    harness::ExperimentConfig c;
    c.dataset = misa::testing::data_dir() / "wine.csv";
    c.schema = misa::testing::data_dir() / "wine.schema.json";
    c.model = models::ModelKind::gain;
    c.misa = true;
    c.epochs = 5;
    c.repeats = 2;
    c.seed = seed;
    c.out = root / "run";

    const auto first = harness::run(c);
    const std::string json_a = without_timing(first.results_file);
    const std::string losses_a = slurp(first.losses_file);
    const auto second = harness::run(c);
    o.check(json_a == without_timing(second.results_file), "results.json identical apart from timing");
    o.check(losses_a == slurp(second.losses_file), "losses.csv identical");

    // A directory squatting on results.json makes the final rename fail.
    harness::ExperimentConfig broken = c;
    broken.out = root / "broken";
    fs::create_directories(broken.out / "results.json");
    std::string stage;
    try {
        harness::run(broken);
    } catch (const stage_error& e) {
        stage = e.stage();
    }
    o.check(stage == "write", "failed write reported at stage '" + stage + "'");
    bool leftovers = false;
    for (const auto& e : fs::directory_iterator(broken.out))
        if (e.path().filename() != "results.json") leftovers = true;
    o.check(!leftovers && fs::is_directory(broken.out / "results.json"), "no partial output left behind");
    fs::remove_all(root);
    return o;
}

struct Criterion {
    int id;
    const char* name;
    Outcome (*fn)();
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "exactness of the composition, augmentation and loss rules", exactness},
        {2, "artificial mask statistics", artificial_mask_stats},
        {3, "gradient correctness", gradient_correctness},
        {4, "alpha = 0 degeneracy", alpha_zero},
        {5, "mechanism calibration", mechanism_calibration},
        {6, "desk-scale reproduction", desk_reproduction},
        {7, "alpha sensitivity trend", alpha_sensitivity},
        {8, "missing-rate trend", missing_rate_trend},
        {9, "post-imputation utility", post_imputation_utility},
        {10, "determinism and persistence", determinism_and_persistence},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s  %2d  %s  (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs);
        for (const auto& n : o.notes) std::printf("        %s\n", n.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    std::printf("%d failed\n", failures);
    return failures == 0 ? 0 : 1;
}
