// misa: run, compare and sweep imputation experiments.
//
//   misa run --dataset data/wine.csv --schema data/wine.schema.json \
//            --model gain --misa on --repeats 5 --out runs/wine_gain_plus
//   misa compare --baseline runs/a/results.json --augmented runs/b/results.json --out runs
//   misa sweep-alpha --config wine.json --alphas 10,50,100,200
//   misa sweep-rate --config wine.json --rates 0.2,0.4,0.6,0.8

#include "misa/error.hpp"
#include "misa/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace misa;
namespace fs = std::filesystem;

struct Overrides {
    std::string config;
    std::string dataset;
    std::string schema;
    std::string model;
    std::string mechanism;
    std::optional<double> rate;
    std::string alpha;
    std::string misa;
    std::optional<int> repeats;
    std::optional<int> folds;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    bool accuracy = false;
    std::string out;
};

void add_experiment_flags(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "Flat JSON experiment config")->check(CLI::ExistingFile);
    app->add_option("--dataset", o.dataset, "CSV data file");
    app->add_option("--schema", o.schema, "Schema JSON (label and categorical columns)");
    app->add_option("--model", o.model, "dae or gain")->check(CLI::IsMember({"dae", "gain"}));
    app->add_option("--mechanism", o.mechanism, "mcar, mar or mnar")
        ->check(CLI::IsMember({"mcar", "mar", "mnar"}));
    app->add_option("--rate", o.rate, "Target missing rate");
    app->add_option("--alpha", o.alpha, "Augmentation weight or 'auto'");
    app->add_option("--misa", o.misa, "on or off")->check(CLI::IsMember({"on", "off"}));
    app->add_option("--repeats", o.repeats, "Repeats of the whole CV run");
    app->add_option("--folds", o.folds, "Cross-validation folds");
    app->add_option("--seed", o.seed, "Master seed");
    app->add_option("--epochs", o.epochs, "Override the epoch budget");
    app->add_flag("--accuracy", o.accuracy, "Also score post-imputation classification accuracy");
    app->add_option("--out", o.out, "Output directory");
}

harness::ExperimentConfig build_config(const Overrides& o) {
    harness::ExperimentConfig c = o.config.empty() ? harness::ExperimentConfig{}
                                                   : harness::load_config(o.config);
    if (!o.dataset.empty()) c.dataset = o.dataset;
    if (!o.schema.empty()) c.schema = o.schema;
    if (!o.model.empty()) c.model = models::parse_model(o.model);
    if (!o.mechanism.empty()) c.mechanism = mask::parse_mechanism(o.mechanism);
    if (o.rate) c.rate = *o.rate;
    if (!o.alpha.empty()) {
        if (o.alpha == "auto") {
            c.auto_alpha = true;
            c.alpha.reset();
        } else {
            try {
                c.alpha = std::stod(o.alpha);
            } catch (const std::exception&) {
                throw config_error("--alpha must be a number or 'auto', got '" + o.alpha + "'");
            }
            c.auto_alpha = false;
        }
    }
    if (!o.misa.empty()) c.misa = o.misa == "on";
    if (o.repeats) c.repeats = *o.repeats;
    if (o.folds) c.folds = *o.folds;
    if (o.seed) c.seed = *o.seed;
    if (o.epochs) c.epochs = *o.epochs;
    if (o.accuracy) c.accuracy = true;
    if (!o.out.empty()) c.out = o.out;
    c.validate();
    return c;
}

void print_result(const harness::ExperimentResult& r) {
    const auto& rep = r.report;
    std::printf("run %s  rmse %.4f +/- %.4f", r.run_id.c_str(), rep.rmse.mean, rep.rmse.std);
    if (rep.accuracy) std::printf("  accuracy %.4f +/- %.4f", rep.accuracy->mean, rep.accuracy->std);
    std::printf("  (%.1f s)\n  %s\n  %s\n", r.wall_seconds, r.results_file.c_str(), r.losses_file.c_str());
}

void write_table(const fs::path& dir, const std::string& name, const std::string& body) {
    fs::create_directories(dir);
    harness::write_atomic(dir / name, body);
    std::cout << body << "  -> " << (dir / name).string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Missingness augmentation experiments for DAE and GAIN imputers"};
    app.require_subcommand(1);

    Overrides run_o;
    auto* run_cmd = app.add_subcommand("run", "Cross-validated imputation run");
    add_experiment_flags(run_cmd, run_o);

    std::string baseline_path;
    std::string augmented_path;
    std::string compare_out = ".";
    auto* cmp_cmd = app.add_subcommand("compare", "Compare a baseline and an augmented results.json");
    cmp_cmd->add_option("--baseline", baseline_path, "Baseline results.json")
        ->required()
        ->check(CLI::ExistingFile);
    cmp_cmd->add_option("--augmented", augmented_path, "Augmented results.json")
        ->required()
        ->check(CLI::ExistingFile);
    cmp_cmd->add_option("--out", compare_out, "Directory for comparison.csv");

    Overrides alpha_o;
    std::vector<double> alphas;
    auto* sa_cmd = app.add_subcommand("sweep-alpha", "Baseline plus one augmented run per alpha");
    add_experiment_flags(sa_cmd, alpha_o);
    sa_cmd->add_option("--alphas", alphas, "Comma separated alpha values")->delimiter(',');

    Overrides rate_o;
    std::vector<double> rates{0.2, 0.4, 0.6, 0.8};
    auto* sr_cmd = app.add_subcommand("sweep-rate", "Baseline and augmented run per missing rate");
    add_experiment_flags(sr_cmd, rate_o);
    sr_cmd->add_option("--rates", rates, "Comma separated missing rates")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            print_result(harness::run(build_config(run_o)));
        } else if (*cmp_cmd) {
            const auto cmp = harness::compare(fs::path(baseline_path), fs::path(augmented_path));
            write_table(compare_out, "comparison.csv", harness::comparison_csv(cmp));
        } else if (*sa_cmd) {
            const auto cfg = build_config(alpha_o);
            write_table(cfg.out, "sweep_alpha.csv", harness::sweep_csv(harness::sweep_alpha(cfg, alphas)));
        } else if (*sr_cmd) {
            const auto cfg = build_config(rate_o);
            write_table(cfg.out, "sweep_rate.csv", harness::sweep_csv(harness::sweep_rate(cfg, rates)));
        }
    } catch (const stage_error& e) {
        std::cerr << "misa: failed in stage '" << e.stage() << "': " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "misa: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
