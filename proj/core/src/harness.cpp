#include "misa/harness.hpp"

#include "misa/error.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#ifndef MISA_VERSION
#define MISA_VERSION "0.0.0"
#endif

namespace misa::harness {

using nlohmann::json;

namespace {

const std::set<std::string> known_keys = {
    "dataset", "schema",  "model", "mechanism", "rate",       "observed_fraction",
    "misa",    "alpha",   "backprop_through_imputation",       "repeats", "folds",
    "seed",    "epochs",  "batch_size", "learning_rate",     "accuracy", "out"};

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(std::string("config key '") + key + "': " + e.what());
    }
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw load_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

json summary_json(const metrics::Summary& s) {
    return json{{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
}

} // namespace

void ExperimentConfig::validate() const {
    if (dataset.empty()) throw config_error("config: dataset path is required");
    if (!fs::exists(dataset)) throw config_error("config: dataset not found: " + dataset.string());
    if (!schema.empty() && !fs::exists(schema))
        throw config_error("config: schema not found: " + schema.string());
    if (repeats < 1) throw config_error("config: repeats must be >= 1");
    if (folds < 2) throw config_error("config: folds must be >= 2");
    if (alpha && (!(*alpha >= 0.0) || !std::isfinite(*alpha)))
        throw config_error("config: alpha must be >= 0");
    if (epochs && *epochs < 1) throw config_error("config: epochs must be >= 1");
    if (batch_size < 1) throw config_error("config: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw config_error("config: learning_rate must be > 0");
    mask::MechanismSpec spec{mechanism, rate, observed_fraction, std::nullopt, seed};
    spec.validate();
}

double ExperimentConfig::effective_alpha() const {
    return alpha.value_or(augment::default_alpha(model));
}

metrics::CvConfig ExperimentConfig::cv_config() const {
    metrics::CvConfig cv;
    cv.model = model;
    cv.mechanism.kind = mechanism;
    cv.mechanism.target_rate = rate;
    cv.mechanism.observed_fraction = observed_fraction;
    cv.misa.enabled = misa;
    cv.misa.alpha = effective_alpha();
    cv.misa.auto_alpha = auto_alpha;
    cv.misa.backprop_through_imputation = backprop_through_imputation;
    cv.epochs = epochs;
    cv.batch_size = batch_size;
    cv.learning_rate = learning_rate;
    cv.repeats = repeats;
    cv.folds = folds;
    cv.seed = seed;
    cv.with_accuracy = accuracy;
    return cv;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known_keys.count(key)) throw config_error("config: unknown key '" + key + "'");

    ExperimentConfig c;
    c.dataset = get_or<std::string>(j, "dataset", "");
    c.schema = get_or<std::string>(j, "schema", "");
    c.model = models::parse_model(get_or<std::string>(j, "model", "gain"));
    c.mechanism = mask::parse_mechanism(get_or<std::string>(j, "mechanism", "mcar"));
    c.rate = get_or(j, "rate", c.rate);
    c.observed_fraction = get_or(j, "observed_fraction", c.observed_fraction);
    c.misa = get_or(j, "misa", false);
    if (j.contains("alpha") && !j.at("alpha").is_null()) {
        const json& a = j.at("alpha");
        if (a.is_string()) {
            if (a.get<std::string>() != "auto")
                throw config_error("config: alpha must be a number or \"auto\"");
            c.auto_alpha = true;
        } else if (a.is_number()) {
            c.alpha = a.get<double>();
        } else {
            throw config_error("config: alpha must be a number or \"auto\"");
        }
    }
    c.backprop_through_imputation = get_or(j, "backprop_through_imputation", false);
    c.repeats = get_or(j, "repeats", c.repeats);
    c.folds = get_or(j, "folds", c.folds);
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    if (j.contains("epochs") && !j.at("epochs").is_null()) c.epochs = get_or(j, "epochs", 0);
    c.batch_size = get_or(j, "batch_size", c.batch_size);
    c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
    c.accuracy = get_or(j, "accuracy", false);
    c.out = get_or<std::string>(j, "out", "runs");
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    try {
        return parse_config(read_file(path));
    } catch (const load_error& e) {
        throw config_error(e.what());
    }
}

namespace {

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["dataset"] = c.dataset.generic_string();
    j["schema"] = c.schema.generic_string();
    j["model"] = models::model_name(c.model);
    j["mechanism"] = mask::mechanism_name(c.mechanism);
    j["rate"] = c.rate;
    j["observed_fraction"] = c.observed_fraction;
    j["misa"] = c.misa;
    if (c.auto_alpha)
        j["alpha"] = "auto";
    else if (c.alpha)
        j["alpha"] = *c.alpha;
    else
        j["alpha"] = nullptr;
    j["backprop_through_imputation"] = c.backprop_through_imputation;
    j["repeats"] = c.repeats;
    j["folds"] = c.folds;
    j["seed"] = c.seed;
    j["epochs"] = c.epochs ? json(*c.epochs) : json(nullptr);
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["accuracy"] = c.accuracy;
    j["out"] = c.out.generic_string();
    return j;
}

} // namespace

std::string config_json(const ExperimentConfig& cfg) {
    return config_to_json(cfg).dump(2);
}

std::string run_id(const ExperimentConfig& cfg) {
    // "out" does not change the numbers, so it stays out of the identity.
    json j = config_to_json(cfg);
    j.erase("out");
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentResult evaluate(const ExperimentConfig& cfg) {
    std::string current = "config";
    const auto t0 = std::chrono::steady_clock::now();
    try {
        cfg.validate();
        current = "load";
        const data::Schema schema = cfg.schema.empty() ? data::Schema{} : data::load_schema(cfg.schema);
        const data::Dataset ds = data::load_csv(cfg.dataset, schema);
        metrics::CvConfig cv = cfg.cv_config();
        cv.on_stage = [&](const char* s) { current = s; };
        ExperimentResult r;
        r.config = cfg;
        r.report = metrics::cross_validated_run(ds, cv);
        r.run_id = run_id(cfg);
        r.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    } catch (const stage_error&) {
        throw;
    } catch (const std::exception& e) {
        throw stage_error(current, e.what());
    }
}

std::string results_json(const ExperimentResult& r) {
    const auto& rep = r.report;
    json j;
    j["run_id"] = r.run_id;
    j["version"] = MISA_VERSION;
    j["config"] = config_to_json(r.config);
    json score;
    score["rmse"] = summary_json(rep.rmse);
    score["rmse_per_repeat"] = rep.rmse_per_repeat;
    score["rmse_per_fold"] = rep.rmse_per_fold;
    if (rep.accuracy) {
        score["accuracy"] = summary_json(*rep.accuracy);
        score["accuracy_per_repeat"] = rep.accuracy_per_repeat;
        score["accuracy_per_fold"] = rep.accuracy_per_fold;
    } else {
        score["accuracy"] = nullptr;
    }
    score["alpha_per_fold"] = rep.alpha_per_fold;
    score["repeats"] = rep.repeats;
    score["folds"] = rep.folds;
    j["score"] = score;
    j["artifacts"] = {{"losses", "losses.csv"}};
    std::ostringstream wall;
    wall << std::fixed << std::setprecision(3) << r.wall_seconds;
    j["timing"] = {{"wall_seconds", std::stod(wall.str())}, {"created_at", utc_now()}};
    return j.dump(2) + "\n";
}

std::string losses_csv(const std::vector<augment::EpochLoss>& curve) {
    std::string out = "epoch,l_ori,l_aug,hybrid\n";
    for (const auto& e : curve)
        out += std::to_string(e.epoch) + "," + fmt17(e.l_ori) + "," + fmt17(e.l_aug) + "," +
               fmt17(e.hybrid) + "\n";
    return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw std::runtime_error("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

ExperimentResult run(const ExperimentConfig& cfg) {
    ExperimentResult r = evaluate(cfg);
    r.results_file = cfg.out / "results.json";
    r.losses_file = cfg.out / "losses.csv";
    try {
        fs::create_directories(cfg.out);
        write_atomic(r.losses_file, losses_csv(r.report.mean_curve));
        write_atomic(r.results_file, results_json(r));
    } catch (const std::exception& e) {
        std::error_code ec;
        fs::remove(r.losses_file, ec);
        if (!fs::is_directory(r.results_file, ec)) fs::remove(r.results_file, ec);
        throw stage_error("write", e.what());
    }
    return r;
}

double improvement_pct(double baseline, double augmented) {
    if (baseline == 0.0) return 0.0;
    return (baseline - augmented) / baseline * 100.0;
}

ResultSummary read_result_summary(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
        ResultSummary s;
        s.model = j.at("config").at("model").get<std::string>();
        s.misa = j.at("config").at("misa").get<bool>();
        s.rmse_mean = j.at("score").at("rmse").at("mean").get<double>();
        s.rmse_std = j.at("score").at("rmse").at("std").get<double>();
        return s;
    } catch (const json::exception& e) {
        throw load_error(path.string() + ": not a results file: " + e.what());
    }
}

Comparison compare(const ResultSummary& baseline, const ResultSummary& augmented) {
    Comparison c;
    c.rows.push_back({baseline.model, baseline.rmse_mean, baseline.rmse_std, 0.0});
    c.rows.push_back({augmented.model + "+", augmented.rmse_mean, augmented.rmse_std,
                      improvement_pct(baseline.rmse_mean, augmented.rmse_mean)});
    return c;
}

Comparison compare(const fs::path& baseline_results, const fs::path& augmented_results) {
    return compare(read_result_summary(baseline_results), read_result_summary(augmented_results));
}

std::string comparison_csv(const Comparison& cmp) {
    std::string out = "model,rmse_mean,rmse_std,improvement_pct\n";
    for (const auto& r : cmp.rows)
        out += r.label + "," + fmt17(r.rmse_mean) + "," + fmt17(r.rmse_std) + "," +
               fmt17(r.improvement_pct) + "\n";
    return out;
}

Comparison parse_comparison_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "model,rmse_mean,rmse_std,improvement_pct")
        throw load_error("comparison csv: unexpected header");
    Comparison c;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string label, mean, sd, imp;
        if (!std::getline(ls, label, ',') || !std::getline(ls, mean, ',') ||
            !std::getline(ls, sd, ',') || !std::getline(ls, imp))
            throw load_error("comparison csv: malformed row '" + line + "'");
        try {
            c.rows.push_back({label, std::stod(mean), std::stod(sd), std::stod(imp)});
        } catch (const std::exception&) {
            throw load_error("comparison csv: bad number in '" + line + "'");
        }
    }
    return c;
}

namespace {

SweepRow sweep_row(const ExperimentResult& r, std::string label, double alpha) {
    return {std::move(label), alpha, r.config.rate, r.report.rmse.mean, r.report.rmse.std,
            r.config.seed};
}

} // namespace

SweepTable sweep_alpha(const ExperimentConfig& cfg, const std::vector<double>& alphas) {
    SweepTable t;
    ExperimentConfig base = cfg;
    base.misa = false;
    base.auto_alpha = false;
    base.out = cfg.out / "baseline";
    t.rows.push_back(sweep_row(run(base), "baseline", 0.0));
    for (double a : alphas) {
        ExperimentConfig c = cfg;
        c.misa = true;
        c.auto_alpha = false;
        c.alpha = a;
        c.out = cfg.out / ("alpha_" + fmt17(a));
        t.rows.push_back(sweep_row(run(c), fmt17(a), a));
    }
    return t;
}

SweepTable sweep_rate(const ExperimentConfig& cfg, const std::vector<double>& rates) {
    SweepTable t;
    for (double rate : rates) {
        ExperimentConfig base = cfg;
        base.rate = rate;
        base.misa = false;
        base.out = cfg.out / ("rate_" + fmt17(rate) + "_baseline");
        t.rows.push_back(sweep_row(run(base), "baseline", 0.0));
        ExperimentConfig aug = cfg;
        aug.rate = rate;
        aug.misa = true;
        aug.out = cfg.out / ("rate_" + fmt17(rate) + "_misa");
        const ExperimentResult r = run(aug);
        const double used = r.report.alpha_per_fold.empty() ? aug.effective_alpha()
                                                            : r.report.alpha_per_fold.front();
        t.rows.push_back(sweep_row(r, "misa", used));
    }
    return t;
}

std::string sweep_csv(const SweepTable& table) {
    std::string out = "label,alpha,rate,rmse_mean,rmse_std,seed\n";
    for (const auto& r : table.rows)
        out += r.label + "," + fmt17(r.alpha) + "," + fmt17(r.rate) + "," + fmt17(r.rmse_mean) +
               "," + fmt17(r.rmse_std) + "," + std::to_string(r.seed) + "\n";
    return out;
}

} // namespace misa::harness
