#include "misa/models.hpp"

#include "misa/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace misa::models {

using grad::Tape;
using grad::Var;

const char* model_name(ModelKind k) {
    return k == ModelKind::dae ? "dae" : "gain";
}

ModelKind parse_model(const std::string& name) {
    if (name == "dae" || name == "DAE") return ModelKind::dae;
    if (name == "gain" || name == "GAIN") return ModelKind::gain;
    throw config_error("unknown model '" + name + "'");
}

Matrix compose_imputation(const Matrix& x_m, const MaskMatrix& m, const Matrix& g_out) {
    require_same_shape(x_m, m, "compose_imputation mask");
    require_same_shape(x_m, g_out, "compose_imputation output");
    Matrix out(x_m.rows(), x_m.cols());
    // Select instead of blending so observed entries are copied exactly.
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out.data()[i] = m.data()[i] == 1.0 ? x_m.data()[i]
                                            : (1.0 - m.data()[i]) * g_out.data()[i] +
                                                  m.data()[i] * x_m.data()[i];
    return out;
}

Var compose_imputation(Var x_m, const MaskMatrix& m, Var g_out) {
    require_same_shape(x_m.value(), m, "compose_imputation mask");
    require_same_shape(x_m.value(), g_out.value(), "compose_imputation output");
    Tape& t = *x_m.tape();
    const Matrix one_minus = (1.0 - m.array()).matrix();
    return grad::add(grad::mul(t.constant(one_minus), g_out), grad::mul(t.constant(m), x_m));
}

Var GeneratorModel::generate(Tape& tape, Var x_filled, Var m) {
    return generator().forward(tape, grad::concat_cols(x_filled, m));
}

Matrix GeneratorModel::impute_raw(const Matrix& x_filled, const MaskMatrix& m) const {
    require_same_shape(x_filled, m, "impute_raw");
    if (x_filled.cols() != width())
        throw dimension_error("impute_raw: model width " + std::to_string(width()) + ", data has " +
                              std::to_string(x_filled.cols()) + " columns");
    Matrix input(x_filled.rows(), 2 * x_filled.cols());
    input << x_filled, m;
    return generator().predict(input);
}

Matrix GeneratorModel::impute(const Matrix& x, const MaskMatrix& m, Rng& fill_rng) const {
    const Matrix filled = mask::fill_missing(x, m, fill_kind(), fill_rng);
    return compose_imputation(filled, m, impute_raw(filled, m));
}

// ---------------------------------------------------------------------------
// DAE

nn::MlpSpec dae_spec(int d) {
    return nn::MlpSpec{{2 * d, 2 * d + 7, 2 * d + 14, 2 * d + 7, d},
                       nn::Activation::tanh,
                       nn::Activation::sigmoid};
}

MaskMatrix dae_corrupt(const MaskMatrix& m, double corruption, Rng& rng) {
    if (!(corruption >= 0.0 && corruption < 1.0))
        throw config_error("dae corruption must lie in [0, 1)");
    MaskMatrix kept = m;
    for (Eigen::Index i = 0; i < kept.size(); ++i)
        if (kept.data()[i] == 1.0 && bernoulli(rng, corruption)) kept.data()[i] = 0.0;
    return kept;
}

Var dae_loss(Tape& tape, Var g_out, const Matrix& x_m, const MaskMatrix& m, const MaskMatrix& kept,
             bool reconstruct_corrupted) {
    require_same_shape(g_out.value(), x_m, "dae_loss");
    require_same_shape(m, kept, "dae_loss");
    const MaskMatrix& support = reconstruct_corrupted ? m : kept;
    const double count = support.sum();
    // Zero the target outside the support so unread entries never leak in.
    Var diff = grad::sub(g_out, tape.constant(x_m.cwiseProduct(support)));
    Var sq = grad::sum_squares(grad::mul(diff, tape.constant(support)));
    return grad::scale(sq, count > 0.0 ? 1.0 / count : 0.0);
}

DaeImputer::DaeImputer(int d, Rng& init_rng, DaeOptions options)
    : options_(options), net_(dae_spec(d), init_rng, "dae") {}

OriginalObjective DaeImputer::original_objective(Tape& tape, const Batch& batch, Rng& rng,
                                                 const ObjectiveOptions& options) {
    require_same_shape(batch.x, batch.m, "dae batch");
    const MaskMatrix kept = dae_corrupt(batch.m, options_.corruption, rng);
    Rng unused(0);
    const Matrix corrupted = mask::fill_missing(batch.x, kept, mask::FillKind::zeros, unused);
    Var g = generate(tape, tape.constant(corrupted), tape.constant(kept));

    OriginalObjective out;
    out.loss = dae_loss(tape, g, batch.x, batch.m, kept, options_.reconstruct_corrupted);
    if (options.need_imputed) {
        const Matrix clean = mask::fill_missing(batch.x, batch.m, mask::FillKind::zeros, unused);
        Var x_clean = tape.constant(clean);
        Var g_clean = generate(tape, x_clean, tape.constant(batch.m));
        out.imputed = compose_imputation(x_clean, batch.m, g_clean);
    }
    return out;
}

std::vector<std::pair<std::string, const nn::Mlp*>> DaeImputer::networks() const {
    return {{"generator", &net_}};
}

std::vector<std::pair<std::string, nn::Mlp*>> DaeImputer::networks() {
    return {{"generator", &net_}};
}

// ---------------------------------------------------------------------------
// GAIN

nn::MlpSpec gain_spec(int d) {
    return nn::MlpSpec{{2 * d, 2 * d, d, d}, nn::Activation::relu, nn::Activation::sigmoid};
}

Matrix gain_hint(const MaskMatrix& m, double hint_rate, Rng& rng) {
    if (!(hint_rate >= 0.0 && hint_rate <= 1.0)) throw config_error("hint rate must lie in [0, 1]");
    Matrix h(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < h.size(); ++i)
        h.data()[i] = bernoulli(rng, hint_rate) ? m.data()[i] : 0.5;
    return h;
}

Var gain_generator_loss(Var d_prob, Var g_out, const Matrix& x_m, const MaskMatrix& m,
                        double reconstruction_weight) {
    require_same_shape(d_prob.value(), m, "gain_generator_loss");
    require_same_shape(g_out.value(), x_m, "gain_generator_loss");
    Tape& t = *d_prob.tape();
    const Matrix missing = (1.0 - m.array()).matrix();
    Var adversarial = grad::bce_loss(d_prob, Matrix::Ones(m.rows(), m.cols()), missing);

    const double observed = m.sum();
    Var diff = grad::sub(g_out, t.constant(x_m.cwiseProduct(m)));
    Var rec = grad::sum_squares(grad::mul(diff, t.constant(m)));
    rec = grad::scale(rec, observed > 0.0 ? reconstruction_weight / observed : 0.0);
    return grad::add(adversarial, rec);
}

Var gain_discriminator_loss(Var d_prob, const MaskMatrix& m, const Matrix& hint) {
    require_same_shape(d_prob.value(), m, "gain_discriminator_loss");
    require_same_shape(hint, m, "gain_discriminator_loss hint");
    const Matrix ambiguous = (hint.array() == 0.5).cast<double>().matrix();
    return grad::bce_loss(d_prob, m, ambiguous);
}

GainImputer::GainImputer(int d, Rng& init_rng, GainOptions options)
    : options_(options),
      gen_(gain_spec(d), init_rng, "gain.generator"),
      disc_(gain_spec(d), init_rng, "gain.discriminator"),
      disc_opt_(std::make_unique<grad::Adam>(disc_.parameters(), options.discriminator_optimizer)) {}

Var GainImputer::discriminate(Tape& tape, Var x_hat, Var hint) {
    return disc_.forward(tape, grad::concat_cols(x_hat, hint));
}

double GainImputer::discriminator_step(const Matrix& x_hat, const MaskMatrix& m, const Matrix& hint) {
    Tape tape;
    Var d = discriminate(tape, tape.constant(x_hat), tape.constant(hint));
    Var loss = gain_discriminator_loss(d, m, hint);
    tape.backward(loss);
    auto params = disc_.parameters();
    grad::clip_grad_norm(params, options_.clip_norm);
    disc_opt_->step();
    last_d_loss_ = loss.scalar();
    return last_d_loss_;
}

OriginalObjective GainImputer::original_objective(Tape& tape, const Batch& batch, Rng& rng,
                                                  const ObjectiveOptions& options) {
    require_same_shape(batch.x, batch.m, "gain batch");
    const Matrix filled = mask::fill_missing(batch.x, batch.m, mask::FillKind::uniform_noise, rng);
    const Matrix hint = gain_hint(batch.m, options_.hint_rate, rng);

    if (options.update_auxiliary) {
        const Matrix x_hat = compose_imputation(filled, batch.m, impute_raw(filled, batch.m));
        discriminator_step(x_hat, batch.m, hint);
    }

    Var x = tape.constant(filled);
    Var g = generate(tape, x, tape.constant(batch.m));
    Var x_hat = compose_imputation(x, batch.m, g);
    // The discriminator's weights are recorded as leaves but only the
    // generator's optimizer consumes the gradients of this loss.
    Var d = discriminate(tape, x_hat, tape.constant(hint));

    OriginalObjective out;
    out.loss = gain_generator_loss(d, g, filled, batch.m, options_.reconstruction_weight);
    if (options.need_imputed) out.imputed = x_hat;
    return out;
}

std::vector<std::pair<std::string, const nn::Mlp*>> GainImputer::networks() const {
    return {{"generator", &gen_}, {"discriminator", &disc_}};
}

std::vector<std::pair<std::string, nn::Mlp*>> GainImputer::networks() {
    return {{"generator", &gen_}, {"discriminator", &disc_}};
}

std::unique_ptr<GeneratorModel> make_model(ModelKind kind, int d, Rng& init_rng) {
    if (d < 1) throw config_error("model width must be positive");
    if (kind == ModelKind::dae) return std::make_unique<DaeImputer>(d, init_rng);
    return std::make_unique<GainImputer>(d, init_rng);
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string checkpoint_json(const GeneratorModel& model) {
    nlohmann::json j;
    j["format"] = "misa-checkpoint";
    j["version"] = 1;
    j["model"] = model_name(model.kind());
    j["width"] = model.width();
    if (const auto* dae = dynamic_cast<const DaeImputer*>(&model)) {
        j["options"] = {{"corruption", dae->options().corruption},
                        {"reconstruct_corrupted", dae->options().reconstruct_corrupted}};
    } else if (const auto* gain = dynamic_cast<const GainImputer*>(&model)) {
        j["options"] = {{"hint_rate", gain->options().hint_rate},
                        {"reconstruction_weight", gain->options().reconstruction_weight}};
    }
    nlohmann::json nets = nlohmann::json::object();
    for (const auto& [name, net] : model.networks()) {
        nlohmann::json entry;
        entry["widths"] = net->spec().widths;
        entry["hidden"] = nn::activation_name(net->spec().hidden);
        entry["output"] = nn::activation_name(net->spec().output);
        nlohmann::json params = nlohmann::json::array();
        for (const grad::Parameter* p : net->parameters()) {
            std::vector<double> values(p->value.data(), p->value.data() + p->value.size());
            params.push_back({{"name", p->name},
                              {"rows", p->value.rows()},
                              {"cols", p->value.cols()},
                              {"values", values}});
        }
        entry["parameters"] = std::move(params);
        nets[name] = std::move(entry);
    }
    j["networks"] = std::move(nets);
    return j.dump();
}

std::unique_ptr<GeneratorModel> checkpoint_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        if (j.value("format", "") != "misa-checkpoint") throw load_error("not a misa checkpoint");
        const ModelKind kind = parse_model(j.at("model").get<std::string>());
        const int d = j.at("width").get<int>();
        Rng rng(0);
        std::unique_ptr<GeneratorModel> model;
        if (kind == ModelKind::dae) {
            DaeOptions o;
            o.corruption = j.at("options").at("corruption").get<double>();
            o.reconstruct_corrupted = j.at("options").at("reconstruct_corrupted").get<bool>();
            model = std::make_unique<DaeImputer>(d, rng, o);
        } else {
            GainOptions o;
            o.hint_rate = j.at("options").at("hint_rate").get<double>();
            o.reconstruction_weight = j.at("options").at("reconstruction_weight").get<double>();
            model = std::make_unique<GainImputer>(d, rng, o);
        }
        for (auto& [name, net] : model->networks()) {
            const auto& entry = j.at("networks").at(name);
            if (entry.at("widths").get<std::vector<int>>() != net->spec().widths)
                throw load_error("checkpoint: architecture of '" + name + "' does not match");
            auto params = net->parameters();
            const auto& stored = entry.at("parameters");
            if (stored.size() != params.size())
                throw load_error("checkpoint: parameter count of '" + name + "' does not match");
            for (std::size_t i = 0; i < params.size(); ++i) {
                const auto values = stored[i].at("values").get<std::vector<double>>();
                if (static_cast<Eigen::Index>(values.size()) != params[i]->value.size() ||
                    stored[i].at("rows").get<Eigen::Index>() != params[i]->value.rows())
                    throw load_error("checkpoint: shape of " + params[i]->name + " does not match");
                std::copy(values.begin(), values.end(), params[i]->value.data());
            }
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw load_error(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const GeneratorModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw load_error("cannot write " + path.string());
    out << checkpoint_json(model);
}

std::unique_ptr<GeneratorModel> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw load_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_json(ss.str());
}

} // namespace misa::models
