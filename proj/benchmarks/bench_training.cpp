#include "misa/augment.hpp"
#include "misa/missingness.hpp"
#include "misa/models.hpp"

#include <benchmark/benchmark.h>

using namespace misa;

namespace {

models::Batch random_batch(Eigen::Index n, Eigen::Index d, Rng& rng) {
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform01(rng);
    const MaskMatrix m = mask::mcar_mask(n, d, 0.5, rng);
    return {x.cwiseProduct(m), m};
}

// One optimizer step on a 64-row batch; range(0) is the data width,
// range(1) toggles augmentation.
void hybrid_step(benchmark::State& state, models::ModelKind kind) {
    const auto d = static_cast<int>(state.range(0));
    Rng rng(1);
    auto model = models::make_model(kind, d, rng);
    const models::Batch batch = random_batch(64, d, rng);
    grad::Adam opt(model->generator_parameters());
    const augment::MisaConfig cfg{state.range(1) != 0, augment::default_alpha(kind)};
    Rng base(2), aug(3);
    keep_heap_resident();
    for (auto _ : state) {
        auto l = augment::hybrid_step(*model, batch, cfg, opt, {base, aug});
        benchmark::DoNotOptimize(l);
    }
    state.SetItemsProcessed(state.iterations() * 64);
}

void BM_DaeStep(benchmark::State& s) { hybrid_step(s, models::ModelKind::dae); }
void BM_GainStep(benchmark::State& s) { hybrid_step(s, models::ModelKind::gain); }

BENCHMARK(BM_DaeStep)->ArgsProduct({{13, 60}, {0, 1}});
BENCHMARK(BM_GainStep)->ArgsProduct({{13, 60}, {0, 1}});

void BM_Impute(benchmark::State& state) {
    const auto d = static_cast<int>(state.range(0));
    Rng rng(4);
    auto model = models::make_model(models::ModelKind::gain, d, rng);
    const models::Batch batch = random_batch(1000, d, rng);
    for (auto _ : state) {
        Matrix out = model->impute(batch.x, batch.m, rng);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Impute)->Arg(13)->Arg(60);

void BM_MarMask(benchmark::State& state) {
    Rng rng(5);
    Matrix x(4000, 10);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform01(rng);
    mask::MechanismSpec spec{mask::Mechanism::mar, 0.5, 0.3, std::nullopt, 6};
    for (auto _ : state) {
        MaskMatrix m = mask::generate_mask(x, spec);
        benchmark::DoNotOptimize(m.data());
    }
}
BENCHMARK(BM_MarMask);

} // namespace

BENCHMARK_MAIN();
