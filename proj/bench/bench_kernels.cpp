// OpenMP kernels against their serial references.

#include "pdcadd/scenario.hpp"
#include "pdcadd/units.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace pdcadd;

namespace {

PdcConfig kdp() {
    static const PdcConfig c = resolve_pdc(*load_scenario(std::string(PDCADD_SOURCE_DIR) + "/configs/kdp_collinear_t2.yaml").pdc);
    return c;
}

void jsa_args(benchmark::internal::Benchmark* b) {
    for (int n : {256, 384, 512}) b->Arg(n);
}

void BM_jsa_parallel(benchmark::State& st) {
    const auto c = kdp();
    const auto g = make_grid(c, int(st.range(0)), int(st.range(0)), 5.0);
    for (auto _ : st) benchmark::DoNotOptimize(build_jsa(c, g, PmModel::sinc));
    st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

void BM_jsa_serial(benchmark::State& st) {
    const auto c = kdp();
    const auto g = make_grid(c, int(st.range(0)), int(st.range(0)), 5.0);
    for (auto _ : st) benchmark::DoNotOptimize(reference::build_jsa_serial(c, g, PmModel::sinc));
    st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}

FockDensityMatrix fock_input(int modes, int nmax) {
    InputStateSpec spec;
    for (int m = 0; m < modes; ++m) spec.push_back(ModeState::coherent(0.5 + 0.05 * m));
    return build_input_state(spec, nmax);
}

AdditionChannel channel(int modes) {
    std::vector<double> l;
    for (int m = 0; m < modes; ++m) l.push_back(1.0 / (1 + m));
    return AdditionChannel(l);
}

void fock_args(benchmark::internal::Benchmark* b) {
    b->Args({2, 10})->Args({2, 20})->Args({3, 8});
}

void BM_addition_kernel(benchmark::State& st) {
    const auto in = fock_input(int(st.range(0)), int(st.range(1)));
    const auto ch = channel(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(apply_addition(in, ch));
}

void BM_addition_dense(benchmark::State& st) {
    const auto in = fock_input(int(st.range(0)), int(st.range(1)));
    const auto ch = channel(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(reference::apply_addition_dense(in, ch));
}

std::vector<double> scan_angles() {
    std::vector<double> a;
    for (int i = 0; i < 33; ++i) a.push_back(deg_to_rad(8.0 * i / 32));
    return a;
}

void BM_gvm_scan_parallel(benchmark::State& st) {
    const auto& c = CrystalCatalog::builtin().get("BBO");
    const auto a = scan_angles();
    const auto roles = default_roles(c, PdcType::type_ii);
    for (auto _ : st) benchmark::DoNotOptimize(gvm_scan(c, PdcType::type_ii, a, roles));
}

void BM_gvm_scan_serial(benchmark::State& st) {
    const auto& c = CrystalCatalog::builtin().get("BBO");
    const auto a = scan_angles();
    const auto roles = default_roles(c, PdcType::type_ii);
    for (auto _ : st) benchmark::DoNotOptimize(reference::gvm_scan_serial(c, PdcType::type_ii, a, roles));
}

}  // namespace

BENCHMARK(BM_jsa_parallel)->Apply(jsa_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_jsa_serial)->Apply(jsa_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_addition_kernel)->Apply(fock_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_addition_dense)->Apply(fock_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_gvm_scan_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_gvm_scan_serial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
