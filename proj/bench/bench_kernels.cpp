// Parallel kernels against their serial references.
// Worker count follows FUSEGRAPH_THREADS / OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <map>

#include "fusegraph/embedding.hpp"
#include "fusegraph/fusion_graph.hpp"
#include "fusegraph/ranker.hpp"
#include "fusegraph/reference.hpp"
#include "fusegraph/synthetic.hpp"

using namespace fusegraph;

namespace {

struct Fixture {
    std::map<std::string, FeatureTable> tables;
    std::vector<Ranker> rankers;
    std::vector<SampleId> ids;
    RankStore store;
    std::vector<GoI> gois;

    explicit Fixture(std::size_t samples) {
        for (auto& t : make_random_tables(samples, 3, 16, 1)) {
            rankers.push_back({t.descriptor_name(), Comparator::euclidean});
            tables.emplace(t.descriptor_name(), std::move(t));
        }
        ids = tables.begin()->second.ids();
        store = build_rank_store(tables, rankers, ids, {10, true});
        for (const auto& g : extract_fusion_graphs(ids, store, store, 10)) {
            auto part = extract_gois(g);
            gois.insert(gois.end(), part.begin(), part.end());
            if (gois.size() >= 600) break;
        }
        gois.resize(std::min<std::size_t>(gois.size(), 600));
    }
};

const Fixture& fixture() {
    static const Fixture f(800);
    return f;
}

void BM_RankStore_Parallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(build_rank_store(f.tables, f.rankers, f.ids, {10, true}));
}

void BM_RankStore_Serial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(reference::build_rank_store(f.tables, f.rankers, f.ids, {10, true}));
}

void BM_FusionGraphs_Parallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(extract_fusion_graphs(f.ids, f.store, f.store, 10));
}

void BM_FusionGraphs_Serial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(reference::extract_fusion_graphs(f.ids, f.store, f.store, 10));
}

void BM_McsMatrix_Parallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(mcs_distance_matrix(f.gois));
}

void BM_McsMatrix_Serial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(reference::mcs_distance_matrix(f.gois));
}

void BM_MedoidShift_Parallel(benchmark::State& state) {
    const auto& f = fixture();
    const auto d = mcs_distance_matrix(f.gois);
    for (auto _ : state) benchmark::DoNotOptimize(medoid_shift_targets(d, f.gois.size(), 0.5));
}

void BM_MedoidShift_Serial(benchmark::State& state) {
    const auto& f = fixture();
    const auto d = mcs_distance_matrix(f.gois);
    for (auto _ : state) benchmark::DoNotOptimize(reference::medoid_shift_targets(d, f.gois.size(), 0.5));
}

}  // namespace

BENCHMARK(BM_RankStore_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RankStore_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FusionGraphs_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FusionGraphs_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McsMatrix_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McsMatrix_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MedoidShift_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MedoidShift_Serial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
