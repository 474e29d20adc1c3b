// Microbenchmarks for the graph encoders and the decoder scoring path.

#include <benchmark/benchmark.h>

#include "ontotkge/compgcn.hpp"
#include "ontotkge/decoder.hpp"
#include "ontotkge/local_encoder.hpp"
#include "ontotkge/synthgen.hpp"

using namespace onto;

namespace {

SynthSpec sized_spec(uint32_t concepts) {
    SynthSpec spec;
    spec.concepts = concepts;
    spec.entities_per_concept = 10;
    spec.timestamps = 12;
    spec.facts_per_step = 40;
    return spec;
}

}  // namespace

static void BM_CompGcnLayer(benchmark::State& state) {
    SynthSpec spec = sized_spec(static_cast<uint32_t>(state.range(0)));
    DatasetBundle bundle = augment_inverse(generate(spec));
    GraphView view = make_graph_view(bundle.ontology);
    SplitMix64 rng(1);
    const int64_t dim = 32;
    CompGcnLayer layer = make_compgcn_layer(dim, bundle.ontology.total_relations(), rng);
    Tensor h = xavier_uniform(bundle.ontology.num_nodes(), dim, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(compgcn_layer_forward(layer, Composition::sub, view, h));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<int64_t>(bundle.ontology.facts.size()));
}
BENCHMARK(BM_CompGcnLayer)->Arg(10)->Arg(20)->Arg(40)->Arg(80);

static void BM_LocalEncoder(benchmark::State& state) {
    SynthSpec spec = sized_spec(20);
    spec.entities_per_concept = static_cast<uint32_t>(state.range(0));
    DatasetBundle bundle = augment_inverse(generate(spec));
    SplitMix64 rng(2);
    const int64_t dim = 32;
    LocalEncoderParams params = make_local_encoder(dim, bundle.ontology.num_nodes(),
                                                   bundle.ontology.total_relations(), 2,
                                                   Composition::sub, rng);
    SubgraphCache cache(&bundle.ontology, 2);
    std::vector<uint32_t> subjects;
    for (uint32_t s = 0; s < 16; ++s) subjects.push_back(s * spec.entities_per_concept);
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode_local(params, cache, bundle.entity_count, subjects));
    }
}
BENCHMARK(BM_LocalEncoder)->Arg(5)->Arg(10)->Arg(20)->Arg(40);

static void BM_DecoderScoring(benchmark::State& state) {
    SplitMix64 rng(3);
    const int64_t dim = 32, entities = 200, batch = state.range(0);
    DecoderParams dec = make_decoder(dim, 16, 3, rng);
    Tensor zhat = xavier_uniform(entities, dim, rng);
    Tensor subj = xavier_uniform(batch, dim, rng);
    Tensor rel = xavier_uniform(batch, dim, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(raw_scores(zhat, decode(dec, subj, rel)));
    }
    state.SetItemsProcessed(state.iterations() * batch * entities);
}
BENCHMARK(BM_DecoderScoring)->Arg(16)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
