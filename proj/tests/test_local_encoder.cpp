#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ontotkge/local_encoder.hpp"

using namespace onto;

namespace {

// entities 0..3; concepts 4,5 (disjoint pair of stars), entity 3 isolated
OntologyGraph two_components() {
    OntologyGraph g;
    g.num_entities = 4;
    g.num_concepts = 2;
    g.num_relations = 1;
    g.facts = {{0, 0, 4}, {1, 0, 4}, {2, 0, 5}};
    g.finalize();
    return g;
}

double row_norm(const Tensor& m, int64_t row) {
    double s = 0;
    for (int64_t j = 0; j < m.cols(); ++j) s += m.at(row, j) * m.at(row, j);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("hops=0 keeps only the seed's self-connection path") {
    OntologyGraph g = two_components();
    SplitMix64 rng(1);
    LocalEncoderParams params = make_local_encoder(3, g.num_nodes(), g.total_relations(), 1,
                                                   Composition::sub, rng);
    SubgraphCache cache(&g, 0);
    LocalEmbeddings out = encode_local(params, cache, g.num_entities, {1});

    // expected: leaky(W2 . emb0[1]) since the subgraph has no facts
    const Tensor& w2 = params.stack.layers[0].W2;
    for (int64_t j = 0; j < 3; ++j) {
        double v = 0;
        for (int64_t k = 0; k < 3; ++k) v += w2.at(j, k) * params.node_emb0.at(1, k);
        double expected = v > 0 ? v : kLeakySlope * v;
        CHECK(out.h.at(1, j) == doctest::Approx(expected).epsilon(1e-14));
    }
    CHECK(out.covered[1] == 1);
    for (uint32_t e : {0u, 2u, 3u}) {
        CHECK(out.covered[e] == 0);
        CHECK(row_norm(out.h, e) == 0.0);
    }
}

TEST_CASE("subject without ontology facts still gets its self-connection row") {
    OntologyGraph g = two_components();
    SplitMix64 rng(2);
    LocalEncoderParams params = make_local_encoder(3, g.num_nodes(), g.total_relations(), 2,
                                                   Composition::sub, rng);
    SubgraphCache cache(&g, 2);
    LocalEmbeddings out = encode_local(params, cache, g.num_entities, {3});
    CHECK(out.covered[3] == 1);
    CHECK(row_norm(out.h, 3) > 0.0);
    CHECK(row_norm(out.h, 0) == 0.0);
}

TEST_CASE("disjoint subjects equal the union of independent runs") {
    OntologyGraph g = augment_inverse(two_components());
    SplitMix64 rng(3);
    LocalEncoderParams params = make_local_encoder(3, g.num_nodes(), g.total_relations(), 2,
                                                   Composition::sub, rng);
    SubgraphCache cache_a(&g, 2), cache_b(&g, 2), cache_ab(&g, 2);
    LocalEmbeddings only_a = encode_local(params, cache_a, g.num_entities, {0});
    LocalEmbeddings only_c = encode_local(params, cache_b, g.num_entities, {2});
    LocalEmbeddings both = encode_local(params, cache_ab, g.num_entities, {0, 2});
    for (int64_t j = 0; j < 3; ++j) {
        CHECK(both.h.at(0, j) == only_a.h.at(0, j));
        CHECK(both.h.at(2, j) == only_c.h.at(2, j));
    }
    // entity 1 shares entity 0's subgraph (same concept) and is covered there
    CHECK(both.covered[1] == 1);
    CHECK(both.covered[3] == 0);
    CHECK(row_norm(both.h, 3) == 0.0);
}

TEST_CASE("zero-row invariant holds exactly for uncovered entities") {
    OntologyGraph g = augment_inverse(two_components());
    SplitMix64 rng(4);
    LocalEncoderParams params = make_local_encoder(4, g.num_nodes(), g.total_relations(), 2,
                                                   Composition::mult, rng);
    SubgraphCache cache(&g, 1);
    LocalEmbeddings out = encode_local(params, cache, g.num_entities, {2});
    for (uint32_t e = 0; e < g.num_entities; ++e) {
        if (!out.covered[e]) {
            for (int64_t j = 0; j < 4; ++j) CHECK(out.h.at(e, j) == 0.0);
        }
    }
}

TEST_CASE("locality: nodes outside the subgraph cannot influence the rows") {
    OntologyGraph g = augment_inverse(two_components());
    SplitMix64 rng(5);
    LocalEncoderParams params = make_local_encoder(3, g.num_nodes(), g.total_relations(), 2,
                                                   Composition::sub, rng);
    SubgraphCache cache(&g, 2);
    LocalEmbeddings before = encode_local(params, cache, g.num_entities, {0});

    // perturb the base row of entity 2 (in the other component) and node 5
    params.node_emb0.set(2 * 3 + 1, 123.0);
    params.node_emb0.set(5 * 3 + 0, -55.0);
    LocalEmbeddings after = encode_local(params, cache, g.num_entities, {0});
    for (int64_t j = 0; j < 3; ++j) {
        CHECK(after.h.at(0, j) == before.h.at(0, j));
        CHECK(after.h.at(1, j) == before.h.at(1, j));
    }
}

TEST_CASE("gradients flow only into rows touched by some subgraph") {
    OntologyGraph g = augment_inverse(two_components());
    SplitMix64 rng(6);
    LocalEncoderParams params = make_local_encoder(3, g.num_nodes(), g.total_relations(), 1,
                                                   Composition::sub, rng);
    SubgraphCache cache(&g, 2);

    Tape tape;
    tape.watch(params.node_emb0);
    LocalEmbeddings out = encode_local(params, cache, g.num_entities, {0});
    tape.backward(sum_all(out.h));
    Tensor grad = tape.grad(params.node_emb0);
    // subgraph of 0 (2 hops over the augmented star): {0, 1, 4}
    for (int64_t node : {0, 1, 4}) CHECK(row_norm(grad, node) > 0.0);
    for (int64_t node : {2, 3, 5}) CHECK(row_norm(grad, node) == 0.0);
}

TEST_CASE("subgraph cache: one traversal per seed, distinct per hop count") {
    OntologyGraph g = augment_inverse(two_components());
    SubgraphCache cache(&g, 2);
    CHECK(cache.bfs_runs() == 0);
    cache.get(0);
    cache.get(0);
    CHECK(cache.bfs_runs() == 1);
    cache.get(1);
    CHECK(cache.bfs_runs() == 2);

    SubgraphCache other_hops(&g, 1);
    const CachedSubgraph& wide = cache.get(2);
    const CachedSubgraph& narrow = other_hops.get(2);
    CHECK(narrow.nodes.size() <= wide.nodes.size());

    // clearing forces recomputation with identical results
    std::vector<int64_t> nodes_before = cache.get(0).nodes;
    cache.clear();
    CHECK(cache.get(0).nodes == nodes_before);
    CHECK(cache.bfs_runs() == 4);
}

TEST_CASE("invalid subject id is rejected") {
    OntologyGraph g = two_components();
    SplitMix64 rng(7);
    LocalEncoderParams params = make_local_encoder(3, g.num_nodes(), g.total_relations(), 1,
                                                   Composition::sub, rng);
    SubgraphCache cache(&g, 1);
    CHECK_THROWS_AS(encode_local(params, cache, g.num_entities, {99}), DataError);
    CHECK_THROWS_AS(encode_local(params, cache, g.num_entities, {}), Error);
}
