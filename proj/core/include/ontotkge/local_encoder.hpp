#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ontotkge/compgcn.hpp"
#include "ontotkge/dataset.hpp"
#include "ontotkge/tensor.hpp"

namespace onto {

// Per-query ontology encoder: an independent graph convolution restricted to
// the N-hop neighborhood of each query subject.
struct LocalEncoderParams {
    Tensor node_emb0;    // (|E|+|C|) x d, disjoint from the global table
    CompGcnStack stack;  // independent layer parameters
};

LocalEncoderParams make_local_encoder(int64_t dim, int64_t num_nodes, int64_t num_relations,
                                      int64_t num_layers, Composition op, SplitMix64& rng);

// Subgraph with node ids remapped to a compact local index space, ready to
// feed the layer forward. Cached per seed entity; the cache is structural
// (keyed on the seed and hop count) and must be rebuilt if the ontology
// changes.
struct CachedSubgraph {
    std::vector<int64_t> nodes;          // global node ids, ascending
    GraphView view;                      // edges remapped to local indices
    std::vector<int64_t> entity_local;   // local row index of each entity node
    std::vector<int64_t> entity_global;  // matching global entity ids
};

class SubgraphCache {
public:
    SubgraphCache() = default;
    SubgraphCache(const OntologyGraph* graph, uint32_t hops);

    const CachedSubgraph& get(uint32_t seed);
    void clear();
    uint32_t hops() const { return hops_; }
    int64_t bfs_runs() const { return bfs_runs_; }

private:
    const OntologyGraph* graph_ = nullptr;
    uint32_t hops_ = 0;
    std::unordered_map<uint32_t, CachedSubgraph> cache_;
    int64_t bfs_runs_ = 0;
};

struct LocalEmbeddings {
    Tensor h;                      // |E| x d; rows outside `covered` are exactly zero
    std::vector<uint8_t> covered;  // per-entity flag: inside some computed subgraph
};

// Runs the stack once per unique subject on its cached subgraph and merges
// the final-layer entity rows into an |E| x d matrix. Entities written by
// several subgraphs receive the average of the competing rows; entities
// never written stay exact zero.
LocalEmbeddings encode_local(const LocalEncoderParams& params, SubgraphCache& cache,
                             int64_t num_entities, const std::vector<uint32_t>& subjects);

}  // namespace onto
