#include "ontotkge/local_encoder.hpp"

#include <algorithm>
#include <set>

namespace onto {

LocalEncoderParams make_local_encoder(int64_t dim, int64_t num_nodes, int64_t num_relations,
                                      int64_t num_layers, Composition op, SplitMix64& rng) {
    LocalEncoderParams params;
    params.node_emb0 = xavier_uniform(num_nodes, dim, rng);
    params.stack = make_compgcn_stack(dim, num_relations, num_layers, op, rng);
    return params;
}

SubgraphCache::SubgraphCache(const OntologyGraph* graph, uint32_t hops)
    : graph_(graph), hops_(hops) {}

const CachedSubgraph& SubgraphCache::get(uint32_t seed) {
    auto it = cache_.find(seed);
    if (it != cache_.end()) return it->second;
    if (!graph_) throw Error("SubgraphCache used without a graph");
    ++bfs_runs_;

    OntologySubgraph sub = nhop_subgraph(*graph_, seed, hops_);
    CachedSubgraph cached;
    cached.nodes = std::vector<int64_t>(sub.nodes.begin(), sub.nodes.end());

    std::unordered_map<uint32_t, int64_t> local_of;
    local_of.reserve(cached.nodes.size());
    for (size_t i = 0; i < cached.nodes.size(); ++i) {
        local_of[static_cast<uint32_t>(cached.nodes[i])] = static_cast<int64_t>(i);
    }
    cached.view.num_nodes = static_cast<int64_t>(cached.nodes.size());
    std::vector<uint32_t> in_degree(cached.nodes.size(), 0);
    for (const OntoFact& f : sub.facts) {
        cached.view.src.push_back(local_of.at(f.ec));
        cached.view.rel.push_back(f.r);
        cached.view.dst.push_back(local_of.at(f.c));
        in_degree[static_cast<size_t>(local_of.at(f.c))] += 1;
    }
    cached.view.inv_in_degree.resize(cached.nodes.size());
    for (size_t i = 0; i < cached.nodes.size(); ++i) {
        cached.view.inv_in_degree[i] = 1.0 / std::max<uint32_t>(in_degree[i], 1);
    }
    for (size_t i = 0; i < cached.nodes.size(); ++i) {
        if (cached.nodes[i] < static_cast<int64_t>(graph_->num_entities)) {
            cached.entity_local.push_back(static_cast<int64_t>(i));
            cached.entity_global.push_back(cached.nodes[i]);
        }
    }
    return cache_.emplace(seed, std::move(cached)).first->second;
}

void SubgraphCache::clear() { cache_.clear(); }

LocalEmbeddings encode_local(const LocalEncoderParams& params, SubgraphCache& cache,
                             int64_t num_entities, const std::vector<uint32_t>& subjects) {
    if (subjects.empty()) throw Error("encode_local: empty subject set");
    std::set<uint32_t> unique(subjects.begin(), subjects.end());
    for (uint32_t s : unique) {
        if (static_cast<int64_t>(s) >= num_entities) {
            throw DataError("encode_local: subject id out of range");
        }
    }

    int64_t dim = params.node_emb0.cols();
    LocalEmbeddings out;
    out.covered.assign(static_cast<size_t>(num_entities), 0);
    std::vector<double> write_count(static_cast<size_t>(num_entities), 0.0);

    Tensor sum;  // accumulated contributions, |E| x d
    for (uint32_t seed : unique) {
        const CachedSubgraph& sub = cache.get(seed);
        Tensor h0 = gather_rows(params.node_emb0, sub.nodes);
        Tensor encoded = compgcn_stack_forward(params.stack, sub.view, h0);
        Tensor entity_rows = gather_rows(encoded, sub.entity_local);
        Tensor scattered = scatter_add_rows(entity_rows, sub.entity_global, num_entities);
        sum = sum.defined() ? add(sum, scattered) : scattered;
        for (int64_t e : sub.entity_global) {
            out.covered[static_cast<size_t>(e)] = 1;
            write_count[static_cast<size_t>(e)] += 1.0;
        }
    }
    std::vector<double> inv(static_cast<size_t>(num_entities));
    for (int64_t e = 0; e < num_entities; ++e) {
        inv[static_cast<size_t>(e)] = 1.0 / std::max(write_count[static_cast<size_t>(e)], 1.0);
    }
    out.h = scale_rows(sum, inv);
    (void)dim;
    return out;
}

}  // namespace onto
