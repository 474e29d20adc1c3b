#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ontotkge/dataset.hpp"
#include "ontotkge/rng.hpp"
#include "ontotkge/tensor.hpp"

namespace onto {

// Fixed negative slope of the leaky activation used across the model; the
// midpoint of the conventional randomized-ReLU bounds [1/8, 1/3], frozen so
// that training and inference stay deterministic.
inline constexpr double kLeakySlope = (0.125 + 1.0 / 3.0) / 2.0;

// Entity-relation composition inside the graph convolution.
enum class Composition { sub, mult, corr };

Composition composition_from_string(std::string_view s);
std::string_view composition_name(Composition op);

// compose(op, h_ec, h_r): Sub -> h_ec - h_r, Mult -> h_ec * h_r (Hadamard),
// Corr -> circular correlation. Accepts vectors or rowwise-matched matrices.
Tensor compose(Composition op, const Tensor& h_ec, const Tensor& h_r);

// One graph-convolution layer. Every layer owns its private relation table;
// there is no inter-layer relation transform.
struct CompGcnLayer {
    Tensor W1;       // d x d feed-forward aggregation
    Tensor W2;       // d x d self-connection
    Tensor rel_emb;  // total relations x d, private to this layer
};

CompGcnLayer make_compgcn_layer(int64_t dim, int64_t num_relations, SplitMix64& rng);

// Flat edge-list view consumed by the layer forward; precomputable and
// cacheable for subgraphs.
struct GraphView {
    int64_t num_nodes = 0;
    std::vector<int64_t> src, rel, dst;    // one entry per fact (ec, r_O, c)
    std::vector<double> inv_in_degree;     // 1 / max(v_c, 1) per node
};

GraphView make_graph_view(const OntologyGraph& g);

// out[c] = leaky( (1/v_c) * sum_{(ec,r)->c} W1 . compose(H[ec], rel[r])
//                 + W2 . H[c] );
// nodes without incoming facts receive the self term only.
Tensor compgcn_layer_forward(const CompGcnLayer& layer, Composition op, const GraphView& view,
                             const Tensor& h);

struct CompGcnStack {
    std::vector<CompGcnLayer> layers;
    Composition op = Composition::sub;
};

CompGcnStack make_compgcn_stack(int64_t dim, int64_t num_relations, int64_t num_layers,
                                Composition op, SplitMix64& rng);

// Sequential application of the stack's layers; zero layers return h0
// untouched.
Tensor compgcn_stack_forward(const CompGcnStack& stack, const GraphView& view, const Tensor& h0);

}  // namespace onto
