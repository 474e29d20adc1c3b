#pragma once

#include <utility>
#include <vector>

#include "ontotkge/compgcn.hpp"
#include "ontotkge/dataset.hpp"
#include "ontotkge/tensor.hpp"

namespace onto {

// ---------------------------------------------------------------------------
// Ontology-initialized entity embeddings
// ---------------------------------------------------------------------------

struct GlobalEncoderParams {
    Tensor node_emb0;    // (|E|+|C|) x d learnable base table
    CompGcnStack stack;  // shared-structure graph convolution over the ontology
};

struct OntologyEncoding {
    Tensor nodes;     // full final-layer output, (|E|+|C|) x d
    Tensor entities;  // first |E| rows
    Tensor concepts;  // remaining |C| rows ([0 x d] when there are none)
};

GlobalEncoderParams make_global_encoder(int64_t dim, int64_t num_nodes, int64_t num_relations,
                                        int64_t num_layers, Composition op, SplitMix64& rng);

// Runs the stack over the (inverse-augmented) ontology and splits the final
// layer into entity and concept blocks.
OntologyEncoding encode_ontology(const GlobalEncoderParams& params, const GraphView& view,
                                 int64_t num_entities);

// ---------------------------------------------------------------------------
// Entailment-cone regularizer
// ---------------------------------------------------------------------------

// Angle at the parent between its own ray and the child offset:
// acos((|child|^2 - |parent|^2 - |parent-child|^2) / (2 |parent| |parent-child|)),
// argument clamped to [-1,1]. Both vectors rank-1. Degenerate norms
// (<= 1e-9) raise a domain error.
Tensor cone_angle(const Tensor& parent, const Tensor& child);

// asin(k / |parent|) with the norm floored at k + 1e-6, so the aperture is
// defined even while the parent drifts inside the ball of radius k.
Tensor half_aperture(const Tensor& parent, double k);

struct EntailmentResult {
    Tensor loss;             // scalar; detached zero when no usable pairs
    int64_t total_pairs = 0;
    int64_t skipped = 0;     // degenerate (child == parent or zero-norm parent)
    bool empty = false;      // no pairs were supplied at all
};

// Mean hinge max(0, angle - aperture) over (child, parent) node-id pairs
// drawn from the original ontology facts. Degenerate pairs contribute 0 but
// still count in the mean's denominator.
EntailmentResult entailment_loss(const Tensor& node_emb,
                                 const std::vector<std::pair<int64_t, int64_t>>& child_parent,
                                 double k);

// ---------------------------------------------------------------------------
// Reference temporal encoder: one-layer mean relational aggregation per
// snapshot + a gated recurrent update, over a fixed history window.
// ---------------------------------------------------------------------------

struct GruParams {
    Tensor w_update, u_update, b_update;
    Tensor w_reset, u_reset, b_reset;
    Tensor w_cand, u_cand, b_cand;
};

GruParams make_gru(int64_t dim, SplitMix64& rng);

// Rowwise gated recurrent cell:
//   u = sigmoid(x Wu^T + h Uu^T + bu)
//   r = sigmoid(x Wr^T + h Ur^T + br)
//   c = tanh(x Wc^T + (r*h) Uc^T + bc)
//   h' = u*h + (1-u)*c
Tensor gru_cell(const GruParams& p, const Tensor& input, const Tensor& hidden);

struct EvolutionParams {
    Tensor w_self, w_nbr;  // d x d
    GruParams gru;
    Tensor rel_table;      // (2|R|) x d, static across time
};

EvolutionParams make_evolution(int64_t dim, int64_t num_relations_total, SplitMix64& rng);

// Evolves entity states across the history window (ascending timestamps).
// Per snapshot, each entity with incoming facts receives
//   m[e] = leaky((1/n_e) sum_{(s,r)->e} Wn (h[s] + rel[r]) + Ws h[e])
// and is updated through the recurrent cell; entities absent from the
// snapshot keep their state untouched. An empty history returns h_entities.
Tensor evolve(const EvolutionParams& params, const std::vector<const Snapshot*>& history,
              const Tensor& h_entities);

}  // namespace onto
