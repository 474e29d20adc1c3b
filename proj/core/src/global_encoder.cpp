#include "ontotkge/global_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace onto {

namespace {
constexpr double kDegenerateNorm = 1e-9;
constexpr double kApertureFloorMargin = 1e-6;
}  // namespace

GlobalEncoderParams make_global_encoder(int64_t dim, int64_t num_nodes, int64_t num_relations,
                                        int64_t num_layers, Composition op, SplitMix64& rng) {
    GlobalEncoderParams params;
    params.node_emb0 = xavier_uniform(num_nodes, dim, rng);
    params.stack = make_compgcn_stack(dim, num_relations, num_layers, op, rng);
    return params;
}

OntologyEncoding encode_ontology(const GlobalEncoderParams& params, const GraphView& view,
                                 int64_t num_entities) {
    OntologyEncoding enc;
    enc.nodes = compgcn_stack_forward(params.stack, view, params.node_emb0);
    int64_t total = enc.nodes.rows();
    if (num_entities > total) {
        throw ShapeError("encode_ontology: entity count exceeds node count");
    }
    std::vector<int64_t> entity_ids(static_cast<size_t>(num_entities));
    std::iota(entity_ids.begin(), entity_ids.end(), 0);
    enc.entities = gather_rows(enc.nodes, entity_ids);
    std::vector<int64_t> concept_ids(static_cast<size_t>(total - num_entities));
    std::iota(concept_ids.begin(), concept_ids.end(), num_entities);
    enc.concepts = gather_rows(enc.nodes, concept_ids);
    return enc;
}

// ---------------------------------------------------------------------------
// Cone geometry
// ---------------------------------------------------------------------------

Tensor cone_angle(const Tensor& parent, const Tensor& child) {
    if (parent.rank() != 1 || child.rank() != 1 || parent.shape() != child.shape()) {
        throw ShapeError("cone_angle: two equal-length vectors required");
    }
    Tensor diff = sub(parent, child);
    Tensor np2 = sum_all(mul(parent, parent));
    Tensor nc2 = sum_all(mul(child, child));
    Tensor nd2 = sum_all(mul(diff, diff));
    if (std::sqrt(np2.value()) <= kDegenerateNorm || std::sqrt(nd2.value()) <= kDegenerateNorm) {
        throw DomainError("cone_angle: degenerate input (zero-norm parent or child == parent)");
    }
    Tensor denom = scale(mul(sqrt(np2), sqrt(nd2)), 2.0);
    Tensor arg = clamp(div(sub(sub(nc2, np2), nd2), denom), -1.0, 1.0);
    return acos(arg);
}

Tensor half_aperture(const Tensor& parent, double k) {
    if (parent.rank() != 1) throw ShapeError("half_aperture: vector required");
    if (!(k > 0.0)) throw DomainError("half_aperture: cone constant must be positive");
    Tensor norm = sqrt(sum_all(mul(parent, parent)));
    Tensor floored = clamp(norm, k + kApertureFloorMargin,
                           std::numeric_limits<double>::infinity());
    return asin(scale(reciprocal(floored), k));
}

EntailmentResult entailment_loss(const Tensor& node_emb,
                                 const std::vector<std::pair<int64_t, int64_t>>& child_parent,
                                 double k) {
    EntailmentResult result;
    result.total_pairs = static_cast<int64_t>(child_parent.size());
    if (child_parent.empty()) {
        result.loss = scalar(0.0);
        result.empty = true;
        return result;
    }
    int64_t cols = node_emb.cols();
    const double* data = node_emb.data();

    // Pairs whose child coincides with the parent (or whose parent vanishes)
    // are defined to contribute zero; filter them out with plain values so
    // the recorded graph never divides by ~0.
    std::vector<int64_t> child_ids, parent_ids;
    for (auto [child, parent] : child_parent) {
        const double* pc = data + parent * cols;
        const double* pe = data + child * cols;
        double parent_sq = 0.0, diff_sq = 0.0;
        for (int64_t j = 0; j < cols; ++j) {
            parent_sq += pc[j] * pc[j];
            double dd = pc[j] - pe[j];
            diff_sq += dd * dd;
        }
        if (std::sqrt(parent_sq) <= kDegenerateNorm || std::sqrt(diff_sq) <= kDegenerateNorm) {
            ++result.skipped;
            continue;
        }
        child_ids.push_back(child);
        parent_ids.push_back(parent);
    }
    if (child_ids.empty()) {
        result.loss = scalar(0.0);
        return result;
    }

    Tensor children = gather_rows(node_emb, child_ids);
    Tensor parents = gather_rows(node_emb, parent_ids);
    Tensor diff = sub(parents, children);
    Tensor nc2 = row_sum(mul(children, children));
    Tensor np2 = row_sum(mul(parents, parents));
    Tensor nd2 = row_sum(mul(diff, diff));
    Tensor np = sqrt(np2);
    Tensor nd = sqrt(nd2);
    Tensor arg = clamp(div(sub(sub(nc2, np2), nd2), scale(mul(np, nd), 2.0)), -1.0, 1.0);
    Tensor angle = acos(arg);
    Tensor floored = clamp(np, k + kApertureFloorMargin,
                           std::numeric_limits<double>::infinity());
    Tensor aperture = asin(scale(reciprocal(floored), k));
    Tensor hinge = relu(sub(angle, aperture));
    result.loss = scale(sum_all(hinge), 1.0 / static_cast<double>(result.total_pairs));
    return result;
}

// ---------------------------------------------------------------------------
// Temporal evolution
// ---------------------------------------------------------------------------

GruParams make_gru(int64_t dim, SplitMix64& rng) {
    GruParams p;
    p.w_update = xavier_uniform(dim, dim, rng);
    p.u_update = xavier_uniform(dim, dim, rng);
    p.b_update = zeros(Shape{dim});
    p.w_reset = xavier_uniform(dim, dim, rng);
    p.u_reset = xavier_uniform(dim, dim, rng);
    p.b_reset = zeros(Shape{dim});
    p.w_cand = xavier_uniform(dim, dim, rng);
    p.u_cand = xavier_uniform(dim, dim, rng);
    p.b_cand = zeros(Shape{dim});
    return p;
}

Tensor gru_cell(const GruParams& p, const Tensor& input, const Tensor& hidden) {
    if (input.shape() != hidden.shape()) {
        throw ShapeError("gru_cell: input and hidden state shapes differ");
    }
    Tensor u = sigmoid(add_rowvec(add(matmul(input, transpose(p.w_update)),
                                      matmul(hidden, transpose(p.u_update))),
                                  p.b_update));
    Tensor r = sigmoid(add_rowvec(add(matmul(input, transpose(p.w_reset)),
                                      matmul(hidden, transpose(p.u_reset))),
                                  p.b_reset));
    Tensor cand = tanh(add_rowvec(add(matmul(input, transpose(p.w_cand)),
                                      matmul(mul(r, hidden), transpose(p.u_cand))),
                                  p.b_cand));
    Tensor keep = mul(u, hidden);
    Tensor ones = full(u.shape(), 1.0);
    return add(keep, mul(sub(ones, u), cand));
}

EvolutionParams make_evolution(int64_t dim, int64_t num_relations_total, SplitMix64& rng) {
    EvolutionParams p;
    p.w_self = xavier_uniform(dim, dim, rng);
    p.w_nbr = xavier_uniform(dim, dim, rng);
    p.gru = make_gru(dim, rng);
    p.rel_table = xavier_uniform(std::max<int64_t>(num_relations_total, 1), dim, rng);
    return p;
}

Tensor evolve(const EvolutionParams& params, const std::vector<const Snapshot*>& history,
              const Tensor& h_entities) {
    Tensor h = h_entities;
    int64_t num_entities = h.rows();
    for (const Snapshot* snap : history) {
        if (!snap || snap->facts.empty()) continue;
        std::vector<int64_t> subj, rel, obj;
        subj.reserve(snap->facts.size());
        std::vector<double> in_count(static_cast<size_t>(num_entities), 0.0);
        for (const Quadruple& q : snap->facts) {
            subj.push_back(q.s);
            rel.push_back(q.r);
            obj.push_back(q.o);
            in_count[q.o] += 1.0;
        }
        std::vector<double> inv_count(static_cast<size_t>(num_entities));
        std::vector<int64_t> present;
        for (int64_t e = 0; e < num_entities; ++e) {
            if (in_count[static_cast<size_t>(e)] > 0.0) present.push_back(e);
            inv_count[static_cast<size_t>(e)] = 1.0 / std::max(in_count[static_cast<size_t>(e)], 1.0);
        }
        Tensor messages = matmul(add(gather_rows(h, subj), gather_rows(params.rel_table, rel)),
                                 transpose(params.w_nbr));
        Tensor aggregated = scale_rows(scatter_add_rows(messages, obj, num_entities), inv_count);
        Tensor self = matmul(h, transpose(params.w_self));
        Tensor m_all = leaky_relu(add(aggregated, self), kLeakySlope);
        Tensor updated = gru_cell(params.gru, gather_rows(m_all, present), gather_rows(h, present));
        h = scatter_rows_replace(h, present, updated);
    }
    return h;
}

}  // namespace onto
