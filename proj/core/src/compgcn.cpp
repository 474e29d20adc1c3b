#include "ontotkge/compgcn.hpp"

#include <algorithm>

namespace onto {

Composition composition_from_string(std::string_view s) {
    if (s == "sub") return Composition::sub;
    if (s == "mult") return Composition::mult;
    if (s == "corr") return Composition::corr;
    throw ConfigError("unknown composition op '" + std::string(s) + "' (sub|mult|corr)");
}

std::string_view composition_name(Composition op) {
    switch (op) {
        case Composition::sub: return "sub";
        case Composition::mult: return "mult";
        case Composition::corr: return "corr";
    }
    return "?";
}

Tensor compose(Composition op, const Tensor& h_ec, const Tensor& h_r) {
    switch (op) {
        case Composition::sub: return sub(h_ec, h_r);
        case Composition::mult: return mul(h_ec, h_r);
        case Composition::corr: return circular_correlation(h_ec, h_r);
    }
    throw Error("unreachable composition");
}

CompGcnLayer make_compgcn_layer(int64_t dim, int64_t num_relations, SplitMix64& rng) {
    CompGcnLayer layer;
    layer.W1 = xavier_uniform(dim, dim, rng);
    layer.W2 = xavier_uniform(dim, dim, rng);
    layer.rel_emb = xavier_uniform(std::max<int64_t>(num_relations, 1), dim, rng);
    return layer;
}

GraphView make_graph_view(const OntologyGraph& g) {
    GraphView view;
    view.num_nodes = g.num_nodes();
    view.src.reserve(g.facts.size());
    view.rel.reserve(g.facts.size());
    view.dst.reserve(g.facts.size());
    for (const OntoFact& f : g.facts) {
        view.src.push_back(f.ec);
        view.rel.push_back(f.r);
        view.dst.push_back(f.c);
    }
    view.inv_in_degree.resize(view.num_nodes);
    for (int64_t i = 0; i < view.num_nodes; ++i) {
        view.inv_in_degree[static_cast<size_t>(i)] =
            1.0 / std::max<uint32_t>(g.in_degree[static_cast<size_t>(i)], 1);
    }
    return view;
}

Tensor compgcn_layer_forward(const CompGcnLayer& layer, Composition op, const GraphView& view,
                             const Tensor& h) {
    if (h.rank() != 2 || h.rows() != view.num_nodes) {
        throw ShapeError("compgcn_layer_forward: node feature rows " + shape_str(h.shape()) +
                         " != node count " + std::to_string(view.num_nodes));
    }
    if (h.cols() != layer.W1.rows()) {
        throw ShapeError("compgcn_layer_forward: feature dim does not match layer weights");
    }
    Tensor self = matmul(h, transpose(layer.W2));
    if (view.src.empty()) {
        return leaky_relu(self, kLeakySlope);
    }
    Tensor messages = compose(op, gather_rows(h, view.src), gather_rows(layer.rel_emb, view.rel));
    Tensor aggregated = scatter_add_rows(matmul(messages, transpose(layer.W1)), view.dst,
                                         view.num_nodes);
    aggregated = scale_rows(aggregated, view.inv_in_degree);
    return leaky_relu(add(aggregated, self), kLeakySlope);
}

CompGcnStack make_compgcn_stack(int64_t dim, int64_t num_relations, int64_t num_layers,
                                Composition op, SplitMix64& rng) {
    CompGcnStack stack;
    stack.op = op;
    stack.layers.reserve(static_cast<size_t>(num_layers));
    for (int64_t j = 0; j < num_layers; ++j) {
        stack.layers.push_back(make_compgcn_layer(dim, num_relations, rng));
    }
    return stack;
}

Tensor compgcn_stack_forward(const CompGcnStack& stack, const GraphView& view, const Tensor& h0) {
    Tensor h = h0;
    for (const CompGcnLayer& layer : stack.layers) {
        h = compgcn_layer_forward(layer, stack.op, view, h);
    }
    return h;
}

}  // namespace onto
