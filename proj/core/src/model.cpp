#include "ontotkge/model.hpp"

#include <algorithm>
#include <set>

namespace onto {

std::vector<uint32_t> batch_subjects(const std::vector<Quadruple>& facts) {
    std::set<uint32_t> unique;
    for (const Quadruple& q : facts) unique.insert(q.s);
    return {unique.begin(), unique.end()};
}

Model::Model(ModelConfig cfg, const DatasetBundle& bundle)
    : cfg_(cfg),
      num_entities_(bundle.entity_count),
      num_concepts_(bundle.ontology.num_concepts),
      num_relations_total_(bundle.total_relations()),
      ontology_(bundle.ontology) {
    if (!bundle.augmented) throw Error("Model requires an inverse-augmented bundle");
    if (cfg_.kernel_width % 2 == 0) throw ConfigError("kernel width must be odd");

    onto_view_ = make_graph_view(ontology_);
    size_t original_facts = ontology_.facts.size() / 2;  // inverses are appended
    entailment_pairs_.reserve(original_facts);
    for (size_t i = 0; i < original_facts; ++i) {
        const OntoFact& f = ontology_.facts[i];
        entailment_pairs_.emplace_back(static_cast<int64_t>(f.ec), static_cast<int64_t>(f.c));
    }

    SplitMix64 rng(cfg_.seed);
    int64_t num_nodes = ontology_.num_nodes();
    int64_t onto_rel = ontology_.total_relations();
    if (cfg_.ontology_init) {
        global_ = make_global_encoder(cfg_.dim, num_nodes, onto_rel, cfg_.gnn_layers, cfg_.op,
                                      rng);
    } else {
        plain_entity_table_ = xavier_uniform(num_entities_, cfg_.dim, rng);
    }
    evolution_ = make_evolution(cfg_.dim, num_relations_total_, rng);
    if (cfg_.use_local) {
        local_ = make_local_encoder(cfg_.dim, num_nodes, onto_rel, cfg_.gnn_layers, cfg_.op, rng);
        if (cfg_.gated_fusion) fusion_ = make_fusion(cfg_.dim, rng);
    }
    decoder_ = make_decoder(cfg_.dim, cfg_.channels, cfg_.kernel_width, rng);
    local_cache_ = SubgraphCache(&ontology_, cfg_.hops);
}

void Model::visit_params(const std::function<void(const std::string&, Tensor&)>& fn) {
    auto visit_stack = [&](const std::string& prefix, CompGcnStack& stack) {
        for (size_t j = 0; j < stack.layers.size(); ++j) {
            std::string base = prefix + ".layer" + std::to_string(j);
            fn(base + ".W1", stack.layers[j].W1);
            fn(base + ".W2", stack.layers[j].W2);
            fn(base + ".rel_emb", stack.layers[j].rel_emb);
        }
    };
    if (cfg_.ontology_init) {
        fn("global.node_emb0", global_.node_emb0);
        visit_stack("global", global_.stack);
    } else {
        fn("global.entity_table", plain_entity_table_);
    }
    fn("evolve.w_self", evolution_.w_self);
    fn("evolve.w_nbr", evolution_.w_nbr);
    fn("evolve.gru.w_update", evolution_.gru.w_update);
    fn("evolve.gru.u_update", evolution_.gru.u_update);
    fn("evolve.gru.b_update", evolution_.gru.b_update);
    fn("evolve.gru.w_reset", evolution_.gru.w_reset);
    fn("evolve.gru.u_reset", evolution_.gru.u_reset);
    fn("evolve.gru.b_reset", evolution_.gru.b_reset);
    fn("evolve.gru.w_cand", evolution_.gru.w_cand);
    fn("evolve.gru.u_cand", evolution_.gru.u_cand);
    fn("evolve.gru.b_cand", evolution_.gru.b_cand);
    fn("evolve.rel_table", evolution_.rel_table);
    if (cfg_.use_local) {
        fn("local.node_emb0", local_.node_emb0);
        visit_stack("local", local_.stack);
        if (cfg_.gated_fusion) {
            fn("fusion.w_local", fusion_.w_local);
            fn("fusion.w_global", fusion_.w_global);
            fn("fusion.bias", fusion_.bias);
        }
    }
    fn("decoder.kernels", decoder_.kernels);
    fn("decoder.proj", decoder_.proj);
}

std::vector<Tensor*> Model::params() {
    std::vector<Tensor*> out;
    visit_params([&](const std::string&, Tensor& t) { out.push_back(&t); });
    return out;
}

std::vector<std::string> Model::param_names() {
    std::vector<std::string> out;
    visit_params([&](const std::string& name, Tensor&) { out.push_back(name); });
    return out;
}

std::vector<Tensor> Model::snapshot_params() {
    std::vector<Tensor> out;
    visit_params([&](const std::string&, Tensor& t) { out.push_back(t.clone()); });
    return out;
}

void Model::restore_params(const std::vector<Tensor>& snapshot) {
    size_t i = 0;
    visit_params([&](const std::string& name, Tensor& t) {
        if (i >= snapshot.size() || snapshot[i].shape() != t.shape()) {
            throw Error("restore_params: snapshot mismatch at " + name);
        }
        t.vec() = snapshot[i].vec();
        ++i;
    });
    if (i != snapshot.size()) throw Error("restore_params: parameter count mismatch");
}

Model::Forward Model::forward(const std::vector<const Snapshot*>& history,
                              const std::vector<uint32_t>& subjects) {
    Forward f;
    Tensor h_entities;
    if (cfg_.ontology_init) {
        f.enc = encode_ontology(global_, onto_view_, num_entities_);
        h_entities = f.enc.entities;
    } else {
        h_entities = plain_entity_table_;
    }
    f.z_global = evolve(evolution_, history, h_entities);
    if (cfg_.use_local) {
        f.local = encode_local(local_, local_cache_, num_entities_, subjects);
        f.zhat = cfg_.gated_fusion ? fuse_gated(fusion_, f.local.h, f.z_global)
                                   : fuse_sum(f.local.h, f.z_global);
    } else {
        f.zhat = f.z_global;
    }
    return f;
}

Tensor Model::score_queries(const Forward& f, const std::vector<int64_t>& subjects,
                            const std::vector<int64_t>& relations) {
    Tensor q = decode(decoder_, gather_rows(f.zhat, subjects),
                      gather_rows(evolution_.rel_table, relations));
    return sigmoid(raw_scores(f.zhat, q));
}

Model::StepLosses Model::training_losses(const std::vector<const Snapshot*>& history,
                                         const std::vector<Quadruple>& facts) {
    if (facts.empty()) throw Error("training_losses: empty fact batch");
    std::vector<uint32_t> subjects = batch_subjects(facts);
    Forward f = forward(history, subjects);

    std::vector<int64_t> subj_ids, rel_ids, gold;
    subj_ids.reserve(facts.size());
    for (const Quadruple& q : facts) {
        subj_ids.push_back(q.s);
        rel_ids.push_back(q.r);
        gold.push_back(q.o);
    }
    Tensor queries = decode(decoder_, gather_rows(f.zhat, subj_ids),
                            gather_rows(evolution_.rel_table, rel_ids));
    Tensor raw = raw_scores(f.zhat, queries);

    StepLosses losses;
    losses.tkg = tkg_loss(raw, gold);

    double a1 = cfg_.alpha1, a2 = cfg_.alpha2;
    if (cfg_.ontology_init) {
        EntailmentResult hie = entailment_loss(f.enc.nodes, entailment_pairs_, cfg_.cone_k);
        losses.hie = hie.loss;
        losses.hie_empty = hie.empty;
    } else {
        losses.hie = scalar(0.0);
        losses.hie_empty = true;
        a1 = 0.0;
    }
    if (cfg_.use_local) {
        ContrastiveResult cl =
            contrastive_loss(f.z_global, f.local.h, subjects, cfg_.temperature);
        losses.cl = cl.loss;
        losses.cl_skipped = cl.skipped;
    } else {
        losses.cl = scalar(0.0);
        losses.cl_skipped = true;
        a2 = 0.0;
    }
    losses.total = total_loss(losses.tkg, losses.hie, losses.cl, a1, a2);
    return losses;
}

}  // namespace onto
