#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ontotkge/compgcn.hpp"
#include "ontotkge/dataset.hpp"
#include "ontotkge/decoder.hpp"
#include "ontotkge/fusion.hpp"
#include "ontotkge/global_encoder.hpp"
#include "ontotkge/local_encoder.hpp"
#include "ontotkge/tensor.hpp"

namespace onto {

struct ModelConfig {
    int64_t dim = 32;
    int64_t gnn_layers = 2;      // layers per graph-convolution stack
    uint32_t hops = 2;           // subgraph radius of the local encoder
    double cone_k = 0.5;         // entailment-cone constant
    double temperature = 0.07;   // contrastive temperature
    double alpha1 = 0.1;         // weight of the entailment loss
    double alpha2 = 0.1;         // weight of the contrastive loss
    int64_t history_window = 3;  // snapshots fed to the temporal encoder
    Composition op = Composition::sub;
    int64_t channels = 16;       // decoder convolution channels
    int64_t kernel_width = 3;    // decoder kernel width (odd)
    uint64_t seed = 42;

    // Ablation switches.
    bool use_local = true;      // false: drop the local encoder and the contrastive term
    bool ontology_init = true;  // false: plain learnable entity table, no ontology
                                // convolution and no entailment term
    bool gated_fusion = true;   // false: fuse the two views by summation
};

// The full model: parameter owner plus the per-timestamp forward pass.
// Construct from an inverse-augmented bundle.
class Model {
public:
    Model(ModelConfig cfg, const DatasetBundle& bundle);
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    const ModelConfig& config() const { return cfg_; }
    int64_t num_entities() const { return num_entities_; }
    int64_t num_concepts() const { return num_concepts_; }
    int64_t num_relations_total() const { return num_relations_total_; }
    const OntologyGraph& ontology() const { return ontology_; }
    SubgraphCache& subgraph_cache() { return local_cache_; }
    const Tensor& relation_table() const { return evolution_.rel_table; }
    const DecoderParams& decoder() const { return decoder_; }

    // Fixed-order named traversal of every learnable tensor.
    void visit_params(const std::function<void(const std::string&, Tensor&)>& fn);
    std::vector<Tensor*> params();
    std::vector<std::string> param_names();

    std::vector<Tensor> snapshot_params();  // deep copies, fixed order
    void restore_params(const std::vector<Tensor>& snapshot);

    struct Forward {
        Tensor zhat;      // |E| x d fused entity states
        Tensor z_global;  // evolved global view
        OntologyEncoding enc;   // populated when the ontology path is active
        LocalEmbeddings local;  // populated when the local encoder is active
    };
    // history: ascending snapshots strictly before the queried timestamp.
    // subjects: the query subjects of that timestamp (drives the local
    // encoder); may be empty only when the local encoder is disabled.
    Forward forward(const std::vector<const Snapshot*>& history,
                    const std::vector<uint32_t>& subjects);

    struct StepLosses {
        Tensor total, tkg, hie, cl;
        bool hie_empty = false;
        bool cl_skipped = false;
    };
    StepLosses training_losses(const std::vector<const Snapshot*>& history,
                               const std::vector<Quadruple>& facts);

    // Query scores (sigmoid of dot products) for a batch of (subject,
    // relation) pairs against all entities: [B x |E|].
    Tensor score_queries(const Forward& f, const std::vector<int64_t>& subjects,
                         const std::vector<int64_t>& relations);

private:
    ModelConfig cfg_;
    int64_t num_entities_ = 0;
    int64_t num_concepts_ = 0;
    int64_t num_relations_total_ = 0;
    OntologyGraph ontology_;  // augmented copy, owned so caches stay valid
    GraphView onto_view_;
    std::vector<std::pair<int64_t, int64_t>> entailment_pairs_;  // (child, parent)

    GlobalEncoderParams global_;
    Tensor plain_entity_table_;  // only allocated when ontology_init is off
    EvolutionParams evolution_;
    LocalEncoderParams local_;
    FusionParams fusion_;
    DecoderParams decoder_;
    SubgraphCache local_cache_;
};

// Unique ascending subject ids of a fact batch.
std::vector<uint32_t> batch_subjects(const std::vector<Quadruple>& facts);

}  // namespace onto
