#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ontotkge/errors.hpp"

namespace onto {

// One temporal fact. t is a contiguous 0-based timestamp index after loading.
struct Quadruple {
    uint32_t s = 0;
    uint32_t r = 0;
    uint32_t o = 0;
    uint32_t t = 0;
    auto operator<=>(const Quadruple&) const = default;
};

// One ontological fact (ec, r, c). Original facts always target a concept;
// inverse-augmented facts may target any node.
struct OntoFact {
    uint32_t ec = 0;
    uint32_t r = 0;
    uint32_t c = 0;
    auto operator<=>(const OntoFact&) const = default;
};

// Static ontology-view graph over entity and concept nodes. Entities occupy
// ids [0, num_entities), concepts [num_entities, num_entities+num_concepts).
struct OntologyGraph {
    uint32_t num_entities = 0;
    uint32_t num_concepts = 0;
    uint32_t num_relations = 0;  // base relations, before inverse augmentation
    bool augmented = false;
    std::vector<OntoFact> facts;

    // Derived, rebuilt by finalize().
    std::vector<uint32_t> in_degree;               // per node, over `facts`
    std::vector<std::vector<uint32_t>> neighbors;  // undirected adjacency

    uint32_t num_nodes() const { return num_entities + num_concepts; }
    uint32_t total_relations() const { return augmented ? 2 * num_relations : num_relations; }
    void finalize();
};

// Adds (c, r + num_relations, ec) for every original fact. Callable once.
OntologyGraph augment_inverse(const OntologyGraph& g);

// Node set and retained facts of the breadth-first N-hop neighborhood of a
// seed entity, treating ontology edges as undirected. Retains exactly the
// facts of g whose endpoints were both reached; hops == 0 keeps the seed
// only and no facts.
struct OntologySubgraph {
    std::vector<uint32_t> nodes;  // ascending
    std::vector<OntoFact> facts;
};
OntologySubgraph nhop_subgraph(const OntologyGraph& g, uint32_t seed, uint32_t hops);

// All facts at one timestamp plus per-entity adjacency.
struct Snapshot {
    uint32_t t = 0;
    std::vector<Quadruple> facts;
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> out;  // e -> (r, o)
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> in;   // e -> (r, s)
};

enum class Split { train, valid, test };
std::string_view split_name(Split s);

struct DatasetBundle {
    std::vector<Quadruple> train, valid, test;
    uint32_t entity_count = 0;
    uint32_t relation_count = 0;   // base relations
    uint32_t timestamp_count = 0;  // contiguous indices across all splits
    std::vector<int64_t> raw_timestamps;  // index -> raw file value
    bool augmented = false;
    OntologyGraph ontology;
    std::vector<uint32_t> train_degree;  // original training facts touching each entity

    const std::vector<Quadruple>& split(Split s) const;
    std::vector<Quadruple>& split(Split s);
    uint32_t total_relations() const { return augmented ? 2 * relation_count : relation_count; }

    // Recomputes train_degree from the original (non-inverse) training facts.
    void compute_train_degree();
};

// Reads train.txt/valid.txt/test.txt (TSV s,r,o,t), stat.txt
// (entity_count, relation_count) and ontology.txt (TSV ec,r,c) from dir.
// Raw timestamps are mapped to contiguous indices across all splits.
// Validates id ranges, split ordering and non-emptiness.
DatasetBundle load_dataset(const std::filesystem::path& dir);

// Writes the bundle back in the exact load_dataset file formats, using the
// recorded raw timestamp values.
void write_dataset(const std::filesystem::path& dir, const DatasetBundle& bundle,
                   const std::vector<std::string>* node_names = nullptr);

// Adds (o, r + relation_count, s, t) for every fact of every split and the
// ontology inverses. Callable once per bundle.
DatasetBundle augment_inverse(const DatasetBundle& bundle);

// One snapshot per timestamp between the split's first and last fact,
// ascending; timestamps without facts yield empty snapshots so positions
// stay aligned with timestamp indices.
std::vector<Snapshot> snapshots(const DatasetBundle& bundle, Split split);

// Table-style degree buckets; half-open [lo,hi) with a final [100,inf)
// bucket, labelled in the conventional closed notation.
inline constexpr std::array<std::string_view, 7> kDegreeBucketLabels = {
    "[0,10]", "[10,20]", "[20,30]", "[30,40]", "[40,50]", "[50,100]", "[100,max]"};
int degree_bucket_index(uint32_t degree);
std::string_view degree_bucket_label(uint32_t degree);
std::string_view degree_bucket(const DatasetBundle& bundle, uint32_t entity);

}  // namespace onto
