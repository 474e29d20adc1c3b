#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ontotkge/dataset.hpp"

namespace onto {

// Behavioral rule: facts pair a subject from `subject_concept` with an
// object from `object_concept` under `relation`. Relations are shared by
// several templates with different object concepts, so the object concept
// is only predictable from the subject's concept plus the relation.
struct SynthTemplate {
    uint32_t subject_concept = 0;
    uint32_t relation = 0;
    uint32_t object_concept = 0;
};

// Parameters of the synthetic benchmark. Entities split into a popular
// block (drawn often during training) and a sparse remainder; test
// timestamps also query sparse subjects, whose answers follow the same
// templates, so a model that transfers behavior across a concept can
// answer queries about entities it has barely seen.
struct SynthSpec {
    uint32_t concepts = 20;
    uint32_t entities_per_concept = 10;
    double popular_fraction = 0.3;
    uint32_t relations = 4;
    std::vector<SynthTemplate> templates;  // auto-derived when empty
    uint32_t timestamps = 50;
    uint32_t facts_per_step = 100;
    double sparse_test_fraction = 0.5;         // test queries with a sparse subject
    double sparse_test_object_fraction = 0.5;  // test facts with a sparse gold object
    double popular_bias = 0.9;                 // P(an endpoint is drawn popular)
    double train_ts_fraction = 0.8;
    double valid_ts_fraction = 0.1;
    uint64_t seed = 7;
};

SynthSpec synth_spec_from_json(const std::string& text);
std::string synth_spec_to_json(const SynthSpec& spec);

// Default one-template-per-concept rule set; every relation id is reused by
// several subject concepts with distinct object concepts.
std::vector<SynthTemplate> default_templates(const SynthSpec& spec);

// Entity id helpers for a given spec.
uint32_t synth_num_entities(const SynthSpec& spec);
uint32_t synth_concept_of(const SynthSpec& spec, uint32_t entity);
bool synth_is_popular(const SynthSpec& spec, uint32_t entity);

// Deterministic generation (SplitMix64 stream seeded by spec.seed); the
// same spec always yields the same bundle and therefore identical files.
DatasetBundle generate(const SynthSpec& spec);

// Node labels aligned with the generated ontology ids.
std::vector<std::string> synth_node_names(const SynthSpec& spec);

// generate() + write_dataset() with labels.
void generate_files(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace onto
