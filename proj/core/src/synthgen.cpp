#include "ontotkge/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ontotkge/rng.hpp"

namespace onto {

namespace {

using nlohmann::json;

uint32_t super_concept_count(const SynthSpec& spec) {
    return std::max<uint32_t>(1, (spec.concepts + 4) / 5);
}

uint32_t popular_per_concept(const SynthSpec& spec) {
    auto p = static_cast<uint32_t>(
        std::lround(spec.popular_fraction * static_cast<double>(spec.entities_per_concept)));
    return std::clamp<uint32_t>(p, 1, spec.entities_per_concept);
}

}  // namespace

uint32_t synth_num_entities(const SynthSpec& spec) {
    return spec.concepts * spec.entities_per_concept;
}

uint32_t synth_concept_of(const SynthSpec& spec, uint32_t entity) {
    return entity / spec.entities_per_concept;
}

bool synth_is_popular(const SynthSpec& spec, uint32_t entity) {
    return entity % spec.entities_per_concept < popular_per_concept(spec);
}

std::vector<SynthTemplate> default_templates(const SynthSpec& spec) {
    std::vector<SynthTemplate> templates;
    templates.reserve(spec.concepts);
    for (uint32_t c = 0; c < spec.concepts; ++c) {
        uint32_t object_concept = (c * 7 + 3) % spec.concepts;
        if (object_concept == c) object_concept = (object_concept + 1) % spec.concepts;
        templates.push_back(SynthTemplate{c, c % spec.relations, object_concept});
    }
    return templates;
}

SynthSpec synth_spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("synth spec: invalid JSON: ") + e.what());
    }
    SynthSpec spec;
    for (const auto& [key, value] : j.items()) {
        if (key == "concepts") spec.concepts = value.get<uint32_t>();
        else if (key == "entities_per_concept") spec.entities_per_concept = value.get<uint32_t>();
        else if (key == "popular_fraction") spec.popular_fraction = value.get<double>();
        else if (key == "relations") spec.relations = value.get<uint32_t>();
        else if (key == "timestamps") spec.timestamps = value.get<uint32_t>();
        else if (key == "facts_per_step") spec.facts_per_step = value.get<uint32_t>();
        else if (key == "sparse_test_fraction") spec.sparse_test_fraction = value.get<double>();
        else if (key == "sparse_test_object_fraction") {
            spec.sparse_test_object_fraction = value.get<double>();
        }
        else if (key == "popular_bias") spec.popular_bias = value.get<double>();
        else if (key == "train_ts_fraction") spec.train_ts_fraction = value.get<double>();
        else if (key == "valid_ts_fraction") spec.valid_ts_fraction = value.get<double>();
        else if (key == "seed") spec.seed = value.get<uint64_t>();
        else if (key == "templates") {
            for (const auto& t : value) {
                if (!t.is_array() || t.size() != 3) {
                    throw ConfigError("synth spec: template entries must be [subject_concept, "
                                      "relation, object_concept]");
                }
                spec.templates.push_back(SynthTemplate{t[0].get<uint32_t>(),
                                                       t[1].get<uint32_t>(),
                                                       t[2].get<uint32_t>()});
            }
        } else {
            throw ConfigError("synth spec: unknown key '" + key + "'");
        }
    }
    return spec;
}

std::string synth_spec_to_json(const SynthSpec& spec) {
    json j;
    j["concepts"] = spec.concepts;
    j["entities_per_concept"] = spec.entities_per_concept;
    j["popular_fraction"] = spec.popular_fraction;
    j["relations"] = spec.relations;
    j["timestamps"] = spec.timestamps;
    j["facts_per_step"] = spec.facts_per_step;
    j["sparse_test_fraction"] = spec.sparse_test_fraction;
    j["sparse_test_object_fraction"] = spec.sparse_test_object_fraction;
    j["popular_bias"] = spec.popular_bias;
    j["train_ts_fraction"] = spec.train_ts_fraction;
    j["valid_ts_fraction"] = spec.valid_ts_fraction;
    j["seed"] = spec.seed;
    json templates = json::array();
    for (const SynthTemplate& t : spec.templates) {
        templates.push_back({t.subject_concept, t.relation, t.object_concept});
    }
    j["templates"] = templates;
    return j.dump(2) + "\n";
}

DatasetBundle generate(const SynthSpec& spec) {
    if (spec.concepts < 1 || spec.entities_per_concept < 1 || spec.relations < 1) {
        throw ConfigError("synth spec: concept, entity and relation counts must be positive");
    }
    if (spec.popular_fraction <= 0.0 || spec.popular_fraction >= 1.0) {
        throw ConfigError("synth spec: popular_fraction must lie in (0,1)");
    }
    std::vector<SynthTemplate> templates =
        spec.templates.empty() ? default_templates(spec) : spec.templates;
    for (const SynthTemplate& t : templates) {
        if (t.subject_concept >= spec.concepts || t.object_concept >= spec.concepts ||
            t.relation >= spec.relations) {
            throw ConfigError("synth spec: template references unknown concept or relation");
        }
    }
    if (spec.timestamps < 1) throw ConfigError("synth spec: at least one timestamp required");
    uint32_t t_train = std::clamp<uint32_t>(
        static_cast<uint32_t>(std::lround(spec.train_ts_fraction * spec.timestamps)), 1,
        spec.timestamps);
    uint32_t remaining = spec.timestamps - t_train;
    uint32_t t_valid = std::min<uint32_t>(
        remaining,
        std::max<uint32_t>(1, static_cast<uint32_t>(
                                  std::lround(spec.valid_ts_fraction * spec.timestamps))));
    if (remaining >= 2 && t_valid == remaining) t_valid = remaining - 1;  // keep a test slot

    uint32_t num_entities = synth_num_entities(spec);
    uint32_t popular = popular_per_concept(spec);
    SplitMix64 rng(spec.seed);

    auto draw_entity = [&](uint32_t concept_id, bool force_sparse, bool bias_popular) {
        uint32_t base = concept_id * spec.entities_per_concept;
        uint32_t sparse_count = spec.entities_per_concept - popular;
        if (force_sparse && sparse_count > 0) {
            return base + popular + static_cast<uint32_t>(rng.bounded(sparse_count));
        }
        bool pick_popular = sparse_count == 0 ||
                            (bias_popular && rng.bernoulli(spec.popular_bias));
        if (pick_popular) return base + static_cast<uint32_t>(rng.bounded(popular));
        return base + popular + static_cast<uint32_t>(rng.bounded(sparse_count));
    };

    DatasetBundle bundle;
    bundle.entity_count = num_entities;
    bundle.relation_count = spec.relations;
    bundle.timestamp_count = spec.timestamps;
    bundle.raw_timestamps.resize(spec.timestamps);
    for (uint32_t t = 0; t < spec.timestamps; ++t) bundle.raw_timestamps[t] = t;

    for (uint32_t t = 0; t < spec.timestamps; ++t) {
        bool test_phase = t >= t_train + t_valid;
        for (uint32_t f = 0; f < spec.facts_per_step; ++f) {
            const SynthTemplate& tmpl = templates[rng.bounded(templates.size())];
            bool sparse_subject = test_phase && rng.bernoulli(spec.sparse_test_fraction);
            bool sparse_object = test_phase && rng.bernoulli(spec.sparse_test_object_fraction);
            uint32_t s = draw_entity(tmpl.subject_concept, sparse_subject, true);
            uint32_t o = draw_entity(tmpl.object_concept, sparse_object, true);
            while (o == s) o = draw_entity(tmpl.object_concept, sparse_object, true);
            Quadruple q{s, tmpl.relation, o, t};
            if (t < t_train) bundle.train.push_back(q);
            else if (t < t_train + t_valid) bundle.valid.push_back(q);
            else bundle.test.push_back(q);
        }
    }

    // Ontology: every entity belongs to its concept; leaf concepts roll up
    // to a small second level.
    OntologyGraph& g = bundle.ontology;
    uint32_t supers = super_concept_count(spec);
    g.num_entities = num_entities;
    g.num_concepts = spec.concepts + supers;
    g.num_relations = 2;  // 0: concept membership, 1: concept hierarchy
    for (uint32_t e = 0; e < num_entities; ++e) {
        g.facts.push_back(OntoFact{e, 0, num_entities + synth_concept_of(spec, e)});
    }
    for (uint32_t c = 0; c < spec.concepts; ++c) {
        g.facts.push_back(OntoFact{num_entities + c, 1, num_entities + spec.concepts + c % supers});
    }
    g.finalize();
    bundle.compute_train_degree();
    return bundle;
}

std::vector<std::string> synth_node_names(const SynthSpec& spec) {
    std::vector<std::string> names;
    uint32_t num_entities = synth_num_entities(spec);
    names.reserve(num_entities + spec.concepts + super_concept_count(spec));
    for (uint32_t e = 0; e < num_entities; ++e) {
        names.push_back((synth_is_popular(spec, e) ? "entity_popular_" : "entity_sparse_") +
                        std::to_string(e));
    }
    for (uint32_t c = 0; c < spec.concepts; ++c) names.push_back("concept_" + std::to_string(c));
    for (uint32_t s = 0; s < super_concept_count(spec); ++s) {
        names.push_back("super_concept_" + std::to_string(s));
    }
    return names;
}

void generate_files(const SynthSpec& spec, const std::filesystem::path& out_dir) {
    DatasetBundle bundle = generate(spec);
    std::vector<std::string> names = synth_node_names(spec);
    write_dataset(out_dir, bundle, &names);
}

}  // namespace onto
