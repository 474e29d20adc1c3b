#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "ontotkge/synthgen.hpp"

using namespace onto;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("one template, one timestamp, one fact per step") {
    SynthSpec spec;
    spec.concepts = 2;
    spec.entities_per_concept = 4;
    spec.relations = 1;
    spec.templates = {{0, 0, 1}};
    spec.timestamps = 1;
    spec.facts_per_step = 1;
    DatasetBundle b = generate(spec);
    REQUIRE(b.train.size() == 1);
    CHECK(b.valid.empty());
    CHECK(b.test.empty());
    const Quadruple& q = b.train[0];
    CHECK(synth_concept_of(spec, q.s) == 0);
    CHECK(q.r == 0);
    CHECK(synth_concept_of(spec, q.o) == 1);
}

TEST_CASE("the same seed produces byte-identical files") {
    SynthSpec spec;
    spec.concepts = 6;
    spec.entities_per_concept = 5;
    spec.timestamps = 15;
    spec.facts_per_step = 12;
    spec.seed = 404;

    fs::path a = fs::temp_directory_path() / "onto_synth_a";
    fs::path b = fs::temp_directory_path() / "onto_synth_b";
    fs::remove_all(a);
    fs::remove_all(b);
    generate_files(spec, a);
    generate_files(spec, b);
    for (const char* name :
         {"train.txt", "valid.txt", "test.txt", "stat.txt", "ontology.txt",
          "ontology_names.txt"}) {
        CHECK(slurp(a / name) == slurp(b / name));
        CHECK(!slurp(a / name).empty());
    }

    spec.seed = 405;
    fs::path c = fs::temp_directory_path() / "onto_synth_c";
    fs::remove_all(c);
    generate_files(spec, c);
    CHECK(slurp(a / "train.txt") != slurp(c / "train.txt"));
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
}

TEST_CASE("sparse entities stay below the popular training degree (counting oracle)") {
    SynthSpec spec;  // defaults: 20 concepts x 10 entities, 50 steps x 100 facts
    DatasetBundle b = generate(spec);

    uint32_t max_sparse = 0, min_popular = UINT32_MAX;
    for (uint32_t e = 0; e < b.entity_count; ++e) {
        if (synth_is_popular(spec, e)) {
            min_popular = std::min(min_popular, b.train_degree[e]);
        } else {
            max_sparse = std::max(max_sparse, b.train_degree[e]);
        }
    }
    CHECK(max_sparse < min_popular);
    // the sparse block genuinely sits in the lowest degree bucket range
    CHECK(max_sparse < 20);
    CHECK(min_popular >= 50);
}

TEST_CASE("every fact conforms to a template") {
    SynthSpec spec;
    spec.concepts = 8;
    spec.entities_per_concept = 6;
    spec.timestamps = 20;
    spec.facts_per_step = 25;
    DatasetBundle b = generate(spec);
    auto templates = default_templates(spec);

    std::map<std::pair<uint32_t, uint32_t>, uint32_t> object_concept_of;
    for (const SynthTemplate& t : templates) {
        object_concept_of[{t.subject_concept, t.relation}] = t.object_concept;
    }
    for (const auto* split : {&b.train, &b.valid, &b.test}) {
        for (const Quadruple& q : *split) {
            auto key = std::pair{synth_concept_of(spec, q.s), q.r};
            REQUIRE(object_concept_of.count(key) == 1);
            CHECK(synth_concept_of(spec, q.o) == object_concept_of[key]);
            CHECK(q.s != q.o);
        }
    }
}

TEST_CASE("split timestamp ranges are disjoint and ordered") {
    SynthSpec spec;
    spec.timestamps = 30;
    DatasetBundle b = generate(spec);
    auto max_t = [](const std::vector<Quadruple>& qs) {
        uint32_t m = 0;
        for (const Quadruple& q : qs) m = std::max(m, q.t);
        return m;
    };
    auto min_t = [](const std::vector<Quadruple>& qs) {
        uint32_t m = UINT32_MAX;
        for (const Quadruple& q : qs) m = std::min(m, q.t);
        return m;
    };
    CHECK(max_t(b.train) < min_t(b.valid));
    CHECK(max_t(b.valid) < min_t(b.test));
}

TEST_CASE("a concept-aware oracle reaches every generated gold object") {
    SynthSpec spec;
    spec.concepts = 10;
    spec.entities_per_concept = 10;
    spec.timestamps = 20;
    spec.facts_per_step = 30;
    DatasetBundle b = generate(spec);
    auto templates = default_templates(spec);
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> object_concept_of;
    for (const SynthTemplate& t : templates) {
        object_concept_of[{t.subject_concept, t.relation}] = t.object_concept;
    }

    // rank the object concept's entities (id order) above everything else
    int64_t hits = 0;
    for (const Quadruple& q : b.test) {
        uint32_t object_concept = object_concept_of.at({synth_concept_of(spec, q.s), q.r});
        uint32_t base = object_concept * spec.entities_per_concept;
        int64_t rank = q.o - base + 1;
        REQUIRE(rank >= 1);
        REQUIRE(rank <= spec.entities_per_concept);
        if (rank <= 10) ++hits;
    }
    double ratio = std::min(1.0, 10.0 / spec.entities_per_concept);
    CHECK(static_cast<double>(hits) / static_cast<double>(b.test.size()) >= ratio);
}

TEST_CASE("spec json round-trip and validation") {
    SynthSpec spec;
    spec.concepts = 7;
    spec.templates = {{0, 1, 3}, {2, 0, 5}};
    spec.seed = 99;
    SynthSpec back = synth_spec_from_json(synth_spec_to_json(spec));
    CHECK(back.concepts == 7);
    CHECK(back.seed == 99);
    REQUIRE(back.templates.size() == 2);
    CHECK(back.templates[1].object_concept == 5);

    CHECK_THROWS_AS(synth_spec_from_json("{\"bogus\": 1}"), ConfigError);
    CHECK_THROWS_AS(synth_spec_from_json("not json"), ConfigError);

    SynthSpec bad;
    bad.templates = {{99, 0, 1}};
    CHECK_THROWS_AS(generate(bad), ConfigError);
}
