#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ontotkge/eval.hpp"
#include "ontotkge/synthgen.hpp"
#include "ontotkge/trainer.hpp"

using namespace onto;

namespace {

// Sort-and-filter oracle: materialize the candidate list, drop the filtered
// entities, sort by score descending, and locate the gold answer with ties
// resolved in its favor.
int64_t oracle_rank(const std::vector<double>& scores, int64_t gold,
                    const std::vector<uint32_t>& known_true) {
    std::set<int64_t> removed(known_true.begin(), known_true.end());
    removed.erase(gold);
    std::vector<std::pair<double, int64_t>> candidates;
    for (int64_t e = 0; e < static_cast<int64_t>(scores.size()); ++e) {
        if (removed.count(e)) continue;
        candidates.emplace_back(scores[static_cast<size_t>(e)], e);
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.first > b.first;
    });
    int64_t rank = 1;
    for (const auto& [score, e] : candidates) {
        if (e == gold) break;
        if (score > scores[static_cast<size_t>(gold)]) ++rank;
    }
    return rank;
}

DatasetBundle tiny_dataset() {
    SynthSpec spec;
    spec.concepts = 4;
    spec.entities_per_concept = 5;
    spec.relations = 2;
    spec.timestamps = 10;
    spec.facts_per_step = 4;  // <= 100 facts in total
    spec.seed = 19;
    return generate(spec);
}

}  // namespace

TEST_CASE("filtered_rank reference cases") {
    CHECK(filtered_rank({0.1, 0.9, 0.3}, 1, {}) == 1);

    // (0.9, 0.8, 0.7), gold idx2, known {0,2}: idx0 filtered away, idx1 above
    CHECK(filtered_rank({0.9, 0.8, 0.7}, 2, {0, 2}) == 2);

    // ties never hurt the gold entity
    CHECK(filtered_rank({0.5, 0.5, 0.5}, 0, {}) == 1);
    CHECK(filtered_rank({0.5, 0.5, 0.5}, 2, {}) == 1);

    CHECK_THROWS_AS(filtered_rank({0.5, 0.5}, 7, {}), DataError);
}

TEST_CASE("filtered_rank equals the sort-and-filter oracle on random instances") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        int64_t n = 3 + static_cast<int64_t>(rng.bounded(40));
        std::vector<double> scores;
        for (int64_t i = 0; i < n; ++i) {
            // coarse grid so score ties actually occur
            scores.push_back(std::floor(rng.uniform(0, 8)) / 8.0);
        }
        int64_t gold = static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(n)));
        std::vector<uint32_t> known;
        for (int64_t i = 0; i < n; ++i) {
            if (rng.bernoulli(0.2)) known.push_back(static_cast<uint32_t>(i));
        }
        known.push_back(static_cast<uint32_t>(gold));
        CHECK(filtered_rank(scores, gold, known) == oracle_rank(scores, gold, known));
    }
}

TEST_CASE("removing the filter can only worsen or preserve a rank") {
    SplitMix64 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        int64_t n = 4 + static_cast<int64_t>(rng.bounded(30));
        std::vector<double> scores;
        for (int64_t i = 0; i < n; ++i) scores.push_back(rng.uniform(-1, 1));
        int64_t gold = static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(n)));
        std::vector<uint32_t> known;
        for (int64_t i = 0; i < n; ++i) {
            if (rng.bernoulli(0.3)) known.push_back(static_cast<uint32_t>(i));
        }
        CHECK(filtered_rank(scores, gold, known) <= filtered_rank(scores, gold, {}));
    }
}

TEST_CASE("metrics are invariant under strictly monotone score transforms") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        int64_t n = 5 + static_cast<int64_t>(rng.bounded(20));
        std::vector<double> scores, transformed;
        for (int64_t i = 0; i < n; ++i) {
            double s = rng.uniform(-2, 2);
            scores.push_back(s);
            transformed.push_back(3.0 * std::tanh(s) + 7.0);  // strictly increasing
        }
        int64_t gold = static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(n)));
        std::vector<uint32_t> known{static_cast<uint32_t>(rng.bounded(static_cast<uint64_t>(n)))};
        CHECK(filtered_rank(scores, gold, known) == filtered_rank(transformed, gold, known));
    }
}

TEST_CASE("evaluate matches an independent end-to-end oracle on a small dataset") {
    DatasetBundle aug = augment_inverse(tiny_dataset());
    RunConfig cfg;
    cfg.dim = 8;
    cfg.layers = 1;
    cfg.channels = 4;
    cfg.epochs = 1;
    Model model(cfg.model_config(), aug);
    train_model(model, aug, cfg);

    RankReport report = evaluate(model, aug, Split::test);
    REQUIRE(report.num_queries == static_cast<int64_t>(aug.test.size()));

    // Independent pass: rebuild the timeline, history windows and filter
    // sets, rescore every query through the public forward API, and rank by
    // explicit sort-and-filter.
    std::vector<Snapshot> timeline(aug.timestamp_count);
    for (uint32_t t = 0; t < aug.timestamp_count; ++t) {
        timeline[t].t = t;
        timeline[t].out.resize(aug.entity_count);
        timeline[t].in.resize(aug.entity_count);
    }
    for (Split s : {Split::train, Split::valid, Split::test}) {
        for (const Quadruple& q : aug.split(s)) timeline[q.t].facts.push_back(q);
    }
    std::map<std::tuple<uint32_t, uint32_t, uint32_t>, std::vector<uint32_t>> filter;
    for (Split s : {Split::train, Split::valid, Split::test}) {
        for (const Quadruple& q : aug.split(s)) filter[{q.s, q.r, q.t}].push_back(q.o);
    }

    std::map<uint32_t, std::vector<Quadruple>> by_time;
    for (const Quadruple& q : aug.test) by_time[q.t].push_back(q);

    size_t cursor = 0;
    for (const auto& [t, queries] : by_time) {
        std::vector<const Snapshot*> history;
        for (int64_t h = static_cast<int64_t>(t) - cfg.history; h < static_cast<int64_t>(t); ++h) {
            if (h >= 0) history.push_back(&timeline[static_cast<size_t>(h)]);
        }
        Model::Forward f = model.forward(history, batch_subjects(queries));
        for (const Quadruple& q : queries) {
            Tensor row = model.score_queries(f, {q.s}, {q.r});
            std::vector<double> scores(row.data(), row.data() + row.numel());
            int64_t expect = oracle_rank(scores, q.o, filter[{q.s, q.r, q.t}]);
            REQUIRE(cursor < report.per_query.size());
            const QueryRank& got = report.per_query[cursor++];
            CHECK(got.fact == q);
            CHECK(got.rank == expect);
        }
    }

    // aggregate identities
    double mrr = 0, h1 = 0, h10 = 0;
    for (const QueryRank& qr : report.per_query) {
        mrr += 1.0 / static_cast<double>(qr.rank);
        h1 += qr.rank <= 1;
        h10 += qr.rank <= 10;
    }
    double n = static_cast<double>(report.num_queries);
    CHECK(report.mrr == doctest::Approx(mrr / n).epsilon(1e-12));
    CHECK(report.hits1 == doctest::Approx(h1 / n).epsilon(1e-12));
    CHECK(report.hits10 == doctest::Approx(h10 / n).epsilon(1e-12));
    CHECK(report.hits1 <= report.hits3);
    CHECK(report.hits3 <= report.hits10);

    int64_t bucket_total = 0;
    for (const BucketStats& b : report.buckets) bucket_total += b.count;
    CHECK(bucket_total == report.num_queries);
}

TEST_CASE("reports serialize with bucket tables and rank dumps") {
    DatasetBundle aug = augment_inverse(tiny_dataset());
    RunConfig cfg;
    cfg.dim = 8;
    cfg.layers = 1;
    cfg.channels = 4;
    cfg.epochs = 1;
    Model model(cfg.model_config(), aug);
    RankReport report = evaluate(model, aug, Split::valid);
    std::string json = report_json(report, true);
    CHECK(json.find("\"mrr\"") != std::string::npos);
    CHECK(json.find("[0,10]") != std::string::npos);
    CHECK(json.find("\"split\": \"valid\"") != std::string::npos);

    auto tmp = std::filesystem::temp_directory_path() / "onto_rank_dump.tsv";
    write_rank_dump(tmp, report);
    CHECK(std::filesystem::file_size(tmp) > 0);
    std::filesystem::remove(tmp);
}

TEST_CASE("sweep produces one row per value and keeps the test set fixed") {
    DatasetBundle raw = tiny_dataset();
    RunConfig cfg;
    cfg.dim = 8;
    cfg.layers = 1;
    cfg.channels = 4;
    cfg.epochs = 1;
    auto rows = run_sweep(cfg, raw, "J", {"0", "1"}, nullptr);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].axis == "J");
    CHECK(rows[0].value == "0");
    CHECK(rows[1].value == "1");

    auto frac = run_sweep(cfg, raw, "train_fraction", {"0.5", "1.0"}, nullptr);
    REQUIRE(frac.size() == 2);

    auto nmax = run_sweep(cfg, raw, "N", {"max"}, nullptr);
    REQUIRE(nmax.size() == 1);

    CHECK_THROWS_AS(run_sweep(cfg, raw, "bogus", {"1"}, nullptr), ConfigError);
    CHECK_THROWS_AS(run_sweep(cfg, raw, "J", {}, nullptr), ConfigError);

    std::string csv = sweep_csv(rows);
    CHECK(csv.find("axis,value,mrr,h1,h10,seconds") == 0);
}
