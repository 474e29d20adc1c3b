// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// criteria hold. Heavier end-to-end checks than the unit suites; expected
// wall time is a few minutes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "ontotkge/checkpoint.hpp"
#include "ontotkge/eval.hpp"
#include "ontotkge/selfcheck.hpp"
#include "ontotkge/synthgen.hpp"
#include "ontotkge/trainer.hpp"

using namespace onto;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Gradient suite: every differentiable op family vs central finite
//    differences, rel err < 1e-4 on >= 20 random instances each, < 60 s.
// ---------------------------------------------------------------------------
void criterion_1() {
    auto start = Clock::now();
    auto results = selfcheck::gradient_suite(20, 42);
    double elapsed = seconds_since(start);
    bool all = true;
    double worst = 0;
    for (const auto& r : results) {
        all = all && r.pass;
        worst = std::max(worst, r.max_rel_err);
    }
    bool pass = all && elapsed < 60.0 && results.size() >= 10;
    report(1, pass,
           fmt("gradient suite: %zu op families x 20 instances, max rel err %.3g, %.2fs",
               results.size(), worst, elapsed));
}

// ---------------------------------------------------------------------------
// 2. Entailment geometry: exact zero inside the cone, monotone under
//    rotation off the ray, pinned reference values.
// ---------------------------------------------------------------------------
void criterion_2() {
    const double k = 0.5;
    bool zero_inside = true;
    SplitMix64 rng(2024);
    int sampled = 0;
    while (sampled < 100) {
        Tensor parent = uniform_init({4}, -1.5, 1.5, rng);
        double norm = std::sqrt(sum_all(mul(parent, parent)).value());
        if (norm <= k + 1e-3) continue;
        ++sampled;
        double lambda = rng.uniform(1.0, 6.0);
        Tensor emb = zeros({2, 4});
        for (int64_t j = 0; j < 4; ++j) {
            emb.set(j, parent.at(j));
            emb.set(4 + j, lambda * parent.at(j));
        }
        EntailmentResult r = entailment_loss(emb, {{1, 0}}, k);
        zero_inside = zero_inside && r.loss.value() == 0.0;
    }

    bool monotone = true;
    double prev = -1.0;
    for (int step = 0; step <= 100; ++step) {
        double angle = M_PI * static_cast<double>(step) / 100.0;
        Tensor emb = matrix_of(2, 2, {1.2, 0.0, 2.0 * std::cos(angle), 2.0 * std::sin(angle)});
        double loss = entailment_loss(emb, {{1, 0}}, k).loss.value();
        monotone = monotone && loss >= prev - 1e-12;
        prev = loss;
    }

    double xi0 = cone_angle(vector_of({1, 0}), vector_of({2, 0})).value();
    double xi90 = cone_angle(vector_of({1, 0}), vector_of({1, 1})).value();
    double psi = half_aperture(vector_of({1, 0}), 0.5).value();
    bool hand = std::abs(xi0) <= 1e-9 && std::abs(xi90 - M_PI / 2) <= 1e-9 &&
                std::abs(psi - M_PI / 6) <= 1e-9;

    report(2, zero_inside && monotone && hand,
           fmt("entailment geometry: in-cone loss exact zero (100 samples) %s, rotation "
               "monotone %s, reference angles within 1e-9 %s",
               zero_inside ? "yes" : "NO", monotone ? "yes" : "NO", hand ? "yes" : "NO"));
}

// ---------------------------------------------------------------------------
// 3. Evaluator vs brute-force sort-and-filter oracle on a <= 100-fact
//    dataset, both query directions, exact agreement.
// ---------------------------------------------------------------------------
int64_t oracle_rank(const std::vector<double>& scores, int64_t gold,
                    const std::vector<uint32_t>& known_true) {
    std::set<int64_t> removed(known_true.begin(), known_true.end());
    removed.erase(gold);
    std::vector<std::pair<double, int64_t>> candidates;
    for (int64_t e = 0; e < static_cast<int64_t>(scores.size()); ++e) {
        if (!removed.count(e)) candidates.emplace_back(scores[static_cast<size_t>(e)], e);
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    int64_t rank = 1;
    for (const auto& [score, e] : candidates) {
        if (e == gold) break;
        if (score > scores[static_cast<size_t>(gold)]) ++rank;
    }
    return rank;
}

void criterion_3() {
    SynthSpec spec;
    spec.concepts = 4;
    spec.entities_per_concept = 5;
    spec.relations = 2;
    spec.timestamps = 10;
    spec.facts_per_step = 4;  // 40 raw facts in total
    spec.seed = 11;
    DatasetBundle raw = generate(spec);
    size_t raw_total = raw.train.size() + raw.valid.size() + raw.test.size();
    DatasetBundle aug = augment_inverse(raw);

    RunConfig cfg;
    cfg.dim = 8;
    cfg.layers = 1;
    cfg.channels = 4;
    cfg.epochs = 2;
    Model model(cfg.model_config(), aug);
    train_model(model, aug, cfg);

    std::map<std::tuple<uint32_t, uint32_t, uint32_t>, std::vector<uint32_t>> filter;
    for (Split s : {Split::train, Split::valid, Split::test}) {
        for (const Quadruple& q : aug.split(s)) filter[{q.s, q.r, q.t}].push_back(q.o);
    }
    std::vector<Snapshot> timeline(aug.timestamp_count);
    for (uint32_t t = 0; t < aug.timestamp_count; ++t) timeline[t].t = t;
    for (Split s : {Split::train, Split::valid, Split::test}) {
        for (const Quadruple& q : aug.split(s)) timeline[q.t].facts.push_back(q);
    }

    int64_t mismatches = 0, checked = 0;
    for (Split split : {Split::valid, Split::test}) {
        RankReport report_out = evaluate(model, aug, split);
        std::map<uint32_t, std::vector<Quadruple>> by_time;
        for (const Quadruple& q : aug.split(split)) by_time[q.t].push_back(q);
        size_t cursor = 0;
        double mrr = 0;
        for (const auto& [t, queries] : by_time) {
            std::vector<const Snapshot*> history;
            for (int64_t h = static_cast<int64_t>(t) - cfg.history; h < static_cast<int64_t>(t);
                 ++h) {
                if (h >= 0) history.push_back(&timeline[static_cast<size_t>(h)]);
            }
            Model::Forward f = model.forward(history, batch_subjects(queries));
            for (const Quadruple& q : queries) {
                Tensor row = model.score_queries(f, {q.s}, {q.r});
                std::vector<double> scores(row.data(), row.data() + row.numel());
                int64_t expect = oracle_rank(scores, q.o, filter[{q.s, q.r, q.t}]);
                const QueryRank& got = report_out.per_query[cursor++];
                if (got.rank != expect || !(got.fact == q)) ++mismatches;
                mrr += 1.0 / static_cast<double>(expect);
                ++checked;
            }
        }
        mrr /= static_cast<double>(report_out.num_queries);
        if (std::abs(mrr - report_out.mrr) > 1e-15) ++mismatches;
    }
    report(3, mismatches == 0 && raw_total <= 100,
           fmt("evaluator oracle: %lld queries (both directions) on %zu raw facts, %lld "
               "mismatches",
               static_cast<long long>(checked), raw_total,
               static_cast<long long>(mismatches)));
}

// ---------------------------------------------------------------------------
// 4. Overfit: 20 entities / 4 relations / 10 timestamps, d=32, training
//    Hits@1 >= 0.95 within 200 epochs, < 2 min.
// ---------------------------------------------------------------------------
void criterion_4() {
    auto start = Clock::now();
    SynthSpec spec;
    spec.concepts = 4;
    spec.entities_per_concept = 5;  // 20 entities
    spec.relations = 4;
    spec.timestamps = 10;
    spec.facts_per_step = 6;
    spec.seed = 4;
    DatasetBundle aug = augment_inverse(generate(spec));

    RunConfig cfg;
    cfg.dim = 32;
    cfg.epochs = 200;
    Model model(cfg.model_config(), aug);

    double reached = 0;
    int64_t reached_epoch = -1;
    train_model(model, aug, cfg, nullptr, [&](int64_t epoch, Model& m) {
        if (epoch % 10 != 0 && epoch != cfg.epochs) return false;
        double h1 = evaluate(m, aug, Split::train).hits1;
        if (h1 >= 0.95) {
            reached = h1;
            reached_epoch = epoch;
            return true;
        }
        return false;
    });
    double elapsed = seconds_since(start);
    report(4, reached_epoch > 0 && elapsed < 120.0,
           fmt("overfit: training hits@1 %.3f at epoch %lld (20 entities, d=32), %.1fs",
               reached, static_cast<long long>(reached_epoch), elapsed));
}

// ---------------------------------------------------------------------------
// 5 & 6 share the sparse-entity benchmark dataset.
// ---------------------------------------------------------------------------
SynthSpec benchmark_spec() {
    SynthSpec spec;  // defaults: 20 concepts x 10 entities, popular 0.3,
                     // 50 steps x 100 facts, half of test queries sparse
    spec.seed = 7;
    return spec;
}

RunConfig benchmark_config(uint64_t seed) {
    RunConfig cfg;
    cfg.dim = 32;
    cfg.epochs = 15;
    cfg.seed = seed;
    return cfg;
}

double trained_test_mrr(const DatasetBundle& aug, const RunConfig& cfg, RankReport* out) {
    Model model(cfg.model_config(), aug);
    train_model(model, aug, cfg);
    RankReport r = evaluate(model, aug, Split::test);
    if (out) *out = r;
    return r.mrr;
}

void criterion_5(const DatasetBundle& aug, const RankReport& full_report) {
    auto start = Clock::now();
    RunConfig bare_cfg = benchmark_config(42);
    bare_cfg.random_init = true;
    bare_cfg.no_local_encoder = true;
    bare_cfg.alpha1 = 0;
    bare_cfg.alpha2 = 0;
    RankReport bare_report;
    trained_test_mrr(aug, bare_cfg, &bare_report);
    double elapsed = seconds_since(start);

    const BucketStats& full_sparse = full_report.buckets[0];
    const BucketStats& bare_sparse = bare_report.buckets[0];
    const BucketStats& full_top = full_report.buckets[6];
    const BucketStats& bare_top = bare_report.buckets[6];
    double sparse_margin = full_sparse.mrr - bare_sparse.mrr;
    double top_margin = full_top.mrr - bare_top.mrr;
    bool populated = full_sparse.count > 0 && full_top.count > 0;
    bool pass = populated && sparse_margin >= 0.10 && sparse_margin > top_margin &&
                elapsed < 600.0;
    report(5, pass,
           fmt("sparse-entity margin: [0,10) mrr %.3f vs %.3f (margin %.3f, need >= 0.10); "
               "[100,max] margin %.3f (must be smaller); %.0fs",
               full_sparse.mrr, bare_sparse.mrr, sparse_margin, top_margin, elapsed));
}

void criterion_6(const DatasetBundle& aug, double full_seed42_mrr) {
    double full_sum = full_seed42_mrr, wocl_sum = 0, wohie_sum = 0;
    for (uint64_t seed : {42ull, 43ull, 44ull}) {
        if (seed != 42) full_sum += trained_test_mrr(aug, benchmark_config(seed), nullptr);
        RunConfig wocl = benchmark_config(seed);
        wocl.alpha2 = 0;
        wocl_sum += trained_test_mrr(aug, wocl, nullptr);
        RunConfig wohie = benchmark_config(seed);
        wohie.alpha1 = 0;
        wohie_sum += trained_test_mrr(aug, wohie, nullptr);
    }
    double full = full_sum / 3, wocl = wocl_sum / 3, wohie = wohie_sum / 3;
    bool pass = wocl <= full + 1e-9 && wohie <= full + 1e-9;
    report(6, pass,
           fmt("ablation ordering over 3 seeds: full mrr %.4f, w/o contrastive %.4f, w/o "
               "entailment %.4f (neither may exceed full)",
               full, wocl, wohie));
}

// ---------------------------------------------------------------------------
// 7. Determinism: identical config and seed give bit-identical logs
//    (timing column excluded; wall time is not reproducible) and identical
//    evaluation JSON.
// ---------------------------------------------------------------------------
std::string strip_seconds_column(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        out << line.substr(0, line.rfind(',')) << '\n';
    }
    return out.str();
}

void criterion_7() {
    SynthSpec spec;
    spec.concepts = 6;
    spec.entities_per_concept = 6;
    spec.timestamps = 15;
    spec.facts_per_step = 15;
    spec.seed = 70;
    auto run = [&] {
        DatasetBundle aug = augment_inverse(generate(spec));
        RunConfig cfg;
        cfg.dim = 16;
        cfg.epochs = 3;
        cfg.channels = 8;
        Model model(cfg.model_config(), aug);
        TrainOutput t = train_model(model, aug, cfg);
        RankReport r = evaluate(model, aug, Split::test);
        return std::pair{training_log_csv(t.log), report_json(r, true)};
    };
    auto [log_a, json_a] = run();
    auto [log_b, json_b] = run();
    bool logs_equal = strip_seconds_column(log_a) == strip_seconds_column(log_b);
    bool json_equal = json_a == json_b;
    report(7, logs_equal && json_equal,
           fmt("determinism: loss/metric log columns bit-identical %s, evaluation JSON "
               "bit-identical %s",
               logs_equal ? "yes" : "NO", json_equal ? "yes" : "NO"));
}

// ---------------------------------------------------------------------------
// 8. Complexity scaling: encoder cost grows at most linearly in the
//    ontology fact counts (log-log slope <= 1.15, R^2 > 0.95).
// ---------------------------------------------------------------------------
struct FitResult {
    double slope = 0, r2 = 0;
};

FitResult loglog_fit(const std::vector<double>& sizes, const std::vector<double>& times) {
    size_t n = sizes.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        double x = std::log(sizes[i]), y = std::log(times[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double dn = static_cast<double>(n);
    double cov = sxy - sx * sy / dn;
    double varx = sxx - sx * sx / dn;
    double vary = syy - sy * sy / dn;
    FitResult fit;
    fit.slope = cov / varx;
    fit.r2 = (cov * cov) / (varx * vary);
    return fit;
}

double median_seconds(const std::function<void()>& body, int reps, int inner) {
    std::vector<double> times;
    body();  // warmup
    for (int r = 0; r < reps; ++r) {
        auto start = Clock::now();
        for (int i = 0; i < inner; ++i) body();
        times.push_back(seconds_since(start) / inner);
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

void criterion_8() {
    // Global encoder: fact count scales with the concept count.
    std::vector<double> global_sizes, global_times;
    for (uint32_t concepts : {10u, 20u, 40u, 80u, 160u}) {
        SynthSpec spec;
        spec.concepts = concepts;
        spec.entities_per_concept = 10;
        spec.timestamps = 6;
        spec.facts_per_step = 10;
        spec.seed = 80;
        DatasetBundle aug = augment_inverse(generate(spec));
        GraphView view = make_graph_view(aug.ontology);
        SplitMix64 rng(81);
        GlobalEncoderParams params = make_global_encoder(
            16, aug.ontology.num_nodes(), aug.ontology.total_relations(), 2, Composition::sub,
            rng);
        int inner = std::max(1, 4000 / static_cast<int>(aug.ontology.facts.size()));
        double t = median_seconds(
            [&] { encode_ontology(params, view, aug.entity_count); }, 7, inner);
        global_sizes.push_back(static_cast<double>(aug.ontology.facts.size()));
        global_times.push_back(t);
    }
    FitResult global_fit = loglog_fit(global_sizes, global_times);

    // Local encoder: subgraph fact count scales with entities per concept.
    std::vector<double> local_sizes, local_times;
    for (uint32_t per : {5u, 10u, 20u, 40u, 80u}) {
        SynthSpec spec;
        spec.concepts = 16;
        spec.entities_per_concept = per;
        spec.timestamps = 6;
        spec.facts_per_step = 10;
        spec.seed = 82;
        DatasetBundle aug = augment_inverse(generate(spec));
        SplitMix64 rng(83);
        LocalEncoderParams params = make_local_encoder(
            16, aug.ontology.num_nodes(), aug.ontology.total_relations(), 2, Composition::sub,
            rng);
        SubgraphCache cache(&aug.ontology, 2);
        std::vector<uint32_t> subjects;
        for (uint32_t c = 0; c < spec.concepts; ++c) subjects.push_back(c * per);
        double mean_facts = 0;
        for (uint32_t s : subjects) {
            mean_facts += static_cast<double>(cache.get(s).view.src.size());
        }
        mean_facts /= static_cast<double>(subjects.size());
        int inner = std::max(1, 200 / static_cast<int>(per));
        double t = median_seconds(
            [&] { encode_local(params, cache, aug.entity_count, subjects); }, 7, inner);
        local_sizes.push_back(mean_facts);
        local_times.push_back(t);
    }
    FitResult local_fit = loglog_fit(local_sizes, local_times);

    bool pass = global_fit.slope <= 1.15 && global_fit.r2 > 0.95 && local_fit.slope <= 1.15 &&
                local_fit.r2 > 0.95;
    report(8, pass,
           fmt("complexity scaling: global slope %.3f (R^2 %.3f), local slope %.3f (R^2 %.3f); "
               "both slopes must be <= 1.15",
               global_fit.slope, global_fit.r2, local_fit.slope, local_fit.r2));
}

// ---------------------------------------------------------------------------
// 9. Checkpoint round-trip reproduces evaluation metrics bit-exactly.
// ---------------------------------------------------------------------------
void criterion_9() {
    SynthSpec spec;
    spec.concepts = 5;
    spec.entities_per_concept = 5;
    spec.timestamps = 12;
    spec.facts_per_step = 8;
    spec.seed = 90;
    DatasetBundle aug = augment_inverse(generate(spec));
    RunConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 2;
    cfg.channels = 8;
    Model model(cfg.model_config(), aug);
    train_model(model, aug, cfg);
    std::string before = report_json(evaluate(model, aug, Split::test), true);

    auto path = std::filesystem::temp_directory_path() / "onto_acceptance_ckpt.bin";
    save_checkpoint(path, model, cfg);
    LoadedCheckpoint loaded = load_checkpoint(path, aug);
    std::string after = report_json(evaluate(*loaded.model, aug, Split::test), true);
    std::filesystem::remove(path);
    report(9, before == after,
           fmt("checkpoint round-trip: evaluation JSON bit-identical %s",
               before == after ? "yes" : "NO"));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();

    DatasetBundle benchmark = augment_inverse(generate(benchmark_spec()));
    RankReport full_report;
    double full42 = trained_test_mrr(benchmark, benchmark_config(42), &full_report);
    criterion_5(benchmark, full_report);
    criterion_6(benchmark, full42);

    criterion_7();
    criterion_8();
    criterion_9();

    if (g_failures == 0) {
        std::printf("all 9 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", g_failures);
    return 1;
}
