#include "ontotkge/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "ontotkge/trainer.hpp"

namespace onto {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// (s, r, t) -> objects observed anywhere in the dataset at that timestamp.
class TimeFilter {
public:
    TimeFilter(const DatasetBundle& bundle) {
        stride_r_ = bundle.total_relations();
        stride_t_ = bundle.timestamp_count;
        for (Split s : {Split::train, Split::valid, Split::test}) {
            for (const Quadruple& q : bundle.split(s)) {
                map_[key(q.s, q.r, q.t)].push_back(q.o);
            }
        }
    }

    const std::vector<uint32_t>& objects(uint32_t s, uint32_t r, uint32_t t) const {
        static const std::vector<uint32_t> empty;
        auto it = map_.find(key(s, r, t));
        return it == map_.end() ? empty : it->second;
    }

private:
    uint64_t key(uint32_t s, uint32_t r, uint32_t t) const {
        return (static_cast<uint64_t>(s) * stride_r_ + r) * stride_t_ + t;
    }
    uint64_t stride_r_, stride_t_;
    std::unordered_map<uint64_t, std::vector<uint32_t>> map_;
};

// One snapshot per global timestamp index with facts of every split, so
// each query sees the ground-truth history before its own timestamp.
std::vector<Snapshot> global_timeline(const DatasetBundle& bundle) {
    std::vector<Snapshot> snaps(bundle.timestamp_count);
    for (uint32_t t = 0; t < bundle.timestamp_count; ++t) {
        snaps[t].t = t;
        snaps[t].out.resize(bundle.entity_count);
        snaps[t].in.resize(bundle.entity_count);
    }
    for (Split s : {Split::train, Split::valid, Split::test}) {
        for (const Quadruple& q : bundle.split(s)) {
            snaps[q.t].facts.push_back(q);
            snaps[q.t].out[q.s].emplace_back(q.r, q.o);
            snaps[q.t].in[q.o].emplace_back(q.r, q.s);
        }
    }
    return snaps;
}

}  // namespace

int64_t filtered_rank(const std::vector<double>& scores, int64_t gold,
                      const std::vector<uint32_t>& known_true) {
    if (gold < 0 || gold >= static_cast<int64_t>(scores.size())) {
        throw DataError("filtered_rank: gold id out of range");
    }
    std::vector<uint8_t> removed(scores.size(), 0);
    for (uint32_t e : known_true) removed[e] = 1;
    removed[static_cast<size_t>(gold)] = 0;  // the gold answer always competes
    double gold_score = scores[static_cast<size_t>(gold)];
    int64_t rank = 1;
    for (size_t e = 0; e < scores.size(); ++e) {
        if (removed[e]) continue;
        if (scores[e] > gold_score) ++rank;
    }
    return rank;
}

RankReport evaluate(Model& model, const DatasetBundle& bundle, Split split) {
    if (!bundle.augmented) throw Error("evaluate requires an inverse-augmented bundle");
    RankReport report;
    report.split = split;

    TimeFilter filter(bundle);
    std::vector<Snapshot> timeline = global_timeline(bundle);

    // Group the split's queries (both directions) by timestamp.
    std::map<uint32_t, std::vector<Quadruple>> by_time;
    for (const Quadruple& q : bundle.split(split)) by_time[q.t].push_back(q);

    int64_t window = model.config().history_window;
    for (const auto& [t, queries] : by_time) {
        std::vector<const Snapshot*> history;
        for (int64_t h = static_cast<int64_t>(t) - window; h < static_cast<int64_t>(t); ++h) {
            if (h >= 0) history.push_back(&timeline[static_cast<size_t>(h)]);
        }
        Model::Forward f = model.forward(history, batch_subjects(queries));
        std::vector<int64_t> subj, rel;
        subj.reserve(queries.size());
        for (const Quadruple& q : queries) {
            subj.push_back(q.s);
            rel.push_back(q.r);
        }
        Tensor scores = model.score_queries(f, subj, rel);
        int64_t n_entities = scores.cols();
        for (size_t i = 0; i < queries.size(); ++i) {
            const Quadruple& q = queries[i];
            std::vector<double> row(scores.data() + static_cast<int64_t>(i) * n_entities,
                                    scores.data() + static_cast<int64_t>(i + 1) * n_entities);
            QueryRank qr;
            qr.fact = q;
            qr.inverse = q.r >= bundle.relation_count;
            qr.rank = filtered_rank(row, q.o, filter.objects(q.s, q.r, q.t));
            qr.subject_degree = bundle.train_degree[q.s];
            report.per_query.push_back(qr);
        }
    }

    report.num_queries = static_cast<int64_t>(report.per_query.size());
    std::array<double, 7> bucket_rr{};
    for (const QueryRank& qr : report.per_query) {
        double rr = 1.0 / static_cast<double>(qr.rank);
        report.mrr += rr;
        report.hits1 += qr.rank <= 1;
        report.hits3 += qr.rank <= 3;
        report.hits10 += qr.rank <= 10;
        int b = degree_bucket_index(qr.subject_degree);
        BucketStats& bs = report.buckets[static_cast<size_t>(b)];
        bs.count += 1;
        bucket_rr[static_cast<size_t>(b)] += rr;
        bs.h1 += qr.rank <= 1;
        bs.h3 += qr.rank <= 3;
        bs.h10 += qr.rank <= 10;
    }
    if (report.num_queries > 0) {
        double n = static_cast<double>(report.num_queries);
        report.mrr /= n;
        report.hits1 /= n;
        report.hits3 /= n;
        report.hits10 /= n;
    }
    for (size_t b = 0; b < report.buckets.size(); ++b) {
        BucketStats& bs = report.buckets[b];
        if (bs.count == 0) continue;
        double n = static_cast<double>(bs.count);
        bs.mrr = bucket_rr[b] / n;
        bs.h1 /= n;
        bs.h3 /= n;
        bs.h10 /= n;
    }
    return report;
}

std::string report_json(const RankReport& report, bool include_buckets) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"split\": \"" << split_name(report.split) << "\",\n";
    out << "  \"num_queries\": " << report.num_queries << ",\n";
    out << "  \"mrr\": " << fmt(report.mrr) << ",\n";
    out << "  \"hits\": {\"1\": " << fmt(report.hits1) << ", \"3\": " << fmt(report.hits3)
        << ", \"10\": " << fmt(report.hits10) << "}";
    if (include_buckets) {
        out << ",\n  \"buckets\": [\n";
        bool first = true;
        for (size_t b = 0; b < report.buckets.size(); ++b) {
            const BucketStats& bs = report.buckets[b];
            if (!first) out << ",\n";
            first = false;
            out << "    {\"bucket\": \"" << kDegreeBucketLabels[b] << "\", \"count\": "
                << bs.count << ", \"mrr\": " << fmt(bs.mrr) << ", \"h1\": " << fmt(bs.h1)
                << ", \"h10\": " << fmt(bs.h10) << "}";
        }
        out << "\n  ]";
    }
    out << "\n}\n";
    return out.str();
}

void write_rank_dump(const std::filesystem::path& path, const RankReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write rank dump " + path.string());
    out << "s\tr\to\tt\tdirection\trank\n";
    for (const QueryRank& qr : report.per_query) {
        out << qr.fact.s << '\t' << qr.fact.r << '\t' << qr.fact.o << '\t' << qr.fact.t << '\t'
            << (qr.inverse ? "subject" : "object") << '\t' << qr.rank << '\n';
    }
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const DatasetBundle& raw,
                                const std::string& axis, const std::vector<std::string>& values,
                                std::ostream* progress) {
    if (values.empty()) throw ConfigError("sweep: no values given");
    std::vector<SweepRow> rows;
    for (const std::string& value : values) {
        RunConfig cfg = base;
        if (axis == "train_fraction") {
            config_set(cfg, "train_fraction", value);
        } else if (axis == "N") {
            if (value == "max") {
                cfg.hops = static_cast<int64_t>(raw.ontology.num_nodes());
            } else {
                config_set(cfg, "hops", value);
            }
        } else if (axis == "J") {
            config_set(cfg, "layers", value);
        } else if (axis == "K") {
            config_set(cfg, "cone_k", value);
        } else {
            throw ConfigError("unknown sweep axis '" + axis +
                              "' (train_fraction|N|J|K)");
        }

        auto start = std::chrono::steady_clock::now();
        DatasetBundle subset = subset_train_fraction(raw, cfg.train_fraction);
        DatasetBundle augmented = augment_inverse(subset);
        Model model(cfg.model_config(), augmented);
        train_model(model, augmented, cfg, progress);
        RankReport report = evaluate(model, augmented, Split::test);
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                             .count();
        rows.push_back(SweepRow{axis, value, report.mrr, report.hits1, report.hits10, seconds});
        if (progress) {
            (*progress) << "sweep " << axis << "=" << value << " mrr=" << report.mrr
                        << " (" << seconds << "s)\n";
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "axis,value,mrr,h1,h10,seconds\n";
    for (const SweepRow& r : rows) {
        out << r.axis << ',' << r.value << ',' << fmt(r.mrr) << ',' << fmt(r.h1) << ','
            << fmt(r.h10) << ',' << fmt(r.seconds) << '\n';
    }
    return out.str();
}

}  // namespace onto
