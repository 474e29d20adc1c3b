#include "ontotkge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace onto {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    size_t start = 0;
    while (true) {
        size_t pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

int64_t parse_int(std::string_view tok, const std::string& where) {
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw DataError(where + ": non-integer token '" + std::string(tok) + "'");
    }
    return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("missing file: " + file.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lines.push_back(line);
    }
    return lines;
}

struct RawQuad {
    int64_t s, r, o, t;
};

std::vector<RawQuad> read_quads(const std::filesystem::path& file) {
    std::vector<RawQuad> quads;
    auto lines = read_lines(file);
    for (size_t i = 0; i < lines.size(); ++i) {
        auto where = file.filename().string() + ":" + std::to_string(i + 1);
        auto fields = split_tabs(lines[i]);
        if (fields.size() != 4) {
            throw DataError(where + ": expected 4 tab-separated fields, got " +
                            std::to_string(fields.size()));
        }
        quads.push_back(RawQuad{parse_int(fields[0], where), parse_int(fields[1], where),
                                parse_int(fields[2], where), parse_int(fields[3], where)});
    }
    return quads;
}

}  // namespace

// ---------------------------------------------------------------------------
// OntologyGraph
// ---------------------------------------------------------------------------

void OntologyGraph::finalize() {
    in_degree.assign(num_nodes(), 0);
    neighbors.assign(num_nodes(), {});
    for (const OntoFact& f : facts) {
        if (f.ec >= num_nodes() || f.c >= num_nodes()) {
            throw DataError("ontology fact references node outside graph");
        }
        in_degree[f.c] += 1;
        neighbors[f.ec].push_back(f.c);
        neighbors[f.c].push_back(f.ec);
    }
}

OntologyGraph augment_inverse(const OntologyGraph& g) {
    if (g.augmented) throw Error("ontology already inverse-augmented");
    OntologyGraph out = g;
    out.augmented = true;
    out.facts.reserve(g.facts.size() * 2);
    for (const OntoFact& f : g.facts) {
        out.facts.push_back(OntoFact{f.c, f.r + g.num_relations, f.ec});
    }
    out.finalize();
    return out;
}

OntologySubgraph nhop_subgraph(const OntologyGraph& g, uint32_t seed, uint32_t hops) {
    if (seed >= g.num_entities) {
        throw DataError("nhop_subgraph: seed " + std::to_string(seed) + " is not an entity id");
    }
    std::vector<uint8_t> visited(g.num_nodes(), 0);
    std::vector<uint32_t> frontier{seed};
    visited[seed] = 1;
    for (uint32_t depth = 0; depth < hops && !frontier.empty(); ++depth) {
        std::vector<uint32_t> next;
        for (uint32_t node : frontier) {
            for (uint32_t nb : g.neighbors[node]) {
                if (!visited[nb]) {
                    visited[nb] = 1;
                    next.push_back(nb);
                }
            }
        }
        frontier = std::move(next);
    }
    OntologySubgraph sub;
    for (uint32_t id = 0; id < g.num_nodes(); ++id) {
        if (visited[id]) sub.nodes.push_back(id);
    }
    for (const OntoFact& f : g.facts) {
        if (visited[f.ec] && visited[f.c]) sub.facts.push_back(f);
    }
    return sub;
}

// ---------------------------------------------------------------------------
// DatasetBundle
// ---------------------------------------------------------------------------

std::string_view split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "?";
}

const std::vector<Quadruple>& DatasetBundle::split(Split s) const {
    switch (s) {
        case Split::train: return train;
        case Split::valid: return valid;
        default: return test;
    }
}

std::vector<Quadruple>& DatasetBundle::split(Split s) {
    switch (s) {
        case Split::train: return train;
        case Split::valid: return valid;
        default: return test;
    }
}

void DatasetBundle::compute_train_degree() {
    train_degree.assign(entity_count, 0);
    size_t n = augmented ? train.size() / 2 : train.size();
    for (size_t i = 0; i < n; ++i) {
        const Quadruple& q = train[i];
        train_degree[q.s] += 1;
        if (q.o != q.s) train_degree[q.o] += 1;
    }
}

DatasetBundle load_dataset(const std::filesystem::path& dir) {
    DatasetBundle bundle;

    // stat.txt
    {
        auto lines = read_lines(dir / "stat.txt");
        if (lines.empty()) throw DataError("stat.txt: empty");
        auto fields = split_tabs(lines[0]);
        if (fields.size() < 2) throw DataError("stat.txt: expected entity and relation counts");
        bundle.entity_count = static_cast<uint32_t>(parse_int(fields[0], "stat.txt"));
        bundle.relation_count = static_cast<uint32_t>(parse_int(fields[1], "stat.txt"));
    }

    auto raw_train = read_quads(dir / "train.txt");
    auto raw_valid = read_quads(dir / "valid.txt");
    auto raw_test = read_quads(dir / "test.txt");
    if (raw_train.empty()) throw DataError("train.txt: empty split");
    if (raw_valid.empty()) throw DataError("valid.txt: empty split");
    if (raw_test.empty()) throw DataError("test.txt: empty split");

    // Contiguous timestamp indexing over the union of splits.
    std::set<int64_t> stamps;
    for (const auto* quads : {&raw_train, &raw_valid, &raw_test}) {
        for (const RawQuad& q : *quads) stamps.insert(q.t);
    }
    bundle.raw_timestamps.assign(stamps.begin(), stamps.end());
    bundle.timestamp_count = static_cast<uint32_t>(bundle.raw_timestamps.size());
    std::map<int64_t, uint32_t> stamp_index;
    for (uint32_t i = 0; i < bundle.timestamp_count; ++i) {
        stamp_index[bundle.raw_timestamps[i]] = i;
    }

    auto convert = [&](const std::vector<RawQuad>& raw, const char* name) {
        std::vector<Quadruple> out;
        out.reserve(raw.size());
        for (const RawQuad& q : raw) {
            if (q.s < 0 || q.s >= bundle.entity_count || q.o < 0 || q.o >= bundle.entity_count) {
                throw DataError(std::string(name) + ": entity id out of range in fact (" +
                                std::to_string(q.s) + "," + std::to_string(q.r) + "," +
                                std::to_string(q.o) + "," + std::to_string(q.t) + ")");
            }
            if (q.r < 0 || q.r >= bundle.relation_count) {
                throw DataError(std::string(name) + ": relation id " + std::to_string(q.r) +
                                " out of range [0," + std::to_string(bundle.relation_count) + ")");
            }
            out.push_back(Quadruple{static_cast<uint32_t>(q.s), static_cast<uint32_t>(q.r),
                                    static_cast<uint32_t>(q.o), stamp_index.at(q.t)});
        }
        return out;
    };
    bundle.train = convert(raw_train, "train.txt");
    bundle.valid = convert(raw_valid, "valid.txt");
    bundle.test = convert(raw_test, "test.txt");

    auto time_range = [](const std::vector<Quadruple>& qs) {
        uint32_t lo = qs.front().t, hi = qs.front().t;
        for (const Quadruple& q : qs) {
            lo = std::min(lo, q.t);
            hi = std::max(hi, q.t);
        }
        return std::pair{lo, hi};
    };
    auto [tr_lo, tr_hi] = time_range(bundle.train);
    auto [va_lo, va_hi] = time_range(bundle.valid);
    auto [te_lo, te_hi] = time_range(bundle.test);
    (void)tr_lo;
    (void)te_hi;
    if (!(tr_hi < va_lo && va_hi < te_lo)) {
        throw DataError("split timestamps must be strictly ordered train < valid < test");
    }

    // ontology.txt; concept and relation counts are inferred from the ids.
    {
        auto lines = read_lines(dir / "ontology.txt");
        OntologyGraph& g = bundle.ontology;
        g.num_entities = bundle.entity_count;
        int64_t max_node = static_cast<int64_t>(bundle.entity_count) - 1;
        int64_t max_rel = -1;
        std::vector<std::array<int64_t, 3>> raw;
        for (size_t i = 0; i < lines.size(); ++i) {
            auto where = "ontology.txt:" + std::to_string(i + 1);
            auto fields = split_tabs(lines[i]);
            if (fields.size() != 3) {
                throw DataError(where + ": expected 3 tab-separated fields");
            }
            int64_t ec = parse_int(fields[0], where);
            int64_t r = parse_int(fields[1], where);
            int64_t c = parse_int(fields[2], where);
            if (ec < 0 || r < 0 || c < 0) throw DataError(where + ": negative id");
            if (c < bundle.entity_count) {
                throw DataError(where + ": fact target " + std::to_string(c) +
                                " must be a concept id (>= " +
                                std::to_string(bundle.entity_count) + ")");
            }
            max_node = std::max({max_node, ec, c});
            max_rel = std::max(max_rel, r);
            raw.push_back({ec, r, c});
        }
        g.num_concepts = static_cast<uint32_t>(max_node + 1 - bundle.entity_count);
        g.num_relations = static_cast<uint32_t>(max_rel + 1);
        for (const auto& [ec, r, c] : raw) {
            g.facts.push_back(OntoFact{static_cast<uint32_t>(ec), static_cast<uint32_t>(r),
                                       static_cast<uint32_t>(c)});
        }
        g.finalize();
    }

    bundle.compute_train_degree();
    return bundle;
}

void write_dataset(const std::filesystem::path& dir, const DatasetBundle& bundle,
                   const std::vector<std::string>* node_names) {
    if (bundle.augmented) throw Error("write_dataset expects a non-augmented bundle");
    std::filesystem::create_directories(dir);
    auto write_quads = [&](const char* name, const std::vector<Quadruple>& qs) {
        std::ofstream out(dir / name);
        if (!out) throw DataError(std::string("cannot write ") + name);
        for (const Quadruple& q : qs) {
            out << q.s << '\t' << q.r << '\t' << q.o << '\t' << bundle.raw_timestamps[q.t]
                << '\n';
        }
    };
    write_quads("train.txt", bundle.train);
    write_quads("valid.txt", bundle.valid);
    write_quads("test.txt", bundle.test);
    {
        std::ofstream out(dir / "stat.txt");
        out << bundle.entity_count << '\t' << bundle.relation_count << '\n';
    }
    {
        std::ofstream out(dir / "ontology.txt");
        for (const OntoFact& f : bundle.ontology.facts) {
            out << f.ec << '\t' << f.r << '\t' << f.c << '\n';
        }
    }
    if (node_names) {
        std::ofstream out(dir / "ontology_names.txt");
        for (size_t i = 0; i < node_names->size(); ++i) {
            out << i << '\t' << (*node_names)[i] << '\n';
        }
    }
}

DatasetBundle augment_inverse(const DatasetBundle& bundle) {
    if (bundle.augmented) throw Error("bundle already inverse-augmented");
    DatasetBundle out = bundle;
    out.augmented = true;
    for (Split s : {Split::train, Split::valid, Split::test}) {
        auto& facts = out.split(s);
        size_t n = facts.size();
        facts.reserve(2 * n);
        for (size_t i = 0; i < n; ++i) {
            const Quadruple& q = facts[i];
            facts.push_back(Quadruple{q.o, q.r + bundle.relation_count, q.s, q.t});
        }
    }
    out.ontology = augment_inverse(bundle.ontology);
    return out;
}

std::vector<Snapshot> snapshots(const DatasetBundle& bundle, Split split) {
    const auto& facts = bundle.split(split);
    if (facts.empty()) return {};
    uint32_t lo = facts.front().t, hi = facts.front().t;
    for (const Quadruple& q : facts) {
        lo = std::min(lo, q.t);
        hi = std::max(hi, q.t);
    }
    std::vector<Snapshot> snaps(hi - lo + 1);
    for (uint32_t i = 0; i < snaps.size(); ++i) {
        snaps[i].t = lo + i;
        snaps[i].out.resize(bundle.entity_count);
        snaps[i].in.resize(bundle.entity_count);
    }
    for (const Quadruple& q : facts) {
        Snapshot& snap = snaps[q.t - lo];
        snap.facts.push_back(q);
        snap.out[q.s].emplace_back(q.r, q.o);
        snap.in[q.o].emplace_back(q.r, q.s);
    }
    return snaps;
}

int degree_bucket_index(uint32_t degree) {
    if (degree < 10) return 0;
    if (degree < 20) return 1;
    if (degree < 30) return 2;
    if (degree < 40) return 3;
    if (degree < 50) return 4;
    if (degree < 100) return 5;
    return 6;
}

std::string_view degree_bucket_label(uint32_t degree) {
    return kDegreeBucketLabels[static_cast<size_t>(degree_bucket_index(degree))];
}

std::string_view degree_bucket(const DatasetBundle& bundle, uint32_t entity) {
    if (entity >= bundle.train_degree.size()) {
        throw DataError("degree_bucket: entity id out of range");
    }
    return degree_bucket_label(bundle.train_degree[entity]);
}

}  // namespace onto
