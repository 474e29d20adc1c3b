#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ontotkge/config.hpp"
#include "ontotkge/dataset.hpp"
#include "ontotkge/model.hpp"

namespace onto {

struct QueryRank {
    Quadruple fact;   // as evaluated (inverse queries carry r >= |R|)
    bool inverse = false;
    int64_t rank = 0;
    uint32_t subject_degree = 0;
};

struct BucketStats {
    int64_t count = 0;
    double mrr = 0, h1 = 0, h3 = 0, h10 = 0;
};

struct RankReport {
    Split split = Split::test;
    std::vector<QueryRank> per_query;
    int64_t num_queries = 0;
    double mrr = 0, hits1 = 0, hits3 = 0, hits10 = 0;
    std::array<BucketStats, 7> buckets;  // indexed like kDegreeBucketLabels
};

// Time-aware filtered rank: 1 + number of entities scoring strictly above
// the gold answer after removing the other true answers of the same
// (subject, relation, timestamp). Ties never hurt the gold entity.
int64_t filtered_rank(const std::vector<double>& scores, int64_t gold,
                      const std::vector<uint32_t>& known_true);

// Ranks both query directions of every fact in the split under the
// time-aware filtered protocol, with ground-truth history snapshots drawn
// from all splits before each query timestamp.
RankReport evaluate(Model& model, const DatasetBundle& augmented, Split split);

std::string report_json(const RankReport& report, bool include_buckets);
void write_rank_dump(const std::filesystem::path& path, const RankReport& report);

struct SweepRow {
    std::string axis, value;
    double mrr = 0, h1 = 0, h10 = 0;
    double seconds = 0;
};

// Trains one model per axis value (shared seed, fixed test set) and
// reports test metrics. Axes: train_fraction, N (hops; accepts "max"),
// J (layers), K (cone constant).
std::vector<SweepRow> run_sweep(const RunConfig& base, const DatasetBundle& raw,
                                const std::string& axis, const std::vector<std::string>& values,
                                std::ostream* progress = nullptr);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace onto
