#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ontotkge/config.hpp"
#include "ontotkge/dataset.hpp"
#include "ontotkge/model.hpp"

namespace onto {

struct EpochRow {
    int64_t epoch = 0;
    double l_tkg = 0, l_hie = 0, l_cl = 0, l_total = 0;
    double val_mrr = 0;
    double seconds = 0;
};

struct TrainOutput {
    std::vector<EpochRow> log;
    int64_t best_epoch = 0;
    double best_val_mrr = 0;
};

// Invoked after each epoch's validation pass; returning true stops
// training early with the current parameters kept (no best-epoch restore).
using EpochCallback = std::function<bool(int64_t epoch, Model& model)>;

// Sequential training over the training timestamps: per timestamp, one
// forward/backward/update step on the joint loss with the last
// `history` snapshots as context. After the final epoch the parameters of
// the best validation epoch are restored.
TrainOutput train_model(Model& model, const DatasetBundle& augmented, const RunConfig& cfg,
                        std::ostream* progress = nullptr,
                        const EpochCallback& callback = nullptr);

// epoch,L_tkg,L_hie,L_cl,L_total,val_mrr,seconds
std::string training_log_csv(const std::vector<EpochRow>& log);

// Keeps the leading ceil(fraction * n_t) facts of every training timestamp;
// valid and test splits are untouched. Expects a non-augmented bundle.
DatasetBundle subset_train_fraction(const DatasetBundle& raw, double fraction);

}  // namespace onto
