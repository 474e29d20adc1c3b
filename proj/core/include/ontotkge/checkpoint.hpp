#pragma once

#include <filesystem>
#include <memory>

#include "ontotkge/config.hpp"
#include "ontotkge/dataset.hpp"
#include "ontotkge/model.hpp"

namespace onto {

// Versioned binary checkpoint: the resolved run configuration, the dataset
// dimensions the model was built against, and every named parameter tensor
// with its shape and raw f64 payload. Round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, Model& model, const RunConfig& cfg);

struct LoadedCheckpoint {
    RunConfig config;
    std::unique_ptr<Model> model;
};

// Rebuilds the model from the stored configuration against `augmented` and
// restores every parameter. Throws DataError when the dataset dimensions
// or parameter shapes do not match.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const DatasetBundle& augmented);

}  // namespace onto
