#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ontotkge/model.hpp"
#include "ontotkge/optim.hpp"

namespace onto {

// Resolved run configuration shared by the CLI commands, the trainer and
// checkpoints. Serialized as flat `key = value` lines; unknown keys are
// rejected so stale experiment files fail loudly.
struct RunConfig {
    std::string data;           // dataset directory
    std::string out = "out";    // output directory
    int64_t epochs = 30;
    double lr = 1e-3;
    double grad_clip = 1.0;
    uint64_t seed = 42;
    int64_t dim = 32;           // embedding dimension (paper-scale 200, desk default 32)
    int64_t layers = 2;         // graph-convolution layers per stack
    int64_t hops = 2;           // local subgraph radius
    double cone_k = 0.5;
    double tau = 0.07;
    double alpha1 = 0.1;
    double alpha2 = 0.1;
    int64_t history = 3;        // temporal window
    std::string op = "sub";     // sub | mult | corr
    std::string fusion = "gate";  // gate | sum
    int64_t channels = 16;
    int64_t kernel_width = 3;
    double train_fraction = 1.0;
    bool no_local_encoder = false;
    bool random_init = false;
    bool no_global_init = false;

    ModelConfig model_config() const;
    AdamConfig adam_config() const;
};

// Applies one key/value pair; throws ConfigError on unknown keys or
// unparsable values.
void config_set(RunConfig& cfg, std::string_view key, std::string_view value);

// Parses `key = value` lines ('#' comments, blank lines ignored).
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::filesystem::path& path);

// Canonical snapshot: every key in a fixed order, doubles round-trippable.
std::string resolved_config(const RunConfig& cfg);

}  // namespace onto
