#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "ontotkge/checkpoint.hpp"
#include "ontotkge/eval.hpp"
#include "ontotkge/synthgen.hpp"
#include "ontotkge/trainer.hpp"

using namespace onto;
namespace fs = std::filesystem;

namespace {

DatasetBundle dataset(uint32_t concepts = 4) {
    SynthSpec spec;
    spec.concepts = concepts;
    spec.entities_per_concept = 5;
    spec.relations = 2;
    spec.timestamps = 10;
    spec.facts_per_step = 6;
    spec.seed = 77;
    return augment_inverse(generate(spec));
}

RunConfig config() {
    RunConfig cfg;
    cfg.dim = 8;
    cfg.layers = 1;
    cfg.channels = 4;
    cfg.epochs = 2;
    return cfg;
}

}  // namespace

TEST_CASE("checkpoints round-trip bit-exactly and replay identical metrics") {
    DatasetBundle aug = dataset();
    RunConfig cfg = config();
    Model model(cfg.model_config(), aug);
    train_model(model, aug, cfg);

    fs::path path = fs::temp_directory_path() / "onto_ckpt_test.bin";
    save_checkpoint(path, model, cfg);

    LoadedCheckpoint loaded = load_checkpoint(path, aug);
    CHECK(resolved_config(loaded.config) == resolved_config(cfg));

    std::vector<Tensor> original = model.snapshot_params();
    std::vector<Tensor> restored = loaded.model->snapshot_params();
    REQUIRE(original.size() == restored.size());
    for (size_t i = 0; i < original.size(); ++i) {
        CHECK(original[i].shape() == restored[i].shape());
        CHECK(original[i].vec() == restored[i].vec());
    }

    // metrics replay bit-exactly through the serialized report
    RankReport before = evaluate(model, aug, Split::test);
    RankReport after = evaluate(*loaded.model, aug, Split::test);
    CHECK(report_json(before, true) == report_json(after, true));

    // and a second load replays the same metrics again
    LoadedCheckpoint again = load_checkpoint(path, aug);
    RankReport third = evaluate(*again.model, aug, Split::test);
    CHECK(report_json(before, true) == report_json(third, true));

    fs::remove(path);
}

TEST_CASE("checkpoints reject data with different dimensions") {
    DatasetBundle aug = dataset();
    RunConfig cfg = config();
    Model model(cfg.model_config(), aug);
    fs::path path = fs::temp_directory_path() / "onto_ckpt_mismatch.bin";
    save_checkpoint(path, model, cfg);

    DatasetBundle other = dataset(6);  // different entity/concept space
    CHECK_THROWS_AS(load_checkpoint(path, other), DataError);
    fs::remove(path);
}

TEST_CASE("ablated models checkpoint with their reduced parameter sets") {
    DatasetBundle aug = dataset();
    RunConfig cfg = config();
    cfg.no_local_encoder = true;
    cfg.random_init = true;
    Model model(cfg.model_config(), aug);
    fs::path path = fs::temp_directory_path() / "onto_ckpt_ablated.bin";
    save_checkpoint(path, model, cfg);
    LoadedCheckpoint loaded = load_checkpoint(path, aug);
    CHECK(loaded.model->param_names() == model.param_names());
    CHECK(loaded.config.no_local_encoder);
    CHECK(loaded.config.random_init);
    fs::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected") {
    fs::path path = fs::temp_directory_path() / "onto_ckpt_bad.bin";
    {
        std::ofstream out(path, std::ios::binary);
        out << "definitely not a checkpoint";
    }
    DatasetBundle aug = dataset();
    CHECK_THROWS_AS(load_checkpoint(path, aug), DataError);
    CHECK_THROWS_AS(load_checkpoint(fs::temp_directory_path() / "missing.bin", aug), DataError);
    fs::remove(path);
}
