#include "ontotkge/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace onto {

namespace {

constexpr char kMagic[8] = {'O', 'T', 'K', 'G', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError("checkpoint: truncated file");
    return v;
}

void write_string(std::ofstream& out, const std::string& s) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
    auto len = read_pod<uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw DataError("checkpoint: truncated string");
    return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model, const RunConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof(kMagic));
    write_pod<uint32_t>(out, kVersion);
    write_string(out, resolved_config(cfg));
    write_pod<uint32_t>(out, static_cast<uint32_t>(model.num_entities()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(model.num_relations_total()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(model.num_concepts()));
    write_pod<uint32_t>(out, model.ontology().total_relations());

    std::vector<std::pair<std::string, const Tensor*>> entries;
    model.visit_params(
        [&](const std::string& name, Tensor& t) { entries.emplace_back(name, &t); });
    write_pod<uint64_t>(out, entries.size());
    for (const auto& [name, tensor] : entries) {
        write_string(out, name);
        write_pod<uint32_t>(out, static_cast<uint32_t>(tensor->rank()));
        for (int64_t d : tensor->shape()) write_pod<int64_t>(out, d);
        out.write(reinterpret_cast<const char*>(tensor->data()),
                  static_cast<std::streamsize>(tensor->numel() * sizeof(double)));
    }
    if (!out) throw DataError("checkpoint write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const DatasetBundle& augmented) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError("checkpoint: bad magic in " + path.string());
    }
    auto version = read_pod<uint32_t>(in);
    if (version != kVersion) {
        throw DataError("checkpoint: unsupported version " + std::to_string(version));
    }

    LoadedCheckpoint loaded;
    loaded.config = parse_config_text(read_string(in));

    auto entities = read_pod<uint32_t>(in);
    auto relations = read_pod<uint32_t>(in);
    auto concepts = read_pod<uint32_t>(in);
    auto onto_relations = read_pod<uint32_t>(in);
    if (entities != augmented.entity_count || relations != augmented.total_relations() ||
        concepts != augmented.ontology.num_concepts ||
        onto_relations != augmented.ontology.total_relations()) {
        throw DataError("checkpoint: dataset dimensions do not match the loaded data");
    }

    loaded.model = std::make_unique<Model>(loaded.config.model_config(), augmented);
    auto count = read_pod<uint64_t>(in);
    std::vector<Tensor*> params = loaded.model->params();
    std::vector<std::string> names = loaded.model->param_names();
    if (count != params.size()) {
        throw DataError("checkpoint: parameter count mismatch");
    }
    for (size_t i = 0; i < count; ++i) {
        std::string name = read_string(in);
        if (name != names[i]) {
            throw DataError("checkpoint: parameter order mismatch at '" + name + "'");
        }
        auto rank = read_pod<uint32_t>(in);
        Shape shape(rank);
        for (uint32_t d = 0; d < rank; ++d) shape[d] = read_pod<int64_t>(in);
        if (shape != params[i]->shape()) {
            throw DataError("checkpoint: shape mismatch for parameter '" + name + "'");
        }
        in.read(reinterpret_cast<char*>(params[i]->data()),
                static_cast<std::streamsize>(params[i]->numel() * sizeof(double)));
        if (!in) throw DataError("checkpoint: truncated tensor data");
    }
    return loaded;
}

}  // namespace onto
