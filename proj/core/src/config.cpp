#include "ontotkge/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace onto {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

int64_t to_int(std::string_view key, std::string_view value) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size()) {
        throw ConfigError("config key '" + std::string(key) + "': integer expected, got '" +
                          std::string(value) + "'");
    }
    return v;
}

uint64_t to_uint(std::string_view key, std::string_view value) {
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size()) {
        throw ConfigError("config key '" + std::string(key) + "': unsigned integer expected");
    }
    return v;
}

double to_double(std::string_view key, std::string_view value) {
    try {
        size_t pos = 0;
        double v = std::stod(std::string(value), &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + std::string(key) + "': number expected, got '" +
                          std::string(value) + "'");
    }
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw ConfigError("config key '" + std::string(key) + "': boolean (0/1) expected");
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void config_set(RunConfig& cfg, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    if (key == "data") cfg.data = value;
    else if (key == "out") cfg.out = value;
    else if (key == "epochs") cfg.epochs = to_int(key, value);
    else if (key == "lr") cfg.lr = to_double(key, value);
    else if (key == "grad_clip") cfg.grad_clip = to_double(key, value);
    else if (key == "seed") cfg.seed = to_uint(key, value);
    else if (key == "dim") cfg.dim = to_int(key, value);
    else if (key == "layers") cfg.layers = to_int(key, value);
    else if (key == "hops") cfg.hops = to_int(key, value);
    else if (key == "cone_k") cfg.cone_k = to_double(key, value);
    else if (key == "tau") cfg.tau = to_double(key, value);
    else if (key == "alpha1") cfg.alpha1 = to_double(key, value);
    else if (key == "alpha2") cfg.alpha2 = to_double(key, value);
    else if (key == "history") cfg.history = to_int(key, value);
    else if (key == "op") cfg.op = value;
    else if (key == "fusion") cfg.fusion = value;
    else if (key == "channels") cfg.channels = to_int(key, value);
    else if (key == "kernel_width") cfg.kernel_width = to_int(key, value);
    else if (key == "train_fraction") cfg.train_fraction = to_double(key, value);
    else if (key == "no_local_encoder") cfg.no_local_encoder = to_bool(key, value);
    else if (key == "random_init") cfg.random_init = to_bool(key, value);
    else if (key == "no_global_init") cfg.no_global_init = to_bool(key, value);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        size_t eq = sv.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        config_set(cfg, sv.substr(0, eq), sv.substr(eq + 1));
    }
    return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string resolved_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "data = " << cfg.data << '\n';
    out << "out = " << cfg.out << '\n';
    out << "epochs = " << cfg.epochs << '\n';
    out << "lr = " << fmt_double(cfg.lr) << '\n';
    out << "grad_clip = " << fmt_double(cfg.grad_clip) << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "dim = " << cfg.dim << '\n';
    out << "layers = " << cfg.layers << '\n';
    out << "hops = " << cfg.hops << '\n';
    out << "cone_k = " << fmt_double(cfg.cone_k) << '\n';
    out << "tau = " << fmt_double(cfg.tau) << '\n';
    out << "alpha1 = " << fmt_double(cfg.alpha1) << '\n';
    out << "alpha2 = " << fmt_double(cfg.alpha2) << '\n';
    out << "history = " << cfg.history << '\n';
    out << "op = " << cfg.op << '\n';
    out << "fusion = " << cfg.fusion << '\n';
    out << "channels = " << cfg.channels << '\n';
    out << "kernel_width = " << cfg.kernel_width << '\n';
    out << "train_fraction = " << fmt_double(cfg.train_fraction) << '\n';
    out << "no_local_encoder = " << (cfg.no_local_encoder ? 1 : 0) << '\n';
    out << "random_init = " << (cfg.random_init ? 1 : 0) << '\n';
    out << "no_global_init = " << (cfg.no_global_init ? 1 : 0) << '\n';
    return out.str();
}

ModelConfig RunConfig::model_config() const {
    ModelConfig m;
    m.dim = dim;
    m.gnn_layers = layers;
    if (hops < 0) throw ConfigError("hops must be >= 0");
    m.hops = static_cast<uint32_t>(hops);
    m.cone_k = cone_k;
    m.temperature = tau;
    m.alpha1 = alpha1;
    m.alpha2 = alpha2;
    m.history_window = history;
    m.op = composition_from_string(op);
    m.channels = channels;
    m.kernel_width = kernel_width;
    m.seed = seed;
    m.use_local = !no_local_encoder;
    m.ontology_init = !(random_init || no_global_init);
    if (fusion == "gate") m.gated_fusion = true;
    else if (fusion == "sum") m.gated_fusion = false;
    else throw ConfigError("unknown fusion mode '" + fusion + "' (gate|sum)");
    if (alpha1 < 0 || alpha2 < 0) throw ConfigError("loss weights must be >= 0");
    if (!(tau > 0)) throw ConfigError("tau must be > 0");
    if (!(cone_k > 0)) throw ConfigError("cone_k must be > 0");
    if (train_fraction <= 0.0 || train_fraction > 1.0) {
        throw ConfigError("train_fraction must be in (0,1]");
    }
    return m;
}

AdamConfig RunConfig::adam_config() const {
    AdamConfig a;
    a.lr = lr;
    a.clip = grad_clip;
    return a;
}

}  // namespace onto
