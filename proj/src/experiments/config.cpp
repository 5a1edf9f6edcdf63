#include "tinylab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "tinylab/errors.hpp"

namespace tinylab {

namespace {

std::string_view trim(std::string_view s) {
    const auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && space(s.front())) s.remove_prefix(1);
    while (!s.empty() && space(s.back())) s.remove_suffix(1);
    return s;
}

std::size_t parse_count(std::string_view v) {
    std::size_t out = 0;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size()) {
        throw ValueError("expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
}

Real parse_real(std::string_view v) {
    Real out = 0;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size()) {
        throw ValueError("expected a number, got '" + std::string(v) + "'");
    }
    return out;
}

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValueError("expected true or false, got '" + std::string(v) + "'");
}

std::string format_real(Real value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw ValueError("cannot format number");
    return std::string(buf, end);
}

struct Entry {
    std::string value;
    std::size_t line;
};

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"run_name", [](ExperimentConfig& c, std::string_view v) { c.run_name = v; }},
        {"out_dir", [](ExperimentConfig& c, std::string_view v) { c.out_dir = v; }},
        {"overwrite", [](ExperimentConfig& c, std::string_view v) { c.overwrite = parse_bool(v); }},

        {"dataset", [](ExperimentConfig& c, std::string_view v) { c.data.dataset = v; }},
        {"data_root", [](ExperimentConfig& c, std::string_view v) { c.data.root = v; }},
        {"train_path", [](ExperimentConfig& c, std::string_view v) { c.data.train_path = v; }},
        {"val_path", [](ExperimentConfig& c, std::string_view v) { c.data.val_path = v; }},
        {"test_path", [](ExperimentConfig& c, std::string_view v) { c.data.test_path = v; }},
        {"vocab", [](ExperimentConfig& c, std::string_view v) { c.data.vocab = parse_vocab_mode(v); }},
        {"unk_token",
         [](ExperimentConfig& c, std::string_view v) {
             c.data.unk_token = v == "none" ? std::nullopt : std::optional<std::string>(v);
         }},

        {"arch", [](ExperimentConfig&, std::string_view) {}},  // applied first, see parse_config
        {"context_length", [](ExperimentConfig& c, std::string_view v) { c.model.context_length = parse_count(v); }},
        {"vocab_size",
         [](ExperimentConfig& c, std::string_view v) {
             c.model.vocab_size = parse_count(v);
             c.vocab_size_declared = true;
         }},
        {"d_model", [](ExperimentConfig& c, std::string_view v) { c.model.d_model = parse_count(v); }},
        {"mlp_hidden", [](ExperimentConfig& c, std::string_view v) { c.model.mlp_hidden = parse_count(v); }},
        {"heads", [](ExperimentConfig& c, std::string_view v) { c.model.heads = parse_count(v); }},
        {"layers", [](ExperimentConfig& c, std::string_view v) { c.model.layers = parse_count(v); }},
        {"ff_width", [](ExperimentConfig& c, std::string_view v) { c.model.ff_width = parse_count(v); }},
        {"dropout", [](ExperimentConfig& c, std::string_view v) { c.model.dropout = parse_real(v); }},
        {"attention_dropout",
         [](ExperimentConfig& c, std::string_view v) { c.model.attention_dropout = parse_real(v); }},
        {"positional", [](ExperimentConfig& c, std::string_view v) { c.model.positional = parse_positional(v); }},

        {"learning_rate", [](ExperimentConfig& c, std::string_view v) { c.train.adam.learning_rate = parse_real(v); }},
        {"beta1", [](ExperimentConfig& c, std::string_view v) { c.train.adam.beta1 = parse_real(v); }},
        {"beta2", [](ExperimentConfig& c, std::string_view v) { c.train.adam.beta2 = parse_real(v); }},
        {"adam_eps", [](ExperimentConfig& c, std::string_view v) { c.train.adam.eps = parse_real(v); }},
        {"batch_size", [](ExperimentConfig& c, std::string_view v) { c.train.batch_size = parse_count(v); }},
        {"epochs", [](ExperimentConfig& c, std::string_view v) { c.train.epochs = parse_count(v); }},
        {"train_cap", [](ExperimentConfig& c, std::string_view v) { c.train.train_cap = parse_count(v); }},
        {"val_cap", [](ExperimentConfig& c, std::string_view v) { c.train.val_cap = parse_count(v); }},
        {"test_cap", [](ExperimentConfig& c, std::string_view v) { c.train.test_cap = parse_count(v); }},
        {"early_stop_patience",
         [](ExperimentConfig& c, std::string_view v) {
             c.train.early_stop_patience = v == "none" ? std::nullopt : std::optional<std::size_t>(parse_count(v));
         }},
        {"seed", [](ExperimentConfig& c, std::string_view v) { c.train.seed = parse_count(v); }},
        {"eval_seed", [](ExperimentConfig& c, std::string_view v) { c.train.eval_seed = parse_count(v); }},
        {"resample_each_epoch",
         [](ExperimentConfig& c, std::string_view v) { c.train.resample_each_epoch = parse_bool(v); }},
    };
    return table;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
    const auto where = [&](std::size_t line) { return std::string(source) + ":" + std::to_string(line) + ": "; };

    std::map<std::string, Entry, std::less<>> entries;
    std::vector<std::string> order;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ValueError(where(line_no) + "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) throw ValueError(where(line_no) + "missing key before '='");
        if (!setters().count(key)) throw ValueError(where(line_no) + "unknown key '" + key + "'");
        if (const auto it = entries.find(key); it != entries.end()) {
            throw ValueError(where(line_no) + "duplicate key '" + key + "' (first set on line " +
                             std::to_string(it->second.line) + ")");
        }
        if (value.empty()) throw ValueError(where(line_no) + "empty value for '" + key + "'");
        entries.emplace(key, Entry{std::string(value), line_no});
        order.push_back(key);
    }

    ExperimentConfig config;
    if (const auto it = entries.find("arch"); it != entries.end()) {
        try {
            config.model = ModelConfig::preset(parse_arch(it->second.value), config.model.vocab_size);
        } catch (const Error& e) {
            throw ValueError(where(it->second.line) + "arch: " + e.what());
        }
    }
    for (const std::string& key : order) {
        const Entry& entry = entries.at(key);
        try {
            setters().at(key)(config, entry.value);
        } catch (const Error& e) {
            throw ValueError(where(entry.line) + key + ": " + e.what());
        }
    }
    try {
        config.model.validate();
        config.train.validate();
    } catch (const Error& e) {
        throw ValueError(std::string(source) + ": " + e.what());
    }
    if (config.run_name.empty() || config.run_name.find('/') != std::string::npos) {
        throw ValueError(std::string(source) + ": run_name must be a plain directory name");
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text_file(path), path); }

std::string to_config_text(const ExperimentConfig& c) {
    std::ostringstream out;
    const auto put = [&](std::string_view key, const std::string& value) { out << key << " = " << value << '\n'; };
    put("run_name", c.run_name);
    put("out_dir", c.out_dir);
    put("overwrite", c.overwrite ? "true" : "false");
    put("dataset", c.data.dataset);
    if (!c.data.root.empty()) put("data_root", c.data.root);
    if (!c.data.train_path.empty()) put("train_path", c.data.train_path);
    if (!c.data.val_path.empty()) put("val_path", c.data.val_path);
    if (!c.data.test_path.empty()) put("test_path", c.data.test_path);
    put("vocab", to_string(c.data.vocab));
    put("unk_token", c.data.unk_token.value_or("none"));
    put("arch", to_string(c.model.arch));
    put("context_length", std::to_string(c.model.context_length));
    if (c.vocab_size_declared) put("vocab_size", std::to_string(c.model.vocab_size));
    put("d_model", std::to_string(c.model.d_model));
    put("mlp_hidden", std::to_string(c.model.mlp_hidden));
    put("heads", std::to_string(c.model.heads));
    put("layers", std::to_string(c.model.layers));
    put("ff_width", std::to_string(c.model.ff_width));
    put("dropout", format_real(c.model.dropout));
    put("attention_dropout", format_real(c.model.attention_dropout));
    put("positional", to_string(c.model.positional));
    put("learning_rate", format_real(c.train.adam.learning_rate));
    put("beta1", format_real(c.train.adam.beta1));
    put("beta2", format_real(c.train.adam.beta2));
    put("adam_eps", format_real(c.train.adam.eps));
    put("batch_size", std::to_string(c.train.batch_size));
    put("epochs", std::to_string(c.train.epochs));
    put("train_cap", std::to_string(c.train.train_cap));
    put("val_cap", std::to_string(c.train.val_cap));
    put("test_cap", std::to_string(c.train.test_cap));
    put("early_stop_patience",
        c.train.early_stop_patience ? std::to_string(*c.train.early_stop_patience) : std::string("none"));
    put("seed", std::to_string(c.train.seed));
    put("eval_seed", std::to_string(c.train.eval_seed));
    put("resample_each_epoch", c.train.resample_each_epoch ? "true" : "false");
    return out.str();
}

void apply_fast_profile(ExperimentConfig& config) {
    TrainConfig& t = config.train;
    t.train_cap = std::min<std::size_t>(t.train_cap, 5'000);
    t.val_cap = std::min<std::size_t>(t.val_cap, 1'000);
    t.test_cap = std::min<std::size_t>(t.test_cap, 1'000);
    t.epochs = 1;
}

std::string data_root(const DataConfig& data) {
    if (!data.root.empty()) return data.root;
    if (const char* env = std::getenv("TINYLAB_DATA_DIR"); env && *env) return env;
    return "data";
}

std::array<std::string, 3> split_paths(const DataConfig& data) {
    namespace fs = std::filesystem;
    const fs::path root = data_root(data);
    const auto resolve = [&](const std::string& given, const char* split) {
        if (given.empty()) return (root / data.dataset / (std::string(split) + ".txt")).string();
        const fs::path p(given);
        return p.is_absolute() ? p.string() : (root / p).string();
    };
    return {resolve(data.train_path, "train"), resolve(data.val_path, "val"), resolve(data.test_path, "test")};
}

std::string run_directory(const ExperimentConfig& config) {
    return (std::filesystem::path(config.out_dir) / config.run_name).string();
}

}  // namespace tinylab
