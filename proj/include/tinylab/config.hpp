#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "tinylab/model.hpp"
#include "tinylab/training.hpp"
#include "tinylab/vocab.hpp"

namespace tinylab {

/// Where a run's text comes from and how it is tokenized.
struct DataConfig {
    std::string dataset = "tinyshakespeare";  // label, and default subdirectory of the root
    std::string root;                         // empty: $TINYLAB_DATA_DIR, else "data"
    std::string train_path;                   // empty: <root>/<dataset>/train.txt
    std::string val_path;
    std::string test_path;
    VocabMode vocab = VocabMode::Char;
    std::optional<std::string> unk_token = "<unk>";  // word mode only

    bool operator==(const DataConfig&) const = default;
};

/// Everything one `train` run needs. vocab_size in `model` is filled in from
/// the data; a config may state it, in which case the data must agree.
struct ExperimentConfig {
    std::string run_name = "run";
    std::string out_dir = "runs";
    bool overwrite = false;
    DataConfig data;
    ModelConfig model;
    TrainConfig train;
    bool vocab_size_declared = false;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses flat `key = value` lines; `#` starts a comment. Unknown or repeated
/// keys and malformed values are errors of the form "<source>:<line>: ...".
/// Model fields not given default to the architecture's preset.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Every field, one key per line; parse_config(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig& config);

/// Quick profile: caps of at most 5k train / 1k eval positions and one epoch.
void apply_fast_profile(ExperimentConfig& config);

std::string data_root(const DataConfig& data);

/// Resolved train/val/test file paths. Relative paths are taken from the
/// data root.
std::array<std::string, 3> split_paths(const DataConfig& data);

/// <out_dir>/<run_name>
std::string run_directory(const ExperimentConfig& config);

}  // namespace tinylab
