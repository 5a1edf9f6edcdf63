#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tinylab/compute.hpp"
#include "tinylab/config.hpp"
#include "tinylab/generation.hpp"
#include "tinylab/training.hpp"

namespace tinylab {

/// Vocabulary and encoded splits for a data config. Char vocabularies cover
/// all three splits; word vocabularies only the training split.
struct LoadedData {
    Vocab vocab;
    DataSplits splits;
};

LoadedData load_data(const DataConfig& data);

/// The per-epoch log written as <run>/report.csv.
inline constexpr std::string_view kReportCsvHeader = "epoch,train_nll,val_nll,best";
std::string report_csv(const RunReport& report);

struct TrainOutputs {
    std::string run_dir;
    RunReport report;
    ComputeReport compute;
};

/// Trains one configuration and writes report.csv, compute.csv, best.ckpt
/// and config.cfg under the run directory. An existing non-empty run
/// directory is an error unless config.overwrite is set.
TrainOutputs cmd_train(ExperimentConfig config, std::ostream& log);

struct SweepSetting {
    std::string label;  // e.g. "T=64"
    ModelConfig model;
};

/// The three grid points of a family: linear T in {32, 64, 128}, mlp hidden
/// in {128, 256, 512}, attention heads in {1, 2, 4}, transformer layers in
/// {2, 3, 4}. Everything else is the family's preset with `base`'s context
/// length (except for the linear T sweep) and vocabulary size.
std::vector<SweepSetting> sweep_settings(Arch family, const ModelConfig& base);

struct SweepPoint {
    std::string setting;
    std::size_t params = 0;
    double flops = 0;
    double test_nll = 0;
};

inline constexpr std::string_view kSweepCsvHeader = "setting,params,flops,test_nll";
std::string sweep_csv(const std::vector<SweepPoint>& points);

/// Trains every grid point of `family` with `base`'s data and recipe and the
/// same seed. The epoch count is forced to `epochs`. Writes
/// <out_dir>/sweep_<family>.csv.
std::vector<SweepPoint> cmd_sweep(Arch family, ExperimentConfig base, std::size_t epochs, std::ostream& log);

/// Mean NLL of a checkpoint on the fixed val or test stream used during
/// training. With `config`, its model must match the checkpoint's and its
/// data paths are used instead of the echoed ones.
double cmd_eval(const std::string& checkpoint_path, Split split, const std::optional<ExperimentConfig>& config = {});

std::string cmd_generate(const std::string& checkpoint_path, const SamplerConfig& sampler);

/// compute.csv rows of every run directory, sorted by flops (stable).
std::vector<ComputeReport> cmd_report(const std::vector<std::string>& run_dirs);

/// Writes text to a file, creating parent directories.
void write_text_file(const std::string& path, std::string_view text);

}  // namespace tinylab
