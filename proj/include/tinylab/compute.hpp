#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tinylab/model.hpp"
#include "tinylab/training.hpp"

namespace tinylab {

/// Parameter count from the architecture's closed form, without building
/// the model.
std::size_t closed_form_param_count(const ModelConfig& config);

/// Training FLOPs estimate: 2 * params * (positions_per_epoch * T * epochs).
/// Each processed token position costs one forward and one backward
/// multiply-accumulate per parameter.
double estimate_flops(std::size_t params, std::size_t positions_per_epoch, std::size_t context_length,
                      std::size_t epochs);

/// Scientific notation with `digits` significant digits, e.g. "2.21e13".
std::string format_scientific(double value, int digits = 3);

struct ComputeReport {
    std::string arch;
    std::string dataset;
    std::size_t params = 0;
    std::size_t context_length = 0;
    std::size_t positions_per_epoch = 0;
    std::size_t epochs = 0;
    std::size_t train_tokens = 0;  // positions_per_epoch * T * epochs
    double flops = 0;              // 2 * params * train_tokens
    double test_nll = 0;

    bool operator==(const ComputeReport&) const = default;
};

/// Report for a finished run. positions_per_epoch defaults to the
/// configured train cap; pass the realized count when the corpus had fewer
/// candidate windows. `epochs` likewise defaults to the configured count.
ComputeReport make_compute_report(const Model& model, const TrainConfig& train_config, double test_nll,
                                  std::string dataset, std::size_t positions_per_epoch = 0,
                                  std::size_t epochs = 0);

inline constexpr std::string_view kComputeCsvHeader =
    "arch,dataset,params,T,positions_per_epoch,epochs,train_tokens,flops,test_nll";

/// One CSV row (no newline). Doubles use the shortest representation that
/// reads back to the same value.
std::string to_csv_row(const ComputeReport& report);
ComputeReport parse_compute_row(std::string_view line);

/// Header plus rows, newline terminated.
std::string compute_csv(const std::vector<ComputeReport>& reports);
std::vector<ComputeReport> parse_compute_csv(std::string_view text);

/// Locale-independent shortest round-trip formatting of a double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace tinylab
