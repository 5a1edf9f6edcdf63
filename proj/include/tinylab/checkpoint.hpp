#pragma once

#include <cstdint>
#include <string>

#include "tinylab/config.hpp"
#include "tinylab/model.hpp"
#include "tinylab/vocab.hpp"

namespace tinylab {

// Binary layout, all integers and floats little-endian:
//
//   "TLAB"  u32 version
//   str     config echo (to_config_text of the run, vocab_size included)
//   u64     training seed
//   f64     best validation NLL
//   u8      vocab mode (0 char, 1 word)   i64 unk id (-1: none)
//   u64     token count, then one str per token
//   u64     parameter count, then per parameter:
//           str name, u32 rank, u64 dims[rank], u64 element count, f32 data[count]
//
// where str is a u64 byte length followed by the bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ExperimentConfig config;  // parsed echo; model.vocab_size matches vocab
    Vocab vocab;
    double best_val_nll = 0;
    Model model;
};

void save_checkpoint(const std::string& path, const ExperimentConfig& config, const Vocab& vocab, const Model& model,
                     double best_val_nll);

/// Throws IoError on a truncated file, bad magic, unsupported version, or
/// parameters that do not match the echoed configuration.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tinylab
