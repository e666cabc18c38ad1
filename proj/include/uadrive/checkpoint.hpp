#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "uadrive/bnn.hpp"
#include "uadrive/mlp.hpp"

// Text checkpoints for both network kinds. The header names the model kind,
// the architecture and a digest of the parameter body; values are written with
// 9 significant digits.
namespace uadrive::checkpoint {

enum class ModelKind { Dnn, Bnn };

std::string to_string(ModelKind kind);

struct DnnCheckpoint {
  nn::MlpArchitecture arch;
  nn::WeightVector weights;
  std::uint64_t seed = 0;
};

struct BnnCheckpoint {
  nn::MlpArchitecture arch;
  bnn::VariationalParams vp;
  bnn::PriorSpec prior;
  bnn::LikelihoodSpec like;
  std::uint64_t seed = 0;
};

std::string to_text(const DnnCheckpoint& ckpt);
std::string to_text(const BnnCheckpoint& ckpt);

/// Reads `model=` from the header. Throws Error(MalformedRow).
ModelKind peek_kind(const std::string& text);

/// Throw Error(MalformedRow), Error(DigestMismatch) or Error(DimensionMismatch).
DnnCheckpoint parse_dnn(const std::string& text);
BnnCheckpoint parse_bnn(const std::string& text);

void save(const DnnCheckpoint& ckpt, const std::filesystem::path& path);
void save(const BnnCheckpoint& ckpt, const std::filesystem::path& path);

/// Throw Error(MissingModel) when the file does not exist.
ModelKind peek_kind_file(const std::filesystem::path& path);
DnnCheckpoint load_dnn(const std::filesystem::path& path);
BnnCheckpoint load_bnn(const std::filesystem::path& path);

}  // namespace uadrive::checkpoint
