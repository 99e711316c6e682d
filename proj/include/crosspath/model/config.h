#pragma once

#include <cstddef>
#include <string>

#include "crosspath/data/io.h"

namespace crosspath::model {

using data::Json;

enum class ModelKind { kAux, kVanilla };

const char* kind_name(ModelKind k);
ModelKind parse_kind(const std::string& s);

struct ModelConfig {
  ModelKind kind = ModelKind::kAux;
  int lstm_layers = 1;
  int dense_layers = 1;  // aux only; 0 allowed for structural checks
  int nodes = 50;
  double dropout = 0.0;
  int batch_size = 64;
  int epochs = 100;
  double secondary_loss_weight = 0.2;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  std::size_t input_features = 4;
  std::size_t context_size = 10;
  std::size_t output_steps = 10;
  // Aux only: merge the context vector into the dense stack. Disabling it
  // also drops the batchnorm that normalizes the merged vector.
  bool use_context = true;

  bool is_aux() const { return kind == ModelKind::kAux; }
  std::size_t output_width() const { return 2 * output_steps; }
  // Throws BuildError.
  void validate() const;
  // Stable textual form of the searched hyperparameters, used as the final
  // tie-breaker in model selection.
  std::string key() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

Json to_json(const ModelConfig& c);
ModelConfig config_from_json(const Json& j);

}  // namespace crosspath::model
