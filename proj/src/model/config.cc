#include "crosspath/model/config.h"

#include <cstdio>

#include "crosspath/common/errors.h"

namespace crosspath::model {

const char* kind_name(ModelKind k) { return k == ModelKind::kAux ? "aux" : "vanilla"; }

ModelKind parse_kind(const std::string& s) {
  if (s == "aux") return ModelKind::kAux;
  if (s == "vanilla") return ModelKind::kVanilla;
  throw ConfigError("unknown model kind '" + s + "'");
}

void ModelConfig::validate() const {
  if (lstm_layers < 1) throw BuildError("lstm_layers must be at least 1");
  if (nodes < 1) throw BuildError("nodes must be at least 1");
  if (dense_layers < 0) throw BuildError("dense_layers must be non-negative");
  if (kind == ModelKind::kVanilla && dense_layers != 0) {
    throw BuildError("vanilla models have no dense layers");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw BuildError("dropout must lie in [0, 1)");
  if (batch_size < 1) throw BuildError("batch_size must be at least 1");
  if (epochs < 1) throw BuildError("epochs must be at least 1");
  if (!(secondary_loss_weight >= 0.0)) throw BuildError("secondary_loss_weight must be >= 0");
  if (!(learning_rate > 0.0)) throw BuildError("learning_rate must be positive");
  if (input_features == 0) throw BuildError("input_features must be positive");
  if (output_steps == 0) throw BuildError("output_steps must be positive");
  if (is_aux() && use_context && context_size == 0) {
    throw BuildError("context_size must be positive when the context is merged");
  }
}

std::string ModelConfig::key() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s bs=%03d do=%.3f nodes=%03d lstm=%d dense=%d",
                kind_name(kind), batch_size, dropout, nodes, lstm_layers, dense_layers);
  return buf;
}

Json to_json(const ModelConfig& c) {
  Json j;
  j["kind"] = kind_name(c.kind);
  j["lstm_layers"] = c.lstm_layers;
  j["dense_layers"] = c.dense_layers;
  j["nodes"] = c.nodes;
  j["dropout"] = c.dropout;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["secondary_loss_weight"] = c.secondary_loss_weight;
  j["learning_rate"] = c.learning_rate;
  j["clip_norm"] = c.clip_norm;
  j["input_features"] = c.input_features;
  j["context_size"] = c.context_size;
  j["output_steps"] = c.output_steps;
  j["use_context"] = c.use_context;
  return j;
}

ModelConfig config_from_json(const Json& j) {
  ModelConfig c;
  try {
    c.kind = parse_kind(j.at("kind").get<std::string>());
    c.lstm_layers = j.value("lstm_layers", c.lstm_layers);
    c.dense_layers = j.value("dense_layers", c.is_aux() ? c.dense_layers : 0);
    c.nodes = j.value("nodes", c.nodes);
    c.dropout = j.value("dropout", c.dropout);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.secondary_loss_weight = j.value("secondary_loss_weight", c.secondary_loss_weight);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.input_features = j.value("input_features", c.input_features);
    c.context_size = j.value("context_size", c.context_size);
    c.output_steps = j.value("output_steps", c.output_steps);
    c.use_context = j.value("use_context", c.use_context);
  } catch (const Json::exception& e) {
    throw SchemaError("model", e.what());
  }
  return c;
}

}  // namespace crosspath::model
