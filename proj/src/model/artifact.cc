#include "crosspath/model/artifact.h"

#include "crosspath/common/errors.h"

namespace crosspath::model {

numkit::Container to_container(const ModelArtifact& a) {
  if (!a.network) throw StateError("artifact has no network");
  Json meta;
  meta["schema"] = std::string(data::kSchemaVersion);
  meta["kind"] = "model";
  meta["config"] = to_json(a.network->config());
  meta["norm"] = windowing::to_json(a.norm);
  meta["windowing"] = windowing::to_json(a.windowing);
  meta["extra"] = a.extra;
  numkit::Container c;
  c.metadata = meta.dump();
  c.tensors = a.network->export_tensors();
  return c;
}

ModelArtifact artifact_from_container(const numkit::Container& c) {
  Json meta;
  try {
    meta = Json::parse(c.metadata);
  } catch (const Json::parse_error& e) {
    throw SchemaError("metadata", e.what());
  }
  if (meta.value("kind", "") != "model") throw SchemaError("kind", "not a model artifact");
  if (meta.value("schema", "") != data::kSchemaVersion) {
    throw SchemaError("schema", "unsupported schema version");
  }
  ModelArtifact a;
  try {
    a.network = std::make_unique<Network>(config_from_json(meta.at("config")), 0);
    a.norm = windowing::norm_from_json(meta.at("norm"));
    a.windowing = windowing::spec_from_json(meta.at("windowing"));
    a.extra = meta.value("extra", Json::object());
  } catch (const Json::exception& e) {
    throw SchemaError("metadata", e.what());
  } catch (const BuildError& e) {
    throw SchemaError("config", e.what());
  }
  a.network->import_tensors(c);
  return a;
}

void save_artifact(const std::filesystem::path& path, const ModelArtifact& a) {
  numkit::write_container(path, to_container(a));
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  return artifact_from_container(numkit::read_container(path));
}

std::vector<Coordinates> predict(Network& net, const windowing::SampleSet& set,
                                 const windowing::NormalizationParams& norm) {
  if (!norm.fitted) throw StateError("normalization parameters are not attached");
  const Tensor out = predict_normalized(net, set);
  std::vector<Coordinates> result(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& mask = set.samples[i].mask;
    for (std::size_t k = 0; k < set.output_steps; ++k) {
      if (mask[k] == 0.0) continue;
      result[i].push_back({norm.invert(0, out(i, 2 * k)), norm.invert(1, out(i, 2 * k + 1))});
    }
  }
  return result;
}

}  // namespace crosspath::model
