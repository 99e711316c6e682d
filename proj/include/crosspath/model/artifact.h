#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

#include "crosspath/model/network.h"
#include "crosspath/model/train.h"
#include "crosspath/windowing/windowing.h"

namespace crosspath::model {

// A trained network together with everything needed to window and
// denormalize data for it.
struct ModelArtifact {
  std::unique_ptr<Network> network;
  windowing::NormalizationParams norm;
  windowing::WindowingSpec windowing;
  Json extra = Json::object();  // free-form provenance (seed, best epoch, ...)
};

numkit::Container to_container(const ModelArtifact& a);
ModelArtifact artifact_from_container(const numkit::Container& c);
void save_artifact(const std::filesystem::path& path, const ModelArtifact& a);
ModelArtifact load_artifact(const std::filesystem::path& path);

using Coordinates = std::vector<std::array<double, 2>>;

// Denormalized (x, y) predictions per sample with masked steps omitted.
// Throws StateError when `norm` is not fitted.
std::vector<Coordinates> predict(Network& net, const windowing::SampleSet& set,
                                 const windowing::NormalizationParams& norm);

}  // namespace crosspath::model
