#include "crosspath/windowing/splits.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "crosspath/common/errors.h"
#include "crosspath/common/seeds.h"

namespace crosspath::windowing {

std::vector<std::string> DatasetSplit::pool_ids() const {
  std::vector<std::string> out;
  for (const auto& f : folds) out.insert(out.end(), f.begin(), f.end());
  return out;
}

std::vector<std::string> DatasetSplit::train_ids(std::size_t fold) const {
  if (fold >= folds.size()) throw SplitError("fold index out of range");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    if (k != fold) out.insert(out.end(), folds[k].begin(), folds[k].end());
  }
  return out;
}

const std::vector<std::string>& DatasetSplit::validation_ids(std::size_t fold) const {
  if (fold >= folds.size()) throw SplitError("fold index out of range");
  return folds[fold];
}

DatasetSplit make_splits(std::span<const std::string> ids, std::uint64_t seed,
                         std::size_t folds) {
  if (ids.size() < kMinSplitInstances) {
    throw SplitError("need at least " + std::to_string(kMinSplitInstances) +
                     " instances to split, got " + std::to_string(ids.size()));
  }
  if (folds < 2) throw SplitError("need at least 2 folds");
  std::vector<std::string> order(ids.begin(), ids.end());
  // Sort first so the result depends on the id set, not the input order.
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
    throw SplitError("duplicate instance ids");
  }
  Rng rng = make_rng(derive_seed(seed, "split"));
  std::shuffle(order.begin(), order.end(), rng);

  DatasetSplit s;
  s.seed = seed;
  const auto n_test = static_cast<std::size_t>(std::lround(kTestFraction * order.size()));
  s.test_ids.assign(order.begin(), order.begin() + n_test);
  s.folds.assign(folds, {});
  for (std::size_t i = n_test; i < order.size(); ++i) {
    s.folds[(i - n_test) % folds].push_back(order[i]);
  }
  return s;
}

data::Json to_json(const DatasetSplit& s) {
  data::Json j;
  j["seed"] = s.seed;
  j["test_ids"] = s.test_ids;
  j["folds"] = s.folds;
  return j;
}

DatasetSplit split_from_json(const data::Json& j) {
  DatasetSplit s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.test_ids = j.at("test_ids").get<std::vector<std::string>>();
    s.folds = j.at("folds").get<std::vector<std::vector<std::string>>>();
  } catch (const data::Json::exception& e) {
    throw SchemaError("split", e.what());
  }
  return s;
}

}  // namespace crosspath::windowing
