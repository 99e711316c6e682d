#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crosspath/data/io.h"

namespace crosspath::windowing {

inline constexpr std::size_t kDefaultFolds = 8;
inline constexpr double kTestFraction = 0.2;
inline constexpr std::size_t kMinSplitInstances = 10;

// Instance-level partition: a held-out test set plus k validation folds over
// the remaining pool.
struct DatasetSplit {
  std::uint64_t seed = 0;
  std::vector<std::string> test_ids;
  std::vector<std::vector<std::string>> folds;

  std::vector<std::string> pool_ids() const;
  std::vector<std::string> train_ids(std::size_t fold) const;
  const std::vector<std::string>& validation_ids(std::size_t fold) const;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

// Deterministic in (ids, seed). Throws SplitError on fewer than 10 ids or
// duplicate ids.
DatasetSplit make_splits(std::span<const std::string> ids, std::uint64_t seed,
                         std::size_t folds = kDefaultFolds);

data::Json to_json(const DatasetSplit& s);
DatasetSplit split_from_json(const data::Json& j);

}  // namespace crosspath::windowing
