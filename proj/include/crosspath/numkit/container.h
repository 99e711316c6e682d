#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "crosspath/numkit/tensor.h"

namespace crosspath::numkit {

inline constexpr std::string_view kContainerMagic = "CROSSPATH-W1";

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Binary container for weights and sample sets:
//   magic "CROSSPATH-W1"
//   u64 metadata length, metadata bytes (UTF-8 JSON, may be empty)
//   u64 tensor count, then per tensor:
//     u64 name length, name bytes, u64 rank, rank x u64 dims,
//     product(dims) x f64
// All integers and floats little-endian. Identical input => identical bytes.
struct Container {
  std::string metadata;
  std::vector<NamedTensor> tensors;

  const Tensor& get(std::string_view name) const;
  const Tensor* find(std::string_view name) const;
};

std::string encode_container(const Container& c);
Container decode_container(std::string_view bytes);

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

}  // namespace crosspath::numkit
