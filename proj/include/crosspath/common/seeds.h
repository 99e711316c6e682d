#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace crosspath {

using Rng = std::mt19937_64;

// Derives an independent sub-seed from a master seed and a purpose label,
// e.g. derive_seed(seed, "shuffle"). Deterministic across runs.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

// Counter-based split: the i-th child of a seed (per-instance, per-fold).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index);

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace crosspath
