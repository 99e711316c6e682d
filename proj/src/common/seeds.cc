#include "crosspath/common/seeds.h"

#include <array>

namespace crosspath {
namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t from_seed_seq(std::initializer_list<std::uint32_t> words) {
  std::seed_seq seq(words);
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  const std::uint64_t tag = fnv1a(label);
  return from_seed_seq({lo(master), hi(master), lo(tag), hi(tag)});
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index) {
  const std::uint64_t tag = fnv1a(label);
  return from_seed_seq(
      {lo(master), hi(master), lo(tag), hi(tag), lo(index), hi(index)});
}

}  // namespace crosspath
