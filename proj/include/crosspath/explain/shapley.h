#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace crosspath::explain {

inline constexpr std::size_t kMaxPlayers = 12;

// Coalitions are bitmasks over players 0..n-1.
using Coalition = std::uint32_t;
using ValueFunction = std::function<double(Coalition)>;

// Values of every coalition, indexed by mask. Entries are independent, so
// they may be filled in parallel.
std::vector<double> tabulate(std::size_t players, const ValueFunction& v, int jobs = 1);

// Exact Shapley values: phi_i = sum over S not containing i of
// |S|! (n-|S|-1)! / n! * (v(S u {i}) - v(S)). Throws SizeError when
// players > kMaxPlayers or the table size does not match.
std::vector<double> shapley_exact(std::size_t players, const std::vector<double>& table);
std::vector<double> shapley_exact(std::size_t players, const ValueFunction& v, int jobs = 1);

}  // namespace crosspath::explain
