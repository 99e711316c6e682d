#include "crosspath/explain/shapley.h"

#include <bit>
#include <string>

#include "crosspath/common/errors.h"
#include "crosspath/common/parallel.h"

namespace crosspath::explain {
namespace {

void check_players(std::size_t players) {
  if (players > kMaxPlayers) {
    throw SizeError("exact Shapley enumeration is limited to " + std::to_string(kMaxPlayers) +
                    " players, got " + std::to_string(players));
  }
}

}  // namespace

std::vector<double> tabulate(std::size_t players, const ValueFunction& v, int jobs) {
  check_players(players);
  std::vector<double> table(std::size_t{1} << players);
  parallel_for(table.size(), jobs, [&](std::size_t s) { table[s] = v(static_cast<Coalition>(s)); });
  return table;
}

std::vector<double> shapley_exact(std::size_t players, const std::vector<double>& table) {
  check_players(players);
  if (table.size() != (std::size_t{1} << players)) {
    throw SizeError("value table has " + std::to_string(table.size()) + " entries for " +
                    std::to_string(players) + " players");
  }
  std::vector<double> phi(players, 0.0);
  if (players == 0) return phi;
  // weight[k] = k! (n-k-1)! / n! = 1 / (n * C(n-1, k))
  const std::size_t n = players;
  std::vector<double> weight(n);
  double binom = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    weight[k] = 1.0 / (static_cast<double>(n) * binom);
    binom = binom * static_cast<double>(n - 1 - k) / static_cast<double>(k + 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Coalition bit = Coalition{1} << i;
    double sum = 0.0;
    for (Coalition s = 0; s < table.size(); ++s) {
      if (s & bit) continue;
      sum += weight[static_cast<std::size_t>(std::popcount(s))] * (table[s | bit] - table[s]);
    }
    phi[i] = sum;
  }
  return phi;
}

std::vector<double> shapley_exact(std::size_t players, const ValueFunction& v, int jobs) {
  return shapley_exact(players, tabulate(players, v, jobs));
}

}  // namespace crosspath::explain
