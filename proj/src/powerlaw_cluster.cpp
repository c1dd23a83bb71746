#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "h2net/errors.hpp"
#include "h2net/network.hpp"

namespace h2net {
namespace {

// std::uniform_*_distribution output is library-specific; these are not.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t size) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(size));
}

bool is_connected(const std::vector<std::set<Index>>& adj) {
  if (adj.empty()) return true;
  std::vector<char> seen(adj.size(), 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const Index u = stack.back();
    stack.pop_back();
    for (Index v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count == adj.size();
}

std::vector<std::set<Index>> holme_kim(Index n, Index m, double p, std::mt19937_64& rng) {
  std::vector<std::set<Index>> adj(n);
  auto add_edge = [&](Index a, Index b) {
    adj[a].insert(b);
    adj[b].insert(a);
  };
  // Each node appears once per incident edge: sampling from this list is
  // degree-proportional.
  std::vector<Index> repeated;
  for (Index i = 0; i < m; ++i) repeated.push_back(i);

  for (Index source = m; source < n; ++source) {
    std::vector<Index> targets;
    std::set<Index> chosen;
    while (static_cast<Index>(chosen.size()) < m) {
      const Index t = repeated[uniform_index(rng, repeated.size())];
      if (chosen.insert(t).second) targets.push_back(t);
    }
    Index target = targets.back();
    targets.pop_back();
    add_edge(source, target);
    repeated.push_back(target);
    Index count = 1;
    while (count < m) {
      if (uniform01(rng) < p) {
        std::vector<Index> neighborhood;
        for (Index nbr : adj[target])
          if (nbr != source && !adj[source].count(nbr)) neighborhood.push_back(nbr);
        if (!neighborhood.empty()) {
          const Index nbr = neighborhood[uniform_index(rng, neighborhood.size())];
          add_edge(source, nbr);
          repeated.push_back(nbr);
          ++count;
          continue;
        }
      }
      // Remaining preferential targets may already be linked via a triad.
      while (!targets.empty() && adj[source].count(targets.back())) targets.pop_back();
      if (targets.empty()) break;
      target = targets.back();
      targets.pop_back();
      add_edge(source, target);
      repeated.push_back(target);
      ++count;
    }
    for (Index k = 0; k < m; ++k) repeated.push_back(source);
  }
  return adj;
}

}  // namespace

Matrix generate_powerlaw_cluster(Index n, Index m, double p_triangle, std::uint64_t seed) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "n must be at least 3");
  if (m < 1 || m >= n) throw Error(ErrorCode::InvalidArgument, "m must satisfy 1 <= m < n");
  if (!(p_triangle >= 0.0 && p_triangle <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "p_triangle must lie in [0, 1]");

  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    std::mt19937_64 rng(seed + attempt * 0x9E3779B97F4A7C15ULL);
    const auto adj = holme_kim(n, m, p_triangle, rng);
    if (!is_connected(adj)) continue;
    Matrix L = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j : adj[i]) {
        L(i, j) = -1.0;
        L(i, i) += 1.0;
      }
    return L;
  }
  throw Error(ErrorCode::DisconnectedAfterRetries,
              "no connected graph after 100 seed-derived attempts");
}

}  // namespace h2net
