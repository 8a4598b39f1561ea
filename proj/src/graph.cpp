#include "mtd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mtd/errors.hpp"

namespace mtd {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

AttackDefenseStructure AttackDefenseStructure::from_pairs(
    int node_count, const std::vector<std::pair<int, int>>& pairs, bool directed) {
  if (node_count < 1) {
    throw ValidationError("structure needs at least one node (node_count=" +
                          std::to_string(node_count) + ")");
  }
  std::set<std::pair<int, int>> ordered;
  for (const auto& [u, v] : pairs) {
    if (u < 0 || u >= node_count || v < 0 || v >= node_count) {
      throw ValidationError("edge endpoint out of range: (" + std::to_string(u) + ", " +
                            std::to_string(v) + ") with node_count=" +
                            std::to_string(node_count));
    }
    if (u == v) {
      throw ValidationError("self-loop rejected at node " + std::to_string(u));
    }
    ordered.insert({u, v});
    if (!directed) ordered.insert({v, u});
  }

  AttackDefenseStructure s;
  s.node_count_ = node_count;
  s.directed_ = directed;
  s.ordered_edge_count_ = ordered.size();
  s.attackers_.assign(node_count, {});
  s.out_degree_.assign(node_count, 0);
  for (const auto& [u, v] : ordered) {
    s.attackers_[v].push_back(u);  // u attacks v
    s.out_degree_[u] += 1;
  }
  for (auto& in : s.attackers_) {
    std::sort(in.begin(), in.end());
    s.max_in_degree_ = std::max(s.max_in_degree_, static_cast<int>(in.size()));
  }
  for (int d : s.out_degree_) s.max_out_degree_ = std::max(s.max_out_degree_, d);
  return s;
}

const std::vector<int>& AttackDefenseStructure::attackers_of(int v) const {
  if (v < 0 || v >= node_count_) {
    throw ValidationError("node id out of range: " + std::to_string(v));
  }
  return attackers_[v];
}

bool AttackDefenseStructure::has_edge(int u, int v) const {
  const auto& in = attackers_of(v);
  if (u < 0 || u >= node_count_) {
    throw ValidationError("node id out of range: " + std::to_string(u));
  }
  return std::binary_search(in.begin(), in.end(), u);
}

int AttackDefenseStructure::out_degree(int v) const {
  if (v < 0 || v >= node_count_) {
    throw ValidationError("node id out of range: " + std::to_string(v));
  }
  return out_degree_[v];
}

std::optional<double> AttackDefenseStructure::cached_lambda1() const {
  std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->value;
}

double AttackDefenseStructure::spectral_radius(double tol, int max_iter) const {
  if (!(tol > 0.0)) {
    throw ValidationError("spectral tolerance must be > 0 (got " + format_double(tol) + ")");
  }
  if (max_iter < 1) {
    throw ValidationError("spectral max_iter must be >= 1 (got " + std::to_string(max_iter) +
                          ")");
  }

  std::lock_guard<std::mutex> lock(cache_->mutex);
  if (cache_->value) return *cache_->value;

  if (ordered_edge_count_ == 0) {
    cache_->value = 0.0;
    return 0.0;
  }

  const int n = node_count_;
  const double shift = 1.0;  // keeps iterates strictly positive and breaks +-lambda ties

  // Deterministic positive start vector, independent of node labels' meaning.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::vector<double> x(n), y(n);
  for (int v = 0; v < n; ++v) {
    const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x[v] = 0.5 + u01;  // in [0.5, 1.5)
  }
  double norm = 0.0;
  for (double e : x) norm += e * e;
  norm = std::sqrt(norm);
  for (double& e : x) e /= norm;

  double estimate = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    // y = (A + shift I) x
    for (int v = 0; v < n; ++v) {
      double acc = shift * x[v];
      for (int u : attackers_[v]) acc += x[u];
      y[v] = acc;
    }

    if (!directed_) {
      // x has unit norm, so the Rayleigh quotient is just <x, y>.
      double rho = 0.0;
      for (int v = 0; v < n; ++v) rho += x[v] * y[v];
      double resid = 0.0;
      for (int v = 0; v < n; ++v) {
        const double r = y[v] - rho * x[v];
        resid += r * r;
      }
      resid = std::sqrt(resid);
      estimate = rho - shift;
      // For a symmetric matrix the residual norm bounds the distance from rho
      // to the nearest eigenvalue.
      if (resid <= tol * std::max(estimate, shift)) {
        cache_->value = estimate;
        return estimate;
      }
    } else {
      // Collatz-Wielandt: for positive x the ratios (A'x)_v / x_v bracket the
      // Perron root of A'.
      double lo = y[0] / x[0], hi = lo;
      for (int v = 1; v < n; ++v) {
        const double r = y[v] / x[v];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      estimate = 0.5 * (lo + hi) - shift;
      if (hi - lo <= tol * std::max(lo - shift, shift)) {
        cache_->value = estimate;
        return estimate;
      }
    }

    norm = 0.0;
    for (double e : y) norm += e * e;
    norm = std::sqrt(norm);
    for (int v = 0; v < n; ++v) x[v] = y[v] / norm;
  }

  throw SpectralIterationError(
      "spectral iteration did not converge after " + std::to_string(max_iter) +
          " iterations (last estimate " + format_double(estimate) + ")",
      estimate);
}

AttackDefenseStructure generate_complete(int node_count) {
  if (node_count < 1) {
    throw ValidationError("complete structure: node_count must be >= 1 (got " +
                          std::to_string(node_count) + ")");
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(node_count) * (node_count - 1) / 2);
  for (int u = 0; u < node_count; ++u)
    for (int v = u + 1; v < node_count; ++v) pairs.push_back({u, v});
  return AttackDefenseStructure::from_pairs(node_count, pairs, /*directed=*/false);
}

AttackDefenseStructure generate_star(int leaves) {
  if (leaves < 1) {
    throw ValidationError("star structure: leaves must be >= 1 (got " +
                          std::to_string(leaves) + ")");
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(leaves);
  for (int leaf = 1; leaf <= leaves; ++leaf) pairs.push_back({0, leaf});
  return AttackDefenseStructure::from_pairs(leaves + 1, pairs, /*directed=*/false);
}

AttackDefenseStructure generate_path(int node_count) {
  if (node_count < 1) {
    throw ValidationError("path structure: node_count must be >= 1 (got " +
                          std::to_string(node_count) + ")");
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(node_count > 0 ? node_count - 1 : 0);
  for (int v = 0; v + 1 < node_count; ++v) pairs.push_back({v, v + 1});
  return AttackDefenseStructure::from_pairs(node_count, pairs, /*directed=*/false);
}

AttackDefenseStructure generate_erdos_renyi(int node_count, double edge_probability,
                                            std::uint64_t seed) {
  if (node_count < 1) {
    throw ValidationError("erdos_renyi structure: node_count must be >= 1 (got " +
                          std::to_string(node_count) + ")");
  }
  if (!(edge_probability >= 0.0 && edge_probability <= 1.0)) {
    throw ValidationError("erdos_renyi structure: edge_probability must lie in [0, 1] (got " +
                          format_double(edge_probability) + ")");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::pair<int, int>> pairs;
  for (int u = 0; u < node_count; ++u) {
    for (int v = u + 1; v < node_count; ++v) {
      const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u01 < edge_probability) pairs.push_back({u, v});
    }
  }
  return AttackDefenseStructure::from_pairs(node_count, pairs, /*directed=*/false);
}

AttackDefenseStructure load_edge_list(std::string_view text, bool directed) {
  std::vector<std::pair<int, int>> pairs;  // 0-based
  std::optional<int> declared_n;
  int max_id = 0;  // largest 1-based id seen
  int line_no = 0;
  bool saw_edge = false;

  std::istringstream stream{std::string(text)};
  std::string line;
  while (std::getline(stream, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;  // blank / comment-only line

    if (first.rfind("n=", 0) == 0) {
      if (saw_edge || declared_n) {
        throw ValidationError("edge list line " + std::to_string(line_no) +
                              ": node-count header allowed only once, before any edge");
      }
      try {
        std::size_t used = 0;
        const int n = std::stoi(first.substr(2), &used);
        if (used != first.size() - 2 || n < 1) throw std::invalid_argument("bad");
        declared_n = n;
      } catch (const std::exception&) {
        throw ValidationError("edge list line " + std::to_string(line_no) +
                              ": malformed node-count header '" + first + "'");
      }
      std::string extra;
      if (ls >> extra) {
        throw ValidationError("edge list line " + std::to_string(line_no) +
                              ": unexpected token '" + extra + "' after header");
      }
      continue;
    }

    int u = 0, v = 0;
    try {
      std::size_t used = 0;
      u = std::stoi(first, &used);
      if (used != first.size()) throw std::invalid_argument("bad");
    } catch (const std::exception&) {
      throw ValidationError("edge list line " + std::to_string(line_no) +
                            ": expected integer node id, got '" + first + "'");
    }
    std::string second;
    if (!(ls >> second)) {
      throw ValidationError("edge list line " + std::to_string(line_no) +
                            ": expected two node ids");
    }
    try {
      std::size_t used = 0;
      v = std::stoi(second, &used);
      if (used != second.size()) throw std::invalid_argument("bad");
    } catch (const std::exception&) {
      throw ValidationError("edge list line " + std::to_string(line_no) +
                            ": expected integer node id, got '" + second + "'");
    }
    std::string extra;
    if (ls >> extra) {
      throw ValidationError("edge list line " + std::to_string(line_no) +
                            ": unexpected trailing token '" + extra + "'");
    }
    if (u < 1 || v < 1) {
      throw ValidationError("edge list line " + std::to_string(line_no) +
                            ": node ids are 1-based (got " + std::to_string(u) + " " +
                            std::to_string(v) + ")");
    }
    if (u == v) {
      throw ValidationError("edge list line " + std::to_string(line_no) +
                            ": self-loop rejected at node " + std::to_string(u));
    }
    if (declared_n && (u > *declared_n || v > *declared_n)) {
      throw ValidationError("edge list line " + std::to_string(line_no) + ": node id " +
                            std::to_string(std::max(u, v)) + " exceeds declared n=" +
                            std::to_string(*declared_n));
    }
    saw_edge = true;
    max_id = std::max({max_id, u, v});
    pairs.push_back({u - 1, v - 1});
  }

  const int node_count = declared_n ? *declared_n : max_id;
  if (node_count < 1) {
    throw ValidationError("edge list declares no nodes (empty input without header)");
  }
  return AttackDefenseStructure::from_pairs(node_count, pairs, directed);
}

AttackDefenseStructure load_edge_list_file(const std::string& path, bool directed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open edge list file: " + path);
  }
  std::ostringstream content;
  content << in.rdbuf();
  return load_edge_list(content.str(), directed);
}

}  // namespace mtd
