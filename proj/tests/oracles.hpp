#pragma once

// Reference implementations used only by the tests. Each one is written
// against the definitions directly and shares no code with the library.

#include <cstddef>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;
using Adjacency = std::vector<std::vector<bool>>;

inline Adjacency adjacency(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Adjacency a(n, std::vector<bool>(n, false));
  for (auto [u, v] : edges) a[u][v] = a[v][u] = true;
  return a;
}

// Warshall closure restricted to `keep`.
inline bool connected(const Adjacency& a, const std::set<std::size_t>& keep) {
  if (keep.size() <= 1) return true;
  const std::size_t n = a.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i : keep) {
    r[i][i] = true;
    for (std::size_t j : keep) r[i][j] = r[i][j] || a[i][j];
  }
  for (std::size_t m : keep)
    for (std::size_t i : keep)
      for (std::size_t j : keep)
        if (r[i][m] && r[m][j]) r[i][j] = true;
  const std::size_t first = *keep.begin();
  for (std::size_t j : keep)
    if (!r[first][j]) return false;
  return true;
}

inline std::set<std::size_t> two_hop(const Adjacency& a, std::size_t j) {
  std::set<std::size_t> out;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!a[j][i]) continue;
    out.insert(i);
    for (std::size_t l = 0; l < n; ++l)
      if (a[i][l] && l != j) out.insert(l);
  }
  return out;
}

// W with w_ji = 1/N on edges and w_jj = 1 - deg_j/N.
inline Matrix weight_matrix(const Adjacency& a) {
  const std::size_t n = a.size();
  Matrix w(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t deg = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (a[j][i]) {
        w[j][i] = 1.0 / static_cast<double>(n);
        ++deg;
      }
    w[j][j] = 1.0 - static_cast<double>(deg) / static_cast<double>(n);
  }
  return w;
}

inline std::vector<double> multiply(const Matrix& w, const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) y[j] += w[j][i] * x[i];
  return y;
}

// The same iteration written with a per-neighbor memory rho_ji = sigma_i[k]
// that is kept for every neighbor, trusted or not. Trust changes enter as
// explicit corrections built from rho.
struct RhoNode {
  std::size_t id = 0;
  std::size_t n = 0;
  double x0 = 0.0;
  double x = 0.0;
  double sigma = 0.0;
  std::set<std::size_t> nbrs;
  std::set<std::size_t> active;  // trusted neighbors in the previous round
  std::map<std::size_t, double> rho;

  RhoNode(std::size_t id_, std::size_t n_, double x0_, std::set<std::size_t> nbrs_)
      : id(id_), n(n_), x0(x0_), x(x0_), nbrs(std::move(nbrs_)), active(nbrs) {
    for (std::size_t i : nbrs) rho[i] = 0.0;
  }

  // trust: full trust set this round; sigma_next: neighbors' sigma[k+1].
  void step(const std::set<std::size_t>& trust, const std::map<std::size_t, double>& sigma_next) {
    const double nn = static_cast<double>(n);
    std::set<std::size_t> now;
    for (std::size_t i : nbrs)
      if (trust.count(i)) now.insert(i);
    double eps = 0.0;
    for (std::size_t i : active)
      if (!now.count(i)) eps += (sigma - rho.at(i)) / nn;
    for (std::size_t i : now)
      if (!active.count(i)) eps -= (sigma - rho.at(i)) / nn;
    double flow = 0.0;
    for (std::size_t i : now) flow += sigma_next.at(i) - rho.at(i);
    const double x_next = (1.0 - static_cast<double>(now.size()) / nn) * x + flow / nn + eps;
    sigma += x;
    x = x_next;
    for (std::size_t i : nbrs) rho[i] = sigma_next.at(i);
    active = now;
  }

  double residual() const {
    double acc = x - x0;
    for (std::size_t i : active) acc += (sigma - rho.at(i)) / static_cast<double>(n);
    return acc;
  }
};

} // namespace oracle
