#include "gffperc/midpoint.hpp"

#include <cassert>

namespace gffperc {

std::vector<double> MidpointGraph::weights() const {
  std::vector<double> w(n_total());
  for (int v = 0; v < n_total(); ++v) w[v] = weight(v);
  return w;
}

std::vector<double> MidpointGraph::parity_vector() const {
  std::vector<double> w(n_total());
  for (int v = 0; v < n_total(); ++v) w[v] = parity(v);
  return w;
}

std::vector<int> MidpointGraph::neighbors(int v) const {
  const int n = n_original();
  if (is_midpoint(v)) {
    auto [a, b] = base_->edges()[v - n];
    return {a, b};
  }
  std::vector<int> out;
  for (int e : base_->incident_edges(v)) out.push_back(n + e);
  return out;
}

void MidpointGraph::apply_walk(std::span<const double> f, std::span<double> out) const {
  assert(static_cast<int>(f.size()) == n_total() && out.size() == f.size());
  const int n = n_original();
  const int d = base_->degree();
  const double inv_d = 1.0 / d;
  const double* mid = f.data() + n;
  for (int x = 0; x < n; ++x) {
    double acc = 0.0;
    for (int e : base_->incident_edges(x)) acc += mid[e];
    out[x] = acc * inv_d;
  }
  const auto& edges = base_->edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    out[n + e] = 0.5 * (f[edges[e].first] + f[edges[e].second]);
}

}  // namespace gffperc
