#include "powlgen/order.hpp"

namespace powlgen::order {

namespace {

using Matrix = std::vector<std::vector<bool>>;

Matrix to_matrix(std::size_t n, const EdgeSet& edges) {
  Matrix m(n, std::vector<bool>(n, false));
  for (auto [i, j] : edges) m[i][j] = true;
  return m;
}

void close(Matrix& m) {
  const std::size_t n = m.size();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (m[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (m[k][j]) m[i][j] = true;
}

}  // namespace

std::optional<EdgeSet> transitive_closure(std::size_t n, const EdgeSet& edges) {
  Matrix m = to_matrix(n, edges);
  close(m);
  EdgeSet out;
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i][i]) return std::nullopt;
    for (std::size_t j = 0; j < n; ++j)
      if (m[i][j]) out.emplace(i, j);
  }
  return out;
}

EdgeSet transitive_reduction(std::size_t n, const EdgeSet& edges) {
  Matrix m = to_matrix(n, edges);
  close(m);
  EdgeSet out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!m[i][j]) continue;
      bool implied = false;
      for (std::size_t k = 0; k < n && !implied; ++k)
        implied = k != i && k != j && m[i][k] && m[k][j];
      if (!implied) out.emplace(i, j);
    }
  return out;
}

std::vector<std::size_t> minimal_nodes(std::size_t n, const EdgeSet& edges) {
  std::vector<bool> has_in(n, false);
  for (auto [i, j] : edges) has_in[j] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!has_in[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> maximal_nodes(std::size_t n, const EdgeSet& edges) {
  std::vector<bool> has_out(n, false);
  for (auto [i, j] : edges) has_out[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!has_out[i]) out.push_back(i);
  return out;
}

}  // namespace powlgen::order
