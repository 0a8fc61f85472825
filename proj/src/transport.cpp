#include "dsearch/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "dsearch/common.hpp"

namespace dsearch {

namespace {

struct BasisCell {
  int i, j;
  double alloc;
};

constexpr double kReducedCostEps = 1e-11;

}  // namespace

double transport_min_cost(std::span<const double> supply, std::span<const double> demand,
                          std::span<const double> cost) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (m == 0 || n == 0) throw Error("transportation problem requires non-empty marginals");
  if (cost.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(n))
    throw Error("cost matrix shape does not match the marginals");

  double sum_a = 0.0, sum_b = 0.0;
  for (const double a : supply) {
    if (!(a > 0.0)) throw Error("supplies must be positive");
    sum_a += a;
  }
  for (const double b : demand) {
    if (!(b > 0.0)) throw Error("demands must be positive");
    sum_b += b;
  }

  std::vector<double> ra(supply.begin(), supply.end());
  std::vector<double> rb(demand.begin(), demand.end());
  const double scale = sum_a / sum_b;  // absorb rounding dust in the demand side
  for (auto& b : rb) b *= scale;

  // Northwest corner initial basis: exactly m + n - 1 cells, possibly with
  // degenerate zero allocations.
  std::vector<BasisCell> basis;
  basis.reserve(static_cast<std::size_t>(m + n - 1));
  {
    int i = 0, j = 0;
    for (int step = 0; step < m + n - 1; ++step) {
      const double x = std::max(0.0, std::min(ra[static_cast<std::size_t>(i)], rb[static_cast<std::size_t>(j)]));
      basis.push_back({i, j, x});
      ra[static_cast<std::size_t>(i)] -= x;
      rb[static_cast<std::size_t>(j)] -= x;
      const bool row_done = ra[static_cast<std::size_t>(i)] <= rb[static_cast<std::size_t>(j)];
      if ((row_done && i + 1 < m) || j + 1 >= n) ++i;
      else ++j;
    }
  }

  const auto c_at = [&](int i, int j) {
    return cost[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
  };

  std::vector<double> u(static_cast<std::size_t>(m)), v(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> row_cells(static_cast<std::size_t>(m)),
      col_cells(static_cast<std::size_t>(n));
  std::vector<int> node_stack, parent_cell(static_cast<std::size_t>(m + n));
  std::vector<signed char> seen(static_cast<std::size_t>(m + n));

  const long max_pivots = 1000L + 64L * (static_cast<long>(m) + n) * (static_cast<long>(m) + n);
  for (long pivot = 0;; ++pivot) {
    if (pivot > max_pivots) throw Error("transportation simplex failed to converge");

    // potentials from the basis tree (u[0] fixed at 0)
    for (auto& rc : row_cells) rc.clear();
    for (auto& cc : col_cells) cc.clear();
    for (std::size_t c = 0; c < basis.size(); ++c) {
      row_cells[static_cast<std::size_t>(basis[c].i)].push_back(static_cast<int>(c));
      col_cells[static_cast<std::size_t>(basis[c].j)].push_back(static_cast<int>(c));
    }
    std::fill(seen.begin(), seen.end(), 0);
    node_stack.assign(1, 0);  // nodes: 0..m-1 rows, m..m+n-1 cols
    seen[0] = 1;
    u[0] = 0.0;
    while (!node_stack.empty()) {
      const int node = node_stack.back();
      node_stack.pop_back();
      const bool is_row = node < m;
      const auto& incident = is_row ? row_cells[static_cast<std::size_t>(node)]
                                    : col_cells[static_cast<std::size_t>(node - m)];
      for (const int c : incident) {
        const int other = is_row ? m + basis[static_cast<std::size_t>(c)].j
                                 : basis[static_cast<std::size_t>(c)].i;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = 1;
        const int bi = basis[static_cast<std::size_t>(c)].i;
        const int bj = basis[static_cast<std::size_t>(c)].j;
        if (is_row) v[static_cast<std::size_t>(bj)] = c_at(bi, bj) - u[static_cast<std::size_t>(bi)];
        else u[static_cast<std::size_t>(bi)] = c_at(bi, bj) - v[static_cast<std::size_t>(bj)];
        node_stack.push_back(other);
      }
    }

    // entering cell: first (row-major) with negative reduced cost
    int enter_i = -1, enter_j = -1;
    for (int i = 0; i < m && enter_i < 0; ++i)
      for (int j = 0; j < n; ++j)
        if (c_at(i, j) - u[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(j)] <
            -kReducedCostEps) {
          enter_i = i;
          enter_j = j;
          break;
        }
    if (enter_i < 0) break;  // optimal

    // unique tree path from the entering column node back to its row node
    std::fill(seen.begin(), seen.end(), 0);
    std::fill(parent_cell.begin(), parent_cell.end(), -1);
    node_stack.assign(1, m + enter_j);
    seen[static_cast<std::size_t>(m + enter_j)] = 1;
    while (!node_stack.empty()) {
      const int node = node_stack.back();
      node_stack.pop_back();
      if (node == enter_i) break;
      const bool is_row = node < m;
      const auto& incident = is_row ? row_cells[static_cast<std::size_t>(node)]
                                    : col_cells[static_cast<std::size_t>(node - m)];
      for (const int c : incident) {
        const int other = is_row ? m + basis[static_cast<std::size_t>(c)].j
                                 : basis[static_cast<std::size_t>(c)].i;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = 1;
        parent_cell[static_cast<std::size_t>(other)] = c;
        node_stack.push_back(other);
      }
    }

    // walk back collecting the alternating cycle; odd path positions carry '-'
    std::vector<int> minus_cells, plus_cells;
    {
      int node = enter_i;
      bool minus = true;  // edge adjacent to the entering row is a '-' edge
      while (node != m + enter_j) {
        const int c = parent_cell[static_cast<std::size_t>(node)];
        (minus ? minus_cells : plus_cells).push_back(c);
        const bool is_row = node < m;
        node = is_row ? m + basis[static_cast<std::size_t>(c)].j
                      : basis[static_cast<std::size_t>(c)].i;
        minus = !minus;
      }
    }

    // leaving cell: minimal allocation among '-' cells, ties to lowest (i,j)
    int leave = -1;
    double theta = std::numeric_limits<double>::infinity();
    for (const int c : minus_cells) {
      const auto& cell = basis[static_cast<std::size_t>(c)];
      const long long key = static_cast<long long>(cell.i) * n + cell.j;
      if (cell.alloc < theta - 1e-15 ||
          (std::fabs(cell.alloc - theta) <= 1e-15 &&
           (leave < 0 || key < static_cast<long long>(basis[static_cast<std::size_t>(leave)].i) * n +
                                   basis[static_cast<std::size_t>(leave)].j))) {
        theta = std::min(theta, cell.alloc);
        leave = c;
      }
    }

    for (const int c : plus_cells) basis[static_cast<std::size_t>(c)].alloc += theta;
    for (const int c : minus_cells)
      basis[static_cast<std::size_t>(c)].alloc = std::max(0.0, basis[static_cast<std::size_t>(c)].alloc - theta);
    basis[static_cast<std::size_t>(leave)] = {enter_i, enter_j, theta};
  }

  double total = 0.0;
  for (const auto& cell : basis) total += cell.alloc * c_at(cell.i, cell.j);
  return total;
}

}  // namespace dsearch
