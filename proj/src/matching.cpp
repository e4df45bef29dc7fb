#include "trpkit/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "trpkit/error.hpp"
#include "trpkit/parallel.hpp"

namespace trpkit {

double box_pair_cost(const Box& pred, const Box& target, const CostWeights& w) {
  return w.l1 * box_l1(pred, target) + w.giou * (1.0 - box_giou(pred, target));
}

double mask_pair_cost(const SoftMask& pred, const BinaryMask& target, const CostWeights& w) {
  if (pred.height != target.height || pred.width != target.width || pred.probs.size() != target.data.size()) {
    throw Error(ErrorKind::DimensionMismatch, "prediction and target masks differ in shape");
  }
  const std::size_t n = target.data.size();
  double bce = 0.0;
  double inter = 0.0;
  double psum = 0.0;
  double tsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = pred.probs[i];
    const double t = target.data[i];
    const double pc = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
    bce -= t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc);
    inter += p * t;
    psum += p;
    tsum += t;
  }
  if (n > 0) bce /= static_cast<double>(n);
  const double dice = (psum + tsum) == 0.0 ? 1.0 : 2.0 * inter / (psum + tsum);
  return w.mask * bce + w.dice * (1.0 - dice);
}

GroupCostTensor build_cost_tensor(const std::vector<MatchGroup>& groups, const CostWeights& w) {
  GroupCostTensor t;
  t.batch = groups.size();
  for (const auto& g : groups) {
    t.group_sizes.emplace_back(g.predictions.size(), g.targets.size());
    t.n_max = std::max(t.n_max, g.predictions.size());
    t.m_max = std::max(t.m_max, g.targets.size());
  }
  t.costs.assign(t.batch * t.n_max * t.m_max, std::numeric_limits<double>::quiet_NaN());
  t.valid.assign(t.costs.size(), 0);

  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    const bool boxes = std::all_of(g.predictions.begin(), g.predictions.end(),
                                   [](const Prediction& p) { return std::holds_alternative<Box>(p); }) &&
                       std::all_of(g.targets.begin(), g.targets.end(),
                                   [](const Target& x) { return std::holds_alternative<Box>(x); });
    const bool masks = std::all_of(g.predictions.begin(), g.predictions.end(),
                                   [](const Prediction& p) { return std::holds_alternative<SoftMask>(p); }) &&
                       std::all_of(g.targets.begin(), g.targets.end(),
                                   [](const Target& x) { return std::holds_alternative<BinaryMask>(x); });
    if (!boxes && !masks) throw Error(ErrorKind::MixedUnits, "group " + std::to_string(i) + " mixes boxes and masks");

    for (std::size_t n = 0; n < g.predictions.size(); ++n) {
      for (std::size_t m = 0; m < g.targets.size(); ++m) {
        const auto off = t.offset(i, n, m);
        t.costs[off] = boxes ? box_pair_cost(std::get<Box>(g.predictions[n]), std::get<Box>(g.targets[m]), w)
                             : mask_pair_cost(std::get<SoftMask>(g.predictions[n]),
                                              std::get<BinaryMask>(g.targets[m]), w);
        t.valid[off] = 1;
      }
    }
  }
  return t;
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Shortest-augmenting-path Hungarian solver on the square problem obtained
// by padding the short side with zero-cost dummy rows or columns. Entries
// rejected by `allowed` never enter the search. Afterwards the optimum is
// moved to the lexicographically smallest pair sequence by walking rows in
// order and re-routing along zero-reduced-cost edges.
template <class CostFn, class AllowedFn>
Assignment solve(std::size_t rows, std::size_t cols, CostFn cost_at, AllowedFn allowed_at) {
  Assignment result;
  if (rows == 0 || cols == 0) return result;

  const std::size_t k = std::max(rows, cols);
  const double inf = std::numeric_limits<double>::infinity();
  auto allowed = [&](std::size_t i, std::size_t j) { return i >= rows || j >= cols || allowed_at(i, j); };
  auto cost = [&](std::size_t i, std::size_t j) { return (i >= rows || j >= cols) ? 0.0 : cost_at(i, j); };

  // 1-based potentials; column 0 is the virtual root.
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0), minv(k + 1);
  std::vector<std::size_t> owner(k + 1, 0), way(k + 1, 0);
  std::vector<char> used(k + 1);
  for (std::size_t i = 1; i <= k; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= k; ++j) {
        if (used[j]) continue;
        if (allowed(i0 - 1, j - 1)) {
          const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 == 0) throw Error(ErrorKind::InfeasibleAssignment, "no complete matching over valid entries");
      for (std::size_t j = 0; j <= k; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  // Back to 0-based row/column bookkeeping.
  std::vector<std::size_t> match(k), col_owner(k);
  for (std::size_t j = 1; j <= k; ++j) {
    match[owner[j] - 1] = j - 1;
    col_owner[j - 1] = owner[j] - 1;
  }

  auto total_of = [&](const std::vector<std::size_t>& m) {
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (m[r] < cols) total += cost_at(r, m[r]);
    }
    return total;
  };
  const std::vector<std::size_t> optimal = match;
  const double optimal_total = total_of(optimal);

  double scale = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (allowed_at(r, c)) scale = std::max(scale, std::abs(cost_at(r, c)));
    }
  }
  const double tol = 1e-9 * (1.0 + scale);
  auto tight = [&](std::size_t i, std::size_t j) {
    return allowed(i, j) && std::abs(cost(i, j) - u[i + 1] - v[j + 1]) <= tol;
  };

  std::vector<char> fixed(k, 0), visited(k, 0);
  std::size_t current = 0;
  auto reroute = [&](auto&& self, std::size_t x) -> bool {
    for (std::size_t y = 0; y < k; ++y) {
      if (visited[y] || !tight(x, y)) continue;
      visited[y] = 1;
      const std::size_t z = col_owner[y];
      if (z == kNone || (!fixed[z] && z != current && self(self, z))) {
        col_owner[y] = x;
        match[x] = y;
        return true;
      }
    }
    return false;
  };
  for (std::size_t r = 0; r < rows; ++r) {
    current = r;
    const std::size_t c0 = match[r];
    for (std::size_t c = 0; c < c0 && c < cols; ++c) {
      if (!tight(r, c)) continue;
      const std::size_t other = col_owner[c];
      if (fixed[other]) continue;
      col_owner[c0] = kNone;
      std::fill(visited.begin(), visited.end(), 0);
      visited[c] = 1;
      if (reroute(reroute, other)) {
        col_owner[c] = r;
        match[r] = c;
        break;
      }
      col_owner[c0] = r;
    }
    fixed[r] = 1;
  }
  if (total_of(match) > optimal_total) match = optimal;

  for (std::size_t r = 0; r < rows; ++r) {
    if (match[r] < cols) {
      result.pairs.emplace_back(r, match[r]);
      result.total_cost += cost_at(r, match[r]);
    }
  }
  return result;
}

void check_mask_shape(const CostMatrix& cost, const ValidMask* valid) {
  if (cost.data.size() != cost.rows * cost.cols) throw Error(ErrorKind::ShapeMismatch, "cost matrix data size");
  if (valid && (valid->rows != cost.rows || valid->cols != cost.cols || valid->data.size() != cost.data.size())) {
    throw Error(ErrorKind::ShapeMismatch, "validity mask does not match cost matrix");
  }
}

}  // namespace

Assignment hungarian_assign(const CostMatrix& cost, const ValidMask* valid) {
  check_mask_shape(cost, valid);
  return solve(
      cost.rows, cost.cols, [&](std::size_t r, std::size_t c) { return cost(r, c); },
      [&](std::size_t r, std::size_t c) { return !valid || (*valid)(r, c) != 0; });
}

std::vector<Assignment> group_match_parallel(const GroupCostTensor& tensor, std::size_t threads) {
  std::vector<Assignment> out(tensor.batch);
  parallel_for(tensor.batch, threads, [&](std::size_t i) {
    const auto [n, m] = tensor.group_sizes[i];
    try {
      out[i] = solve(
          n, m, [&](std::size_t r, std::size_t c) { return tensor.cost(i, r, c); },
          [&](std::size_t r, std::size_t c) { return tensor.is_valid(i, r, c); });
    } catch (const Error& e) {
      throw GroupError(i, e);
    }
  });
  return out;
}

Assignment brute_force_match(const CostMatrix& cost, const ValidMask* valid) {
  check_mask_shape(cost, valid);
  const std::size_t rows = cost.rows;
  const std::size_t cols = cost.cols;
  const std::size_t need = std::min(rows, cols);
  if (need > 8) throw Error(ErrorKind::TooLarge, "brute force limited to min(N, M) <= 8");
  if (need == 0) return {};

  std::vector<std::size_t> pick(rows, kNone), best;
  std::vector<char> taken(cols, 0);
  double best_total = std::numeric_limits<double>::infinity();
  bool found = false;

  auto dfs = [&](auto&& self, std::size_t r, std::size_t matched, double sum) -> void {
    if (matched == need) {
      if (!found || sum < best_total) {
        found = true;
        best_total = sum;
        best = pick;
      }
      return;
    }
    if (r == rows) return;
    for (std::size_t c = 0; c < cols; ++c) {
      if (taken[c] || (valid && (*valid)(r, c) == 0)) continue;
      taken[c] = 1;
      pick[r] = c;
      self(self, r + 1, matched + 1, sum + cost(r, c));
      pick[r] = kNone;
      taken[c] = 0;
    }
    if (rows - r - 1 >= need - matched) self(self, r + 1, matched, sum);
  };
  dfs(dfs, 0, 0, 0.0);
  if (!found) throw Error(ErrorKind::InfeasibleAssignment, "no complete matching over valid entries");

  Assignment a;
  for (std::size_t r = 0; r < rows; ++r) {
    if (best[r] != kNone) {
      a.pairs.emplace_back(r, best[r]);
      a.total_cost += cost(r, best[r]);
    }
  }
  return a;
}

}  // namespace trpkit
