#pragma once

// Grouped bipartite matching between decoder predictions and targets.
//
// Every referring triplet forms its own group; predictions in one group may
// only be matched to targets of that group. Groups are padded into one
// (B, N_max, M_max) cost tensor with a validity mask and solved
// independently, one Hungarian solve per group.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "trpkit/geometry.hpp"

namespace trpkit {

/// Defaults follow the box and mask decoder loss coefficients.
struct CostWeights {
  double l1 = 5.0;
  double giou = 2.0;
  double mask = 20.0;
  double dice = 1.0;
};

/// Per-pixel foreground probabilities, row-major.
struct SoftMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> probs;
};

/// Clamp applied to probabilities before taking logs in the BCE term.
inline constexpr double kBceEpsilon = 1e-7;

double box_pair_cost(const Box& pred, const Box& target, const CostWeights& w = {});
/// Mean BCE plus soft-Dice cost. Throws Error{DimensionMismatch}.
double mask_pair_cost(const SoftMask& pred, const BinaryMask& target, const CostWeights& w = {});

template <class T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<T> values) : rows(r), cols(c), data(std::move(values)) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

using CostMatrix = Matrix<double>;
using ValidMask = Matrix<std::uint8_t>;

using Prediction = std::variant<Box, SoftMask>;
using Target = std::variant<Box, BinaryMask>;

struct MatchGroup {
  std::vector<Prediction> predictions;
  std::vector<Target> targets;
};

struct GroupCostTensor {
  std::size_t batch = 0;
  std::size_t n_max = 0;
  std::size_t m_max = 0;
  std::vector<double> costs;        // batch x n_max x m_max; NaN where invalid
  std::vector<std::uint8_t> valid;  // same shape
  std::vector<std::pair<std::size_t, std::size_t>> group_sizes;

  std::size_t offset(std::size_t i, std::size_t n, std::size_t m) const { return (i * n_max + n) * m_max + m; }
  double cost(std::size_t i, std::size_t n, std::size_t m) const { return costs[offset(i, n, m)]; }
  bool is_valid(std::size_t i, std::size_t n, std::size_t m) const { return valid[offset(i, n, m)] != 0; }
};

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (prediction, target), ascending prediction
  double total_cost = 0.0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Throws Error{MixedUnits} when a group mixes boxes and masks.
GroupCostTensor build_cost_tensor(const std::vector<MatchGroup>& groups, const CostWeights& w = {});

/// Minimum-cost one-to-one assignment of min(N, M) pairs that only uses
/// entries allowed by `valid` (all entries when null). Among equal-cost
/// optima the lexicographically smallest pair sequence wins.
/// Throws Error{InfeasibleAssignment, ShapeMismatch}.
Assignment hungarian_assign(const CostMatrix& cost, const ValidMask* valid = nullptr);

/// hungarian_assign on every group's unpadded block. Throws GroupError
/// carrying the lowest failing group index.
std::vector<Assignment> group_match_parallel(const GroupCostTensor& tensor, std::size_t threads = 0);

/// Exhaustive search over injective mappings, for testing. Same tie rule as
/// hungarian_assign. Throws Error{TooLarge} when min(N, M) > 8.
Assignment brute_force_match(const CostMatrix& cost, const ValidMask* valid = nullptr);

}  // namespace trpkit
