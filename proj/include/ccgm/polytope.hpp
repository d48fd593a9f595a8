#pragma once

// Matching polytopes: doubly stochastic matrices (convex hull of permutations)
// and one-sided stochastic matrices (convex hull of maps with one 1 per row).
//
// Vectorization convention used throughout the library: [X] stacks the
// columns of X, so (B ⊗ A)[X] = [A X Bᵀ]. Under this convention the columns of
// F ⊗ F span lin(DS) and map to matrices F Y Fᵀ, and the columns of F ⊗ I span
// the one-sided lin space and map to Y Fᵀ.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccgm/errors.hpp"
#include "ccgm/random.hpp"

namespace ccgm {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class PolytopeKind { Permutation, OneSided };

inline const char* to_string(PolytopeKind kind) {
  return kind == PolytopeKind::Permutation ? "permutation" : "one-sided";
}

inline constexpr double kStateTolerance = 1e-9;
inline constexpr double kBasisTolerance = 1e-12;

/// A point of a matching polytope.
template <typename Scalar = double>
struct MatchingState {
  MatrixX<Scalar> entries;
  PolytopeKind kind = PolytopeKind::Permutation;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

/// Checks membership in the polytope named by `kind`; throws on violation.
template <typename Scalar>
void validate_state(const MatchingState<Scalar>& state, double tol = kStateTolerance) {
  const auto& X = state.entries;
  if (X.size() == 0) throw invalid_argument("matching state is empty");
  if (!X.allFinite()) throw invalid_argument("matching state has non-finite entries");
  if (X.minCoeff() < -kBasisTolerance) throw invalid_argument("matching state has negative entries");
  const Scalar row_dev = (X.rowwise().sum().array() - Scalar(1)).abs().maxCoeff();
  if (row_dev > tol) throw invalid_argument("matching state rows do not sum to 1");
  if (state.kind == PolytopeKind::Permutation) {
    if (X.rows() != X.cols()) throw invalid_argument("permutation polytope requires a square state");
    const Scalar col_dev = (X.colwise().sum().array() - Scalar(1)).abs().maxCoeff();
    if (col_dev > tol) throw invalid_argument("matching state columns do not sum to 1");
  }
}

template <typename Scalar>
bool is_feasible(const MatchingState<Scalar>& state, double tol = kStateTolerance) {
  try {
    validate_state(state, tol);
    return true;
  } catch (const Error&) {
    return false;
  }
}

/// Orthonormal basis of the zero-sum subspace 1⊥ ⊂ Rⁿ, stored as n×(n−1).
template <typename Scalar = double>
struct ZeroSumBasis {
  MatrixX<Scalar> columns;

  Eigen::Index dimension() const { return columns.rows(); }
};

/// Columns 2..n of the Householder reflection taking e₁ to 1/√n.
template <typename Scalar = double>
ZeroSumBasis<Scalar> make_zero_sum_basis(Eigen::Index n) {
  if (n < 2) throw invalid_argument("zero-sum basis needs n >= 2, got " + std::to_string(n));
  VectorX<Scalar> v = VectorX<Scalar>::Constant(n, -Scalar(1) / std::sqrt(Scalar(n)));
  v(0) += Scalar(1);
  const Scalar vv = v.squaredNorm();
  MatrixX<Scalar> H = MatrixX<Scalar>::Identity(n, n) - (Scalar(2) / vv) * v * v.transpose();
  return {H.rightCols(n - 1)};
}

struct PolytopeDescriptor {
  PolytopeKind kind = PolytopeKind::Permutation;
  Eigen::Index n = 0;   // source vertices (rows)
  Eigen::Index n0 = 0;  // target vertices (columns)

  static PolytopeDescriptor permutation(Eigen::Index n) { return {PolytopeKind::Permutation, n, n}; }
  static PolytopeDescriptor one_sided(Eigen::Index n, Eigen::Index n0) {
    return {PolytopeKind::OneSided, n, n0};
  }

  Eigen::Index lin_dimension() const {
    return kind == PolytopeKind::Permutation ? (n - 1) * (n - 1) : n * (n0 - 1);
  }

  void validate() const {
    if (kind == PolytopeKind::Permutation && (n != n0 || n < 2))
      throw invalid_argument("permutation polytope needs n == n0 >= 2");
    if (kind == PolytopeKind::OneSided && (n < 1 || n0 < 2))
      throw invalid_argument("one-sided polytope needs n >= 1 and n0 >= 2");
  }
};

/// Alternating row/column normalization onto the doubly stochastic polytope.
template <typename Derived>
MatchingState<typename Derived::Scalar> sinkhorn_project(const Eigen::MatrixBase<Derived>& X,
                                                         double tol = 1e-12, int max_iters = 10000) {
  using Scalar = typename Derived::Scalar;
  if (X.rows() != X.cols() || X.rows() == 0) throw invalid_argument("sinkhorn needs a square matrix");
  if (!X.allFinite()) throw invalid_argument("sinkhorn input has non-finite entries");
  if (X.minCoeff() < Scalar(0)) throw invalid_argument("sinkhorn input must be nonnegative");

  MatrixX<Scalar> P = X.cwiseMax(Scalar(1e-12));
  double residual = 0;
  for (int it = 0; it < max_iters; ++it) {
    P.array().colwise() /= P.rowwise().sum().array();
    P.array().rowwise() /= P.colwise().sum().array();
    // Columns are exact after the last sweep; rows carry the residual.
    residual = static_cast<double>((P.rowwise().sum().array() - Scalar(1)).abs().maxCoeff());
    if (residual <= tol) return {std::move(P), PolytopeKind::Permutation};
  }
  throw ConvergenceError("sinkhorn did not converge in " + std::to_string(max_iters) + " iterations",
                         residual);
}

/// True iff every entry is within tol of {0,1} and the 1s form a vertex of the
/// polytope: one per row, plus one per column for the permutation polytope.
template <typename Scalar>
bool is_vertex(const MatchingState<Scalar>& state, double tol = 1e-9) {
  const auto& X = state.entries;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    int ones = 0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double x = static_cast<double>(X(i, j));
      if (std::abs(x - 1.0) <= tol)
        ++ones;
      else if (std::abs(x) > tol)
        return false;
    }
    if (ones != 1) return false;
  }
  if (state.kind == PolytopeKind::Permutation) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      int ones = 0;
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        if (std::abs(static_cast<double>(X(i, j)) - 1.0) <= tol) ++ones;
      if (ones != 1) return false;
    }
  }
  return true;
}

/// Column index of the largest entry in each row; for a vertex this is the map.
template <typename Scalar>
std::vector<int> assignment_of(const MatchingState<Scalar>& state) {
  std::vector<int> out(static_cast<std::size_t>(state.rows()));
  for (Eigen::Index i = 0; i < state.rows(); ++i) {
    Eigen::Index j;
    state.entries.row(i).maxCoeff(&j);
    out[static_cast<std::size_t>(i)] = static_cast<int>(j);
  }
  return out;
}

template <typename Scalar = double>
MatchingState<Scalar> permutation_state(const std::vector<int>& perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  MatrixX<Scalar> P = MatrixX<Scalar>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) P(i, perm[static_cast<std::size_t>(i)]) = Scalar(1);
  return {std::move(P), PolytopeKind::Permutation};
}

template <typename Scalar = double>
MatchingState<Scalar> one_sided_state(const std::vector<int>& map, Eigen::Index n0) {
  const auto n = static_cast<Eigen::Index>(map.size());
  MatrixX<Scalar> P = MatrixX<Scalar>::Zero(n, n0);
  for (Eigen::Index i = 0; i < n; ++i) P(i, map[static_cast<std::size_t>(i)]) = Scalar(1);
  return {std::move(P), PolytopeKind::OneSided};
}

/// Coordinates of X in the orthonormal lin-space basis, as a matrix:
/// FᵀXF for DS, XF for one-sided.
template <typename Scalar, typename Derived>
MatrixX<Scalar> to_lin_coordinates(const ZeroSumBasis<Scalar>& basis, PolytopeKind kind,
                                   const Eigen::MatrixBase<Derived>& X) {
  const auto& F = basis.columns;
  if (kind == PolytopeKind::Permutation) return F.transpose() * X * F;
  return X * F;
}

/// Inverse of to_lin_coordinates on the lin space.
template <typename Scalar, typename Derived>
MatrixX<Scalar> from_lin_coordinates(const ZeroSumBasis<Scalar>& basis, PolytopeKind kind,
                                     const Eigen::MatrixBase<Derived>& Y) {
  const auto& F = basis.columns;
  if (kind == PolytopeKind::Permutation) return F * Y * F.transpose();
  return Y * F.transpose();
}

/// Uniform direction on the unit sphere of the polytope's lin space.
template <typename Scalar = double>
MatrixX<Scalar> random_direction_in_lin(const PolytopeDescriptor& desc, Rng& rng) {
  desc.validate();
  const auto basis = make_zero_sum_basis<Scalar>(desc.n0);
  MatrixX<Scalar> Y = desc.kind == PolytopeKind::Permutation
                          ? gaussian_matrix<Scalar>(desc.n - 1, desc.n0 - 1, rng)
                          : gaussian_matrix<Scalar>(desc.n, desc.n0 - 1, rng);
  MatrixX<Scalar> V = from_lin_coordinates(basis, desc.kind, Y);
  V /= V.norm();
  return V;
}

template <typename Scalar = double>
MatrixX<Scalar> random_direction_in_lin(const PolytopeDescriptor& desc, std::uint64_t seed) {
  auto rng = make_rng(seed);
  return random_direction_in_lin<Scalar>(desc, rng);
}

}  // namespace ccgm
