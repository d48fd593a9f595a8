#pragma once

// Local solvers for min E(X) over a matching polytope.
//
//   frank_wolfe          Frank–Wolfe over the doubly stochastic matrices with
//                        an exact linear-assignment oracle and exact line search.
//   fw_concave_search    Frank–Wolfe over one-sided stochastic matrices where the
//                        line search is replaced by a scan over relaxations
//                        E − λδ(‖X‖² − n), all equal to E on the matchings.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccgm/energy.hpp"
#include "ccgm/errors.hpp"
#include "ccgm/parallel.hpp"
#include "ccgm/polytope.hpp"
#include "ccgm/random.hpp"

namespace ccgm {

// ---------------------------------------------------------------------------
// Linear assignment

struct Assignment {
  std::vector<int> cols;  // cols[i] = column assigned to row i
  double objective = 0;
};

namespace detail {

/// Shortest augmenting path Hungarian method, O(n³). Returns the assignment
/// and dual potentials (u for rows, v for columns) with c_ij − u_i − v_j ≥ 0.
struct HungarianSolution {
  std::vector<int> row_to_col;
  std::vector<double> u, v;
};

template <typename Derived>
HungarianSolution hungarian(const Eigen::MatrixBase<Derived>& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = static_cast<double>(cost(i0 - 1, j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  HungarianSolution s;
  s.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) s.row_to_col[p[j] - 1] = j - 1;
  s.u.assign(u.begin() + 1, u.end());
  s.v.assign(v.begin() + 1, v.end());
  return s;
}

}  // namespace detail

/// Exact minimizer of ⟨cost, X⟩ over the doubly stochastic matrices, returned
/// as a permutation. Among optimal permutations (ties up to 1e-11 relative)
/// the lexicographically smallest column sequence is returned.
template <typename Derived>
Assignment lap_oracle(const Eigen::MatrixBase<Derived>& cost) {
  if (cost.rows() != cost.cols() || cost.rows() == 0) throw invalid_argument("lap oracle needs a square cost");
  if (!cost.allFinite()) throw invalid_argument("lap oracle: non-finite cost");
  const int n = static_cast<int>(cost.rows());
  auto sol = detail::hungarian(cost);
  const double eps = 1e-11 * (1.0 + static_cast<double>(cost.cwiseAbs().maxCoeff()));
  auto tight = [&](int i, int j) {
    return static_cast<double>(cost(i, j)) - sol.u[i] - sol.v[j] <= eps;
  };

  // Any perfect matching inside the tight (equality) subgraph is optimal, so
  // fix rows greedily to their smallest column that still completes one.
  std::vector<int>& mate_row = sol.row_to_col;
  std::vector<int> mate_col(n);
  for (int i = 0; i < n; ++i) mate_col[mate_row[i]] = i;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < mate_row[i]; ++j) {
      if (!tight(i, j) || mate_col[j] < i) continue;
      // Reassign i → j; the row holding j must reach i's old column through
      // tight edges among unfixed rows.
      const int target = mate_row[i];
      const int start = mate_col[j];
      std::vector<int> parent_col(n, -1);  // for rows: the column we came from
      std::vector<char> seen_row(n, 0), seen_col(n, 0);
      std::queue<int> frontier;
      frontier.push(start);
      seen_row[start] = 1;
      seen_col[j] = 1;
      int reached = -1, reached_from = -1;
      std::vector<int> col_parent_row(n, -1);
      while (!frontier.empty() && reached < 0) {
        const int r = frontier.front();
        frontier.pop();
        for (int c = 0; c < n; ++c) {
          if (seen_col[c] || !tight(r, c)) continue;
          const int owner = mate_col[c];
          if (c != target && owner <= i) continue;
          seen_col[c] = 1;
          col_parent_row[c] = r;
          if (c == target) {
            reached = c;
            reached_from = r;
            break;
          }
          if (!seen_row[owner]) {
            seen_row[owner] = 1;
            parent_col[owner] = c;
            frontier.push(owner);
          }
        }
      }
      if (reached < 0) continue;
      // Rotate along the path: each row on it takes the column it discovered.
      int c = reached, r = reached_from;
      while (true) {
        const int prev = parent_col[r];
        mate_row[r] = c;
        mate_col[c] = r;
        if (r == start) break;
        c = prev;
        r = col_parent_row[c];
      }
      mate_row[i] = j;
      mate_col[j] = i;
      break;
    }
  }
  Assignment out;
  out.cols = mate_row;
  for (int i = 0; i < n; ++i) out.objective += static_cast<double>(cost(i, out.cols[i]));
  return out;
}

/// Closed-form LP over the one-sided polytope: a 1 at each row's minimum,
/// ties toward the smallest column.
template <typename Derived>
MatchingState<typename Derived::Scalar> row_argmin_lp(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  if (cost.cols() == 0) throw invalid_argument("row argmin needs at least one column");
  MatrixX<Scalar> X = MatrixX<Scalar>::Zero(cost.rows(), cost.cols());
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < cost.cols(); ++j)
      if (cost(i, j) < cost(i, best)) best = j;
    X(i, best) = Scalar(1);
  }
  return {std::move(X), PolytopeKind::OneSided};
}

// ---------------------------------------------------------------------------
// Configuration and results

enum class LineSearch { ExactQuadratic, UnitStep };

struct SolverConfig {
  int max_iters = 500;
  double stationarity_tol = 1e-8;     // relative FW gap: gap ≤ tol·(1 + |E|)
  LineSearch line_search = LineSearch::ExactQuadratic;
  double strict_decrease_tol = 1e-10; // concave search accepts E₁ < E₀ − tol·(1 + |E₀|)
  bool row_decoupling = true;         // concave search runs on decouple_rows(H)
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iters < 1) throw invalid_argument("max_iters must be >= 1");
    if (!(stationarity_tol > 0)) throw invalid_argument("stationarity tolerance must be > 0");
    if (!(strict_decrease_tol >= 0)) throw invalid_argument("strict decrease tolerance must be >= 0");
  }
};

struct TraceEntry {
  double energy;
  double step;  // t₀ for Frank–Wolfe, λ of the accepted relaxation for concave search
};

template <typename Scalar = double>
struct SolverResult {
  MatchingState<Scalar> X;
  double energy = 0;
  int iterations = 0;
  bool converged = false;
  bool is_vertex = false;
  std::vector<TraceEntry> trace;
};

// ---------------------------------------------------------------------------
// Frank–Wolfe over the doubly stochastic matrices

template <QuadraticForm H>
SolverResult<typename H::Scalar> frank_wolfe(const H& h, const MatchingState<typename H::Scalar>& X0,
                                             const SolverConfig& config = {}) {
  using Scalar = typename H::Scalar;
  config.validate();
  if (X0.kind != PolytopeKind::Permutation) throw invalid_argument("frank_wolfe needs a doubly stochastic start");
  validate_state(X0);
  require_shape(h, X0.rows(), X0.cols());

  SolverResult<Scalar> res;
  MatrixX<Scalar> X = X0.entries;
  Scalar E = energy(h, X);
  for (int it = 1; it <= config.max_iters; ++it) {
    res.iterations = it;
    const MatrixX<Scalar> g = gradient(h, X);
    const auto target = lap_oracle(g);
    const MatrixX<Scalar> X1 = permutation_state<Scalar>(target.cols).entries;
    const double gap = static_cast<double>(g.cwiseProduct(X - X1).sum());
    if (gap <= config.stationarity_tol * (1 + std::abs(static_cast<double>(E)))) {
      res.converged = true;
      break;
    }
    const auto q = segment_quadratic(h, X, X1);
    Scalar t;
    if (config.line_search == LineSearch::UnitStep || q.c2 <= 0)
      t = q.c1 + q.c2 < 0 ? Scalar(1) : Scalar(0);
    else
      t = std::clamp(-q.c1 / (Scalar(2) * q.c2), Scalar(0), Scalar(1));
    if (t <= 0) {
      res.converged = true;
      break;
    }
    if (t >= 1)
      X = X1;
    else
      X = (Scalar(1) - t) * X + t * X1;
    E = q(t);
    res.trace.push_back({static_cast<double>(E), static_cast<double>(t)});
  }
  res.X = {std::move(X), PolytopeKind::Permutation};
  res.energy = static_cast<double>(energy(h, res.X.entries));
  res.is_vertex = is_vertex(res.X);
  return res;
}

// ---------------------------------------------------------------------------
// Concave search over one-sided matchings

/// Uniform diagonal shift δ with M − δI ⪯ 0: the largest absolute row sum of M.
template <typename Scalar = double>
struct DiagonalRegularizer {
  Scalar value = 0;
};

template <typename Scalar>
DiagonalRegularizer<Scalar> gershgorin_regularizer(const KroneckerHessian<Scalar>& h) {
  const auto& terms = h.terms();
  if (terms.empty()) return {};
  if (terms.size() == 1) {
    // |s (B ⊗ A)| row sums factor into products of factor row sums.
    const auto& t = terms.front();
    return {std::abs(t.weight) * t.left.cwiseAbs().rowwise().sum().maxCoeff() *
            t.right.cwiseAbs().rowwise().sum().maxCoeff()};
  }
  const Eigen::Index n = h.rows(), n0 = h.cols();
  Scalar best = 0;
  VectorX<Scalar> row(n0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n0; ++j) {
      Scalar total = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        row.setZero();
        for (const auto& t : terms) row += (t.weight * t.left(i, k)) * t.right.col(j);
        total += row.cwiseAbs().sum();
      }
      best = std::max(best, total);
    }
  }
  return {best};
}

namespace detail {

/// λ ∈ (0, 1) at which two entries of a row of g − 2λδX tie.
template <typename Scalar>
std::vector<Scalar> critical_lambdas(const MatrixX<Scalar>& g, const MatrixX<Scalar>& X, Scalar delta) {
  std::vector<Scalar> out;
  if (delta <= 0) return out;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      for (Eigen::Index l = j + 1; l < g.cols(); ++l) {
        const Scalar dx = X(i, j) - X(i, l);
        if (dx == 0) continue;
        const Scalar lam = (g(i, j) - g(i, l)) / (Scalar(2) * delta * dx);
        if (lam > 0 && lam < 1) out.push_back(lam);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// 0, every critical value, the midpoint of every gap, and 1: covers each
/// distinct row-argmin configuration on [0, 1].
template <typename Scalar>
std::vector<Scalar> lambda_schedule(const std::vector<Scalar>& critical) {
  std::vector<Scalar> s{Scalar(0)};
  Scalar prev = 0;
  for (Scalar c : critical) {
    s.push_back(Scalar(0.5) * (prev + c));
    s.push_back(c);
    prev = c;
  }
  s.push_back(Scalar(0.5) * (prev + Scalar(1)));
  s.push_back(Scalar(1));
  return s;
}

}  // namespace detail

/// Frank–Wolfe with a concave search over one-sided matchings.
///
/// From the current X the step target is the row argmin of ∇E(X) − 2λδX, the
/// linearization of the relaxation E_λ = E − λδ(‖X‖² − n), which coincides
/// with E on the matchings. λ scans the row tie points from 0 upward; the first
/// target that lowers the energy is taken and λ resets. At λ = 1, M − δI ⪯ 0
/// so E₁ is concave and its Frank–Wolfe step cannot increase E₁; if X is
/// already a matching and no λ helps, X is returned.
///
/// With config.row_decoupling the scan runs on decouple_rows(h), which equals
/// h on matchings and has no self-row interaction; termination then implies
/// no single-row reassignment lowers the energy.
template <typename Scalar>
SolverResult<Scalar> fw_concave_search(const KroneckerHessian<Scalar>& h, const MatchingState<Scalar>& X0,
                                       const SolverConfig& config = {}) {
  config.validate();
  if (X0.kind != PolytopeKind::OneSided) throw invalid_argument("concave search needs a one-sided start");
  validate_state(X0);
  require_shape(h, X0.rows(), X0.cols());

  const KroneckerHessian<Scalar> work = config.row_decoupling ? decouple_rows(h) : h;
  const Scalar delta = gershgorin_regularizer(work).value;

  SolverResult<Scalar> res;
  MatrixX<Scalar> X = X0.entries;
  Scalar E = energy(work, X);
  for (int it = 1; it <= config.max_iters; ++it) {
    res.iterations = it;
    const MatrixX<Scalar> g = gradient(work, X);
    const bool at_vertex = is_vertex(MatchingState<Scalar>{X, PolytopeKind::OneSided});
    const Scalar accept_below = E - Scalar(config.strict_decrease_tol) * (Scalar(1) + std::abs(E));

    bool accepted = false;
    MatrixX<Scalar> step, previous;
    Scalar step_energy = 0, step_lambda = 0;
    for (Scalar lambda : detail::lambda_schedule(detail::critical_lambdas(g, X, delta))) {
      MatrixX<Scalar> X1 = row_argmin_lp(g - (Scalar(2) * lambda * delta) * X).entries;
      if (previous.size() && X1 == previous) continue;
      previous = X1;
      const Scalar E1 = energy(work, X1);
      if (E1 < accept_below) {
        step = std::move(X1);
        step_energy = E1;
        step_lambda = lambda;
        accepted = true;
        break;
      }
      if (lambda == Scalar(1)) {
        if (at_vertex && E1 > E + Scalar(1e-8) * (Scalar(1) + std::abs(E)))
          throw numerical_error("concave search: concave step increased the energy");
        step = std::move(X1);
        step_energy = E1;
        step_lambda = lambda;
      }
    }
    if (!accepted) {
      if (at_vertex) {
        res.converged = true;
        break;
      }
      // Interior start: the λ = 1 target is a matching with E ≤ E₁(X).
      if (step.size() == 0) step = previous;
      step_energy = energy(work, step);
      step_lambda = 1;
    }
    X = std::move(step);
    E = step_energy;
    res.trace.push_back({static_cast<double>(energy(h, X)), static_cast<double>(step_lambda)});
  }
  res.X = {std::move(X), PolytopeKind::OneSided};
  res.energy = static_cast<double>(energy(h, res.X.entries));
  res.is_vertex = is_vertex(res.X);
  return res;
}

// ---------------------------------------------------------------------------
// Multi-start

inline constexpr double kAnchorBlend = 0.9;

/// Start point biased toward l random anchor pairs: anchored rows one-hot at
/// their anchor column, other entries 1/n₀, blended 0.9 : 0.1 with the
/// barycenter; projected by Sinkhorn in the permutation case.
template <typename Scalar = double>
MatchingState<Scalar> anchored_start(PolytopeKind kind, Eigen::Index n, Eigen::Index n0, int anchors, Rng& rng) {
  if (anchors < 0 || anchors > std::min(n, n0)) throw invalid_argument("anchor count out of range");
  std::vector<int> rows(static_cast<std::size_t>(n)), cols(static_cast<std::size_t>(n0));
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::shuffle(cols.begin(), cols.end(), rng);
  const Scalar fill = Scalar(1) / Scalar(n0);
  MatrixX<Scalar> seedm = MatrixX<Scalar>::Constant(n, n0, fill);
  for (int a = 0; a < anchors; ++a) {
    seedm.row(rows[static_cast<std::size_t>(a)]).setZero();
    seedm(rows[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(a)]) = Scalar(1);
  }
  MatrixX<Scalar> X = (Scalar(1) - Scalar(kAnchorBlend)) * MatrixX<Scalar>::Constant(n, n0, fill) +
                      Scalar(kAnchorBlend) * seedm;
  if (kind == PolytopeKind::Permutation) return sinkhorn_project(X);
  return {std::move(X), PolytopeKind::OneSided};
}

template <typename Scalar>
SolverResult<Scalar> solve(const KroneckerHessian<Scalar>& h, const MatchingState<Scalar>& X0,
                           const SolverConfig& config) {
  return X0.kind == PolytopeKind::Permutation ? frank_wolfe(h, X0, config) : fw_concave_search(h, X0, config);
}

template <typename Scalar = double>
struct MultiStartResult {
  SolverResult<Scalar> best;
  std::size_t best_restart = 0;
  std::vector<double> energies;  // per restart, in restart order
};

/// Restart r uses derive_seed(seed, r); the best energy wins, ties by restart index.
template <typename Scalar>
MultiStartResult<Scalar> multi_start(const KroneckerHessian<Scalar>& h, PolytopeKind kind, int anchors,
                                     int restarts, const SolverConfig& config, unsigned threads = 1) {
  if (restarts < 1) throw invalid_argument("multi_start needs restarts >= 1");
  std::vector<SolverResult<Scalar>> results(static_cast<std::size_t>(restarts));
  parallel_for(results.size(), threads, [&](std::size_t r) {
    auto rng = make_rng(derive_seed(config.seed, r));
    const auto X0 = anchored_start<Scalar>(kind, h.rows(), h.cols(), anchors, rng);
    results[r] = solve(h, X0, config);
  });
  MultiStartResult<Scalar> out;
  out.energies.reserve(results.size());
  for (std::size_t r = 0; r < results.size(); ++r) {
    out.energies.push_back(results[r].energy);
    if (r == 0 || results[r].energy < results[out.best_restart].energy) out.best_restart = r;
  }
  out.best = std::move(results[out.best_restart]);
  return out;
}

}  // namespace ccgm
