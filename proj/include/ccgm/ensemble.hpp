#pragma once

// Random-Hessian experiment: how often do Frank–Wolfe limits on the doubly
// stochastic polytope land on permutations when the Hessian is drawn from the
// orthogonally invariant ensemble U Λ_{m,p} Uᵀ on lin(DS)?

#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ccgm/concavity.hpp"
#include "ccgm/energy.hpp"
#include "ccgm/parallel.hpp"
#include "ccgm/polytope.hpp"
#include "ccgm/solver.hpp"

namespace ccgm {

/// Dimension of the smallest face of DS containing X: |support| − 2n + (number
/// of connected components of the bipartite support graph). 0 at permutations.
template <typename Scalar>
int face_dimension(const MatchingState<Scalar>& state, double tol = 1e-6) {
  const auto n = state.rows(), n0 = state.cols();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n + n0));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index x) {
    while (parent[static_cast<std::size_t>(x)] != x)
      x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  Eigen::Index edges = 0, components = n + n0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n0; ++j)
      if (static_cast<double>(state.entries(i, j)) > tol) {
        ++edges;
        const auto a = find(i), b = find(n + j);
        if (a != b) {
          parent[static_cast<std::size_t>(a)] = b;
          --components;
        }
      }
  return static_cast<int>(edges - n - n0 + components);
}

/// Uniformly random positive matrix pushed onto DS by Sinkhorn.
inline MatchingState<double> random_interior_point(Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  Eigen::MatrixXd X(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = unit(rng);
  return sinkhorn_project(X);
}

struct EnsembleReport {
  SpectrumTemplate spectrum;
  Eigen::Index n = 0;
  int trials = 0;
  int vertex_count = 0;
  int converged_count = 0;
  std::map<int, int> face_histogram;  // face dimension → count, all trials
  double mean_iterations = 0;

  double vertex_fraction() const { return trials ? static_cast<double>(vertex_count) / trials : 0.0; }
};

struct EnsembleOptions {
  int trials = 200;
  std::uint64_t seed = 0;
  double vertex_tol = 1e-6;
  SolverConfig solver;
  unsigned threads = 1;
};

/// Frank–Wolfe from a random interior point, once per Hessian drawn from Ω_m.
inline EnsembleReport vertex_local_minima_experiment(const SpectrumTemplate& tpl, Eigen::Index n,
                                                     const EnsembleOptions& opt) {
  tpl.validate();
  if (n < 2) throw invalid_argument("ensemble needs n >= 2");
  if (tpl.m != (n - 1) * (n - 1))
    throw invalid_argument("ensemble needs m = (n-1)^2 = " + std::to_string((n - 1) * (n - 1)));
  if (opt.trials < 1) throw invalid_argument("ensemble needs trials >= 1");

  struct Trial {
    bool vertex = false, converged = false;
    int face = 0, iterations = 0;
  };
  std::vector<Trial> out(static_cast<std::size_t>(opt.trials));
  parallel_for(out.size(), opt.threads, [&](std::size_t t) {
    const std::uint64_t s = derive_seed(opt.seed, t);
    const LinearSpaceHessian<double> h(sample_omega_hessian(tpl, s), n);
    auto rng = make_rng(s, 1);
    const auto X0 = random_interior_point(n, rng);
    const auto res = frank_wolfe(h, X0, opt.solver);
    out[t] = {is_vertex(res.X, opt.vertex_tol), res.converged, face_dimension(res.X, opt.vertex_tol),
              res.iterations};
  });

  EnsembleReport rep;
  rep.spectrum = tpl;
  rep.n = n;
  rep.trials = opt.trials;
  double iters = 0;
  for (const auto& t : out) {
    rep.vertex_count += t.vertex ? 1 : 0;
    rep.converged_count += t.converged ? 1 : 0;
    ++rep.face_histogram[t.face];
    iters += t.iterations;
  }
  rep.mean_iterations = iters / opt.trials;
  return rep;
}

}  // namespace ccgm
