#include "ccgm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ccgm/energy.hpp"
#include "ccgm/errors.hpp"
#include "ccgm/parallel.hpp"

namespace ccgm {

double pair_dissimilarity(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::vector<int>& sigma) {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != B.cols() || B.rows() != n || static_cast<Eigen::Index>(sigma.size()) != n)
    throw invalid_argument("pair dissimilarity: dimension mismatch");
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (int s : sigma) {
    if (s < 0 || s >= n || used[static_cast<std::size_t>(s)]) throw invalid_argument("pair dissimilarity needs a permutation");
    used[static_cast<std::size_t>(s)] = 1;
  }
  double total = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double r = A(i, k) - B(sigma[static_cast<std::size_t>(i)], sigma[static_cast<std::size_t>(k)]);
      total += r * r;
    }
  return total;
}

double pair_dissimilarity(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const MatchingState<double>& X) {
  if (X.kind != PolytopeKind::Permutation || !is_vertex(X)) throw invalid_argument("pair dissimilarity needs a permutation");
  return pair_dissimilarity(A, B, assignment_of(X));
}

std::uint64_t stable_hash(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

double match_permutation(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const DissimilaritySettings& s,
                         std::uint64_t seed) {
  if (A.rows() != B.rows())
    throw invalid_argument("permutation matching needs equal sizes (" + std::to_string(A.rows()) + " vs " +
                           std::to_string(B.rows()) + ")");
  auto config = s.solver;
  config.seed = seed;
  const auto h = hessian_E2(A, B);
  const auto best = multi_start(h, PolytopeKind::Permutation, s.anchors, s.restarts, config);
  // Round a non-vertex limit to the nearest permutation.
  const auto sigma = best.best.is_vertex ? assignment_of(best.best.X) : lap_oracle(-best.best.X.entries).cols;
  return pair_dissimilarity(A, B, sigma);
}

double match_one_sided(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const DissimilaritySettings& s,
                       std::uint64_t seed) {
  auto config = s.solver;
  config.seed = seed;
  const int anchors = static_cast<int>(std::min<Eigen::Index>(s.anchors, std::min(A.rows(), B.rows())));
  const auto best = multi_start(hessian_onesided(A, B), PolytopeKind::OneSided, anchors, s.restarts, config);
  return best.best.energy;
}

}  // namespace

DissimilarityMatrix all_pairs_dissimilarity(const std::vector<CorpusItem>& corpus,
                                            const DissimilaritySettings& settings) {
  const auto N = static_cast<Eigen::Index>(corpus.size());
  if (N < 2) throw invalid_argument("dissimilarity needs at least 2 corpus items");
  std::set<std::string> unique;
  for (const auto& item : corpus)
    if (!unique.insert(item.label).second) throw invalid_argument("duplicate corpus label '" + item.label + "'");

  struct Pair {
    Eigen::Index i, j;
  };
  std::vector<Pair> pairs;
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = i + 1; j < N; ++j) pairs.push_back({i, j});

  std::vector<double> values(pairs.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errors(pairs.size());
  parallel_for(pairs.size(), settings.threads, [&](std::size_t p) {
    auto [i, j] = pairs[p];
    if (corpus[static_cast<std::size_t>(j)].label < corpus[static_cast<std::size_t>(i)].label) std::swap(i, j);
    const auto& a = corpus[static_cast<std::size_t>(i)];
    const auto& b = corpus[static_cast<std::size_t>(j)];
    const std::uint64_t seed = derive_seed(settings.solver.seed, stable_hash(a.label + '\x1f' + b.label));
    try {
      if (settings.kind == PolytopeKind::Permutation) {
        values[p] = match_permutation(a.affinity, b.affinity, settings, seed);
      } else {
        values[p] = 0.5 * (match_one_sided(a.affinity, b.affinity, settings, seed) +
                           match_one_sided(b.affinity, a.affinity, settings, seed));
      }
    } catch (const std::exception& e) {
      errors[p] = e.what();
    }
  });

  DissimilarityMatrix out;
  for (const auto& item : corpus) out.labels.push_back(item.label);
  out.values = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    out.values(i, j) = out.values(j, i) = values[p];
    if (!errors[p].empty())
      out.failures.push_back({corpus[static_cast<std::size_t>(i)].label, corpus[static_cast<std::size_t>(j)].label, errors[p]});
  }
  return out;
}

Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& D, Eigen::Index k) {
  const auto N = D.rows();
  if (D.cols() != N || N < 1) throw invalid_argument("mds needs a square dissimilarity matrix");
  if (!D.allFinite()) throw invalid_argument("mds needs a complete dissimilarity matrix (no missing entries)");
  if (k < 1 || k > std::max<Eigen::Index>(N - 1, 1)) throw invalid_argument("mds target dimension must be in [1, N-1]");
  const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(N, N) - Eigen::MatrixXd::Constant(N, N, 1.0 / N);
  Eigen::MatrixXd G = -0.5 * J * D.cwiseAbs2() * J;
  G = (0.5 * (G + G.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  if (es.info() != Eigen::Success) throw numerical_error("mds eigensolver failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * std::max(1.0, scale);
  if (scale > tol && lam.maxCoeff() <= tol)
    throw numerical_error("mds: no positive eigenvalue, embedding is degenerate");

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(N, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const Eigen::Index idx = N - 1 - a;  // eigenvalues ascending
    if (idx < 0 || lam(idx) <= tol) continue;
    Eigen::VectorXd axis = es.eigenvectors().col(idx) * std::sqrt(lam(idx));
    for (Eigen::Index i = 0; i < N; ++i) {
      if (std::abs(axis(i)) > 1e-12) {
        if (axis(i) < 0) axis = -axis;
        break;
      }
    }
    X.col(a) = axis;
  }
  return X;
}

double procrustes_residual(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q) {
  if (P.rows() != Q.rows()) throw invalid_argument("procrustes needs the same number of points");
  const Eigen::Index dim = std::max(P.cols(), Q.cols());
  Eigen::MatrixXd Pc = Eigen::MatrixXd::Zero(P.rows(), dim), Qc = Eigen::MatrixXd::Zero(Q.rows(), dim);
  Pc.leftCols(P.cols()) = P.rowwise() - P.colwise().mean();
  Qc.leftCols(Q.cols()) = Q.rowwise() - Q.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Pc.transpose() * Qc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd R = svd.matrixU() * svd.matrixV().transpose();
  return (Pc * R - Qc).norm();
}

}  // namespace ccgm
