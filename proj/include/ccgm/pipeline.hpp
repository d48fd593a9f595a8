#pragma once

// Corpus-level workflows: all-pairs matching dissimilarities and a classical
// MDS embedding of the resulting dissimilarity matrix.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccgm/polytope.hpp"
#include "ccgm/solver.hpp"

namespace ccgm {

/// Σ_{i,k} (A_ik − B_{σ(i)σ(k)})² for the permutation σ encoded by X.
double pair_dissimilarity(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const MatchingState<double>& X);
double pair_dissimilarity(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::vector<int>& sigma);

struct CorpusItem {
  std::string label;
  Eigen::MatrixXd affinity;
};

struct DissimilaritySettings {
  PolytopeKind kind = PolytopeKind::Permutation;
  int anchors = 3;
  int restarts = 10;
  SolverConfig solver;
  unsigned threads = 1;
};

struct PairFailure {
  std::string first, second;
  std::string message;
};

/// Symmetric, zero diagonal; entries of failed pairs are NaN.
struct DissimilarityMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;
  std::vector<PairFailure> failures;
};

/// Matches every unordered pair and records the dissimilarity of the best
/// match. Each pair is solved in label order with a seed derived from the two
/// labels, so the result does not depend on corpus order.
///
/// Permutation mode minimizes E₂ and rounds the limit to a permutation;
/// one-sided mode runs the concave search in both directions and averages.
DissimilarityMatrix all_pairs_dissimilarity(const std::vector<CorpusItem>& corpus,
                                            const DissimilaritySettings& settings);

/// Torgerson MDS: top-k eigenpairs of −½ J D.² J, scaled by √λ; axes with
/// nonpositive eigenvalue are zero. Each axis is signed so its first nonzero
/// coordinate is positive.
Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& D, Eigen::Index k);

/// min over orthogonal R and translation of ‖(P − p̄)R − (Q − q̄)‖_F, with the
/// narrower configuration zero-padded.
double procrustes_residual(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q);

/// Stable 64-bit FNV-1a, used for label-derived seeds.
std::uint64_t stable_hash(const std::string& s);

}  // namespace ccgm
