#pragma once

// Quadratic matching energies E(X) = [X]ᵀ M [X] + aᵀ[X].
//
// Hessians are never materialized at nn₀×nn₀. Any type modelling
// QuadraticForm exposes the action X ↦ M[X] (reshaped back to n×n₀) and the
// linear term; energy, gradient and segment restriction are free functions
// over that action.

#include <algorithm>
#include <concepts>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ccgm/errors.hpp"
#include "ccgm/polytope.hpp"

namespace ccgm {

template <typename H>
concept QuadraticForm = requires(const H& h, const MatrixX<typename H::Scalar>& X) {
  typename H::Scalar;
  { h.apply(X) } -> std::convertible_to<MatrixX<typename H::Scalar>>;
  { h.linear() } -> std::convertible_to<const MatrixX<typename H::Scalar>&>;
  { h.rows() } -> std::convertible_to<Eigen::Index>;
  { h.cols() } -> std::convertible_to<Eigen::Index>;
};

/// One summand weight · (right ⊗ left) of a Kronecker-structured Hessian.
/// `left` acts on rows of X (n×n), `right` on columns (n₀×n₀).
template <typename Scalar = double>
struct KroneckerTerm {
  Scalar weight;
  MatrixX<Scalar> right;
  MatrixX<Scalar> left;
};

/// M = Σ_k s_k (B_k ⊗ A_k) with a linear part a stored as an n×n₀ matrix.
template <typename ScalarT = double>
class KroneckerHessian {
 public:
  using Scalar = ScalarT;

  KroneckerHessian(Eigen::Index n, Eigen::Index n0) : linear_(MatrixX<Scalar>::Zero(n, n0)) {}

  void add_term(Scalar weight, MatrixX<Scalar> right, MatrixX<Scalar> left) {
    if (left.rows() != rows() || left.cols() != rows())
      throw invalid_argument("kronecker term: left factor must be " + std::to_string(rows()) + "x" +
                             std::to_string(rows()));
    if (right.rows() != cols() || right.cols() != cols())
      throw invalid_argument("kronecker term: right factor must be " + std::to_string(cols()) + "x" +
                             std::to_string(cols()));
    if (!is_symmetric(left) || !is_symmetric(right))
      throw invalid_argument("kronecker term factors must be symmetric");
    terms_.push_back({weight, std::move(right), std::move(left)});
  }

  void set_linear(MatrixX<Scalar> a) {
    if (a.rows() != rows() || a.cols() != cols()) throw invalid_argument("linear term has wrong shape");
    linear_ = std::move(a);
  }

  Eigen::Index rows() const { return linear_.rows(); }
  Eigen::Index cols() const { return linear_.cols(); }
  const std::vector<KroneckerTerm<Scalar>>& terms() const { return terms_; }
  const MatrixX<Scalar>& linear() const { return linear_; }

  /// M[X] reshaped: Σ_k s_k A_k X B_k (factors are symmetric).
  template <typename Derived>
  MatrixX<Scalar> apply(const Eigen::MatrixBase<Derived>& X) const {
    MatrixX<Scalar> out = MatrixX<Scalar>::Zero(rows(), cols());
    for (const auto& t : terms_) out.noalias() += t.weight * (t.left * X * t.right);
    return out;
  }

  /// Dense nn₀×nn₀ matrix; for tests and small problems only.
  MatrixX<Scalar> dense() const {
    const Eigen::Index N = rows() * cols();
    MatrixX<Scalar> M = MatrixX<Scalar>::Zero(N, N);
    for (const auto& t : terms_) M += t.weight * kroneckerProduct(t.right, t.left);
    return M;
  }

  static MatrixX<Scalar> kroneckerProduct(const MatrixX<Scalar>& B, const MatrixX<Scalar>& A) {
    MatrixX<Scalar> K(B.rows() * A.rows(), B.cols() * A.cols());
    for (Eigen::Index i = 0; i < B.rows(); ++i)
      for (Eigen::Index j = 0; j < B.cols(); ++j)
        K.block(i * A.rows(), j * A.cols(), A.rows(), A.cols()) = B(i, j) * A;
    return K;
  }

 private:
  static bool is_symmetric(const MatrixX<Scalar>& S) {
    const Scalar scale = std::max(Scalar(1), S.cwiseAbs().maxCoeff());
    return (S - S.transpose()).cwiseAbs().maxCoeff() <= Scalar(kBasisTolerance) * scale;
  }

  std::vector<KroneckerTerm<Scalar>> terms_;
  MatrixX<Scalar> linear_;
};

/// Hessian given densely in orthonormal lin(DS) coordinates:
/// E(X) = vec(FᵀXF)ᵀ M vec(FᵀXF). Used for the random-Hessian ensemble.
template <typename ScalarT = double>
class LinearSpaceHessian {
 public:
  using Scalar = ScalarT;

  LinearSpaceHessian(MatrixX<Scalar> M, Eigen::Index n)
      : M_(std::move(M)), basis_(make_zero_sum_basis<Scalar>(n)), linear_(MatrixX<Scalar>::Zero(n, n)) {
    if (M_.rows() != (n - 1) * (n - 1) || M_.cols() != M_.rows())
      throw invalid_argument("lin-space Hessian must be (n-1)^2 square");
  }

  Eigen::Index rows() const { return linear_.rows(); }
  Eigen::Index cols() const { return linear_.cols(); }
  const MatrixX<Scalar>& linear() const { return linear_; }
  const MatrixX<Scalar>& coordinates_matrix() const { return M_; }

  template <typename Derived>
  MatrixX<Scalar> apply(const Eigen::MatrixBase<Derived>& X) const {
    const Eigen::Index k = rows() - 1;
    MatrixX<Scalar> Y = to_lin_coordinates(basis_, PolytopeKind::Permutation, X);
    MatrixX<Scalar> Z(k, k);
    Eigen::Map<VectorX<Scalar>>(Z.data(), k * k).noalias() =
        M_ * Eigen::Map<const VectorX<Scalar>>(Y.data(), k * k);
    return from_lin_coordinates(basis_, PolytopeKind::Permutation, Z);
  }

 private:
  MatrixX<Scalar> M_;
  ZeroSumBasis<Scalar> basis_;
  MatrixX<Scalar> linear_;
};

namespace detail {
template <typename DA, typename DB>
void require_square_symmetric(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B) {
  if (A.rows() != A.cols() || B.rows() != B.cols()) throw invalid_argument("affinities must be square");
  if (A.rows() == 0 || B.rows() == 0) throw invalid_argument("affinities must be nonempty");
}
}  // namespace detail

/// E₂(X) = −tr(B Xᵀ A X): the single term −(B ⊗ A).
template <typename DA, typename DB>
KroneckerHessian<typename DA::Scalar> hessian_E2(const Eigen::MatrixBase<DA>& A,
                                                 const Eigen::MatrixBase<DB>& B) {
  using Scalar = typename DA::Scalar;
  detail::require_square_symmetric(A, B);
  if (A.rows() != B.rows()) throw invalid_argument("E2 needs affinities of equal size");
  KroneckerHessian<Scalar> H(A.rows(), B.rows());
  H.add_term(Scalar(-1), B, A);
  return H;
}

/// Σ_{ijkl} X_ij X_kl (A_ik − B_jl)² = [X]ᵀ(−2B⊗A + 11ᵀ⊗A.² + B.²⊗11ᵀ)[X].
template <typename DA, typename DB>
KroneckerHessian<typename DA::Scalar> hessian_onesided(const Eigen::MatrixBase<DA>& A,
                                                       const Eigen::MatrixBase<DB>& B) {
  using Scalar = typename DA::Scalar;
  detail::require_square_symmetric(A, B);
  const Eigen::Index n = A.rows(), n0 = B.rows();
  KroneckerHessian<Scalar> H(n, n0);
  H.add_term(Scalar(-2), B, A);
  H.add_term(Scalar(1), MatrixX<Scalar>::Ones(n0, n0), A.cwiseAbs2());
  H.add_term(Scalar(1), B.cwiseAbs2(), MatrixX<Scalar>::Ones(n, n));
  return H;
}

/// E₁(X) = ‖AX − XB‖²_F.
template <typename DA, typename DB, typename DX>
typename DA::Scalar energy_E1(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B,
                              const Eigen::MatrixBase<DX>& X) {
  if (A.cols() != X.rows() || X.cols() != B.rows() || A.rows() != A.cols() || B.rows() != B.cols())
    throw invalid_argument("E1: dimension mismatch");
  return (A * X - X * B).squaredNorm();
}

template <QuadraticForm H>
void require_shape(const H& h, Eigen::Index rows, Eigen::Index cols) {
  if (rows != h.rows() || cols != h.cols())
    throw invalid_argument("state is " + std::to_string(rows) + "x" + std::to_string(cols) +
                           ", Hessian expects " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()));
}

template <QuadraticForm H, typename Derived>
typename H::Scalar energy(const H& h, const Eigen::MatrixBase<Derived>& X) {
  require_shape(h, X.rows(), X.cols());
  const MatrixX<typename H::Scalar> MX = h.apply(X);
  return X.cwiseProduct(MX).sum() + h.linear().cwiseProduct(X).sum();
}

/// ∇E(X) = 2 M[X] + a.
template <QuadraticForm H, typename Derived>
MatrixX<typename H::Scalar> gradient(const H& h, const Eigen::MatrixBase<Derived>& X) {
  require_shape(h, X.rows(), X.cols());
  MatrixX<typename H::Scalar> g = h.apply(X);
  g *= typename H::Scalar(2);
  g += h.linear();
  return g;
}

/// q(t) = c0 + c1 t + c2 t² = E((1−t)X₀ + tX₁).
template <typename Scalar = double>
struct SegmentQuadratic {
  Scalar c0 = 0, c1 = 0, c2 = 0;

  Scalar operator()(Scalar t) const { return c0 + t * (c1 + t * c2); }
};

template <QuadraticForm H, typename D0, typename D1>
SegmentQuadratic<typename H::Scalar> segment_quadratic(const H& h, const Eigen::MatrixBase<D0>& X0,
                                                       const Eigen::MatrixBase<D1>& X1) {
  using Scalar = typename H::Scalar;
  require_shape(h, X0.rows(), X0.cols());
  require_shape(h, X1.rows(), X1.cols());
  const MatrixX<Scalar> delta = X1 - X0;
  const MatrixX<Scalar> M0 = h.apply(X0);
  const MatrixX<Scalar> Md = h.apply(delta);
  SegmentQuadratic<Scalar> q;
  q.c0 = X0.cwiseProduct(M0).sum() + h.linear().cwiseProduct(X0).sum();
  q.c1 = Scalar(2) * M0.cwiseProduct(delta).sum() + h.linear().cwiseProduct(delta).sum();
  q.c2 = delta.cwiseProduct(Md).sum();
  return q;
}

inline constexpr Eigen::Index kDenseRestrictionLimit = 64;

namespace detail {
template <typename Scalar>
VectorX<Scalar> symmetric_eigenvalues(const MatrixX<Scalar>& S) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numerical_error("symmetric eigensolver failed");
  return es.eigenvalues();
}
}  // namespace detail

/// Eigenvalues (ascending) of M restricted to the lin space of the polytope.
///
/// Single-term Hessians use the product rule for Kronecker spectra; otherwise
/// the (n−1)²- or n(n₀−1)-dimensional restriction is formed densely, which is
/// only allowed up to `dense_limit` vertices per side.
template <typename Scalar>
VectorX<Scalar> restricted_spectrum(const KroneckerHessian<Scalar>& h, const PolytopeDescriptor& desc,
                                    Eigen::Index dense_limit = kDenseRestrictionLimit) {
  desc.validate();
  if (desc.n != h.rows() || desc.n0 != h.cols()) throw invalid_argument("descriptor does not match Hessian");
  const auto Fn = make_zero_sum_basis<Scalar>(desc.n0).columns;
  const bool perm = desc.kind == PolytopeKind::Permutation;
  const auto Fl = perm ? make_zero_sum_basis<Scalar>(desc.n).columns : MatrixX<Scalar>();
  auto restrict_left = [&](const MatrixX<Scalar>& A) -> MatrixX<Scalar> {
    return perm ? MatrixX<Scalar>(Fl.transpose() * A * Fl) : A;
  };
  auto restrict_right = [&](const MatrixX<Scalar>& B) -> MatrixX<Scalar> { return Fn.transpose() * B * Fn; };

  const Eigen::Index dim = desc.lin_dimension();
  if (h.terms().empty()) return VectorX<Scalar>::Zero(dim);

  if (h.terms().size() == 1) {
    const auto& t = h.terms().front();
    const VectorX<Scalar> la = detail::symmetric_eigenvalues<Scalar>(restrict_left(t.left));
    const VectorX<Scalar> mb = detail::symmetric_eigenvalues<Scalar>(restrict_right(t.right));
    VectorX<Scalar> out(la.size() * mb.size());
    for (Eigen::Index j = 0; j < mb.size(); ++j)
      for (Eigen::Index i = 0; i < la.size(); ++i) out(j * la.size() + i) = t.weight * la(i) * mb(j);
    std::sort(out.data(), out.data() + out.size());
    return out;
  }

  if (std::max(desc.n, desc.n0) > dense_limit)
    throw SizeLimitError("restricted spectrum of a multi-term Hessian is limited to " +
                         std::to_string(dense_limit) + " vertices; use Monte-Carlo estimation");
  MatrixX<Scalar> R = MatrixX<Scalar>::Zero(dim, dim);
  for (const auto& t : h.terms())
    R += t.weight * KroneckerHessian<Scalar>::kroneckerProduct(restrict_right(t.right), restrict_left(t.left));
  return detail::symmetric_eigenvalues<Scalar>(R);
}

/// Moves the within-row blocks of M into the linear term.
///
/// For a one-sided vertex (one 1 per row) the quadratic contribution of the
/// row-diagonal blocks Σ s_k B_k ⊗ diag(A_k) collapses to Σ_ij X_ij Σ s_k
/// A_k(i,i) B_k(j,j), so the returned Hessian agrees with `h` on every vertex.
/// It has no self-row interaction, hence is affine in each row separately.
template <typename Scalar>
KroneckerHessian<Scalar> decouple_rows(const KroneckerHessian<Scalar>& h) {
  KroneckerHessian<Scalar> out(h.rows(), h.cols());
  MatrixX<Scalar> a = h.linear();
  for (const auto& t : h.terms()) {
    MatrixX<Scalar> off = t.left;
    off.diagonal().setZero();
    a += t.weight * t.left.diagonal() * t.right.diagonal().transpose();
    out.add_term(t.weight, t.right, std::move(off));
  }
  out.set_linear(std::move(a));
  return out;
}

}  // namespace ccgm
