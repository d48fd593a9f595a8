#pragma once

// Conditional-concavity certificates and probabilistic concavity bounds.
//
// For a symmetric M with eigenvalues λᵢ and a Haar-random d-dimensional
// subspace D, P(M|_D ⪰ 0) ≤ Π(1 − 2tλᵢ)^{−d/2} for t ∈ (0, 1/(2λ_max)).
// chernoff_bound minimizes the right-hand side; the Monte-Carlo estimators
// measure the left-hand side.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ccgm/energy.hpp"
#include "ccgm/errors.hpp"
#include "ccgm/parallel.hpp"
#include "ccgm/polytope.hpp"
#include "ccgm/random.hpp"

namespace ccgm {

struct ConcavityCertificate {
  bool concave = false;
  double margin = 0;           // −max restricted eigenvalue
  double max_eigenvalue = 0;
  double min_eigenvalue = 0;
  Eigen::Index positive_count = 0;  // eigenvalues ≥ −tol
  Eigen::Index dimension = 0;
};

/// Concave iff the largest restricted eigenvalue is below −1e-10·‖spectrum‖∞.
template <typename Scalar>
ConcavityCertificate certify_from_spectrum(const VectorX<Scalar>& spectrum) {
  ConcavityCertificate c;
  c.dimension = spectrum.size();
  if (spectrum.size() == 0) return c;
  const double scale = static_cast<double>(spectrum.cwiseAbs().maxCoeff());
  const double tol = 1e-10 * scale;
  c.max_eigenvalue = static_cast<double>(spectrum.maxCoeff());
  c.min_eigenvalue = static_cast<double>(spectrum.minCoeff());
  c.margin = c.max_eigenvalue == 0 ? 0.0 : -c.max_eigenvalue;
  c.concave = scale > 0 && c.max_eigenvalue < -tol;
  c.positive_count = (spectrum.array().template cast<double>() >= -tol).count();
  return c;
}

template <typename Scalar>
ConcavityCertificate certify_conditional_concavity(const KroneckerHessian<Scalar>& h,
                                                   const PolytopeDescriptor& desc,
                                                   Eigen::Index dense_limit = kDenseRestrictionLimit) {
  return certify_from_spectrum<Scalar>(restricted_spectrum(h, desc, dense_limit));
}

struct ChernoffBound {
  double bound = 1;       // in [0, 1]
  double log_bound = 0;   // natural log of the unclamped bound, −inf when 0
  double t = 0;           // minimizer; +inf when every eigenvalue is ≤ 0
};

/// Minimizes Π(1 − 2tλᵢ)^{−d/2} over t ∈ (0, 1/(2λ_max)).
///
/// The stationarity equation Σ λᵢ/(1 − 2tλᵢ) = 0 does not involve d, so t* is
/// shared by every d and bound(d) = bound(1)^d.
template <typename Derived>
ChernoffBound chernoff_bound(const Eigen::MatrixBase<Derived>& eigenvalues, int d) {
  if (eigenvalues.size() == 0) throw invalid_argument("chernoff bound needs at least one eigenvalue");
  if (d < 1) throw invalid_argument("chernoff bound needs d >= 1");
  std::vector<double> lam;
  lam.reserve(static_cast<std::size_t>(eigenvalues.size()));
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double v = static_cast<double>(eigenvalues(i));
    if (!std::isfinite(v)) throw invalid_argument("chernoff bound: non-finite eigenvalue");
    if (v != 0.0) lam.push_back(v);
  }
  ChernoffBound out;
  if (lam.empty()) return out;
  const double lmax = *std::max_element(lam.begin(), lam.end());
  if (lmax <= 0) {
    out.bound = 0;
    out.log_bound = -std::numeric_limits<double>::infinity();
    out.t = std::numeric_limits<double>::infinity();
    return out;
  }

  auto slope = [&](double t) {
    double s = 0;
    for (double l : lam) s += l / (1 - 2 * t * l);
    return s;
  };
  auto curvature = [&](double t) {
    double s = 0;
    for (double l : lam) {
      const double q = 1 - 2 * t * l;
      s += 2 * l * l / (q * q);
    }
    return s;
  };
  auto log_objective = [&](double t) {
    double s = 0;
    for (double l : lam) s += std::log1p(-2 * t * l);
    return -0.5 * s;
  };

  // f is convex; f'(0) = Σλ ≥ 0 means the infimum sits at t → 0 (bound 1).
  if (slope(0) >= 0) return out;

  double lo = 0, hi = (1 - 1e-12) / (2 * lmax);
  double t = hi;
  if (slope(hi) <= 0) {
    t = hi;
  } else {
    t = 0.5 * hi;
    for (int it = 0; it < 300; ++it) {
      const double s = slope(t);
      if (s > 0)
        hi = t;
      else
        lo = t;
      double next = t - s / curvature(t);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const bool done = std::abs(next - t) <= 1e-14 * t || hi - lo <= 1e-14 * hi;
      t = next;
      if (done) break;
    }
  }
  out.t = t;
  out.log_bound = d * log_objective(t);
  out.bound = std::clamp(std::exp(out.log_bound), 0.0, 1.0);
  return out;
}

enum class SpectrumMode { Fixed, Sampled };

/// Eigenvalue profile Λ_{m,p}: ⌈pm⌉ eigenvalues in [0, a], the rest ≤ −b.
struct SpectrumTemplate {
  Eigen::Index m = 1;
  double p = 0;
  double pos_bound = 1;  // a
  double neg_bound = 1;  // b
  SpectrumMode mode = SpectrumMode::Fixed;

  void validate() const {
    if (m < 1) throw invalid_argument("spectrum template needs m >= 1");
    if (!(p >= 0 && p < 0.5)) throw invalid_argument("spectrum template needs p in [0, 1/2)");
    if (!(pos_bound > 0) || !(neg_bound > 0)) throw invalid_argument("spectrum template needs a, b > 0");
  }

  Eigen::Index positive_count() const {
    return static_cast<Eigen::Index>(std::ceil(p * static_cast<double>(m) - 1e-9));
  }

  /// Fixed mode: +a and −b. Sampled mode: μ ~ U[0,a], λ ~ U[−b−1, −b].
  Eigen::VectorXd eigenvalues(Rng& rng) const {
    validate();
    const Eigen::Index pos = positive_count();
    Eigen::VectorXd out(m);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i < pos)
        out(i) = mode == SpectrumMode::Fixed ? pos_bound : pos_bound * unit(rng);
      else
        out(i) = mode == SpectrumMode::Fixed ? -neg_bound : -neg_bound - unit(rng);
    }
    return out;
  }

  Eigen::VectorXd eigenvalues() const {
    if (mode != SpectrumMode::Fixed) throw invalid_argument("sampled spectrum template needs an rng");
    Rng unused;
    return eigenvalues(unused);
  }
};

/// Closed-form minimum of (1+2bt)^{−(1−p)m/2}(1−2at)^{−pm/2}:
/// ((a^{1−p} b^p / ((a+b)/2)) · ½(1−p)^{p−1} p^{−p})^{m/2}.
inline double closed_form_log_bound(const SpectrumTemplate& tpl) {
  tpl.validate();
  if (tpl.mode != SpectrumMode::Fixed) throw invalid_argument("closed-form bound needs a fixed template");
  if (tpl.p <= 0) throw invalid_argument("closed-form bound needs p > 0");
  const double a = tpl.pos_bound, b = tpl.neg_bound, p = tpl.p;
  if (a > b) throw invalid_argument("closed-form bound needs a <= b");
  const double base = (1 - p) * std::log(a) + p * std::log(b) - std::log(0.5 * (a + b)) + std::log(0.5) +
                      (p - 1) * std::log(1 - p) - p * std::log(p);
  return 0.5 * static_cast<double>(tpl.m) * base;
}

inline double closed_form_bound(const SpectrumTemplate& tpl) { return std::exp(closed_form_log_bound(tpl)); }

struct BoundReport {
  double chernoff_value = 1;
  double log_chernoff = 0;
  double optimal_t = 0;
  int subspace_dim = 1;
  double mc_estimate = 0;
  std::uint64_t mc_samples = 0;
  std::uint64_t mc_hits = 0;

  /// ε̂ = bound^{1/d}: the smallest ε certified by the bound.
  double epsilon_hat() const { return std::exp(log_chernoff / subspace_dim); }

  /// Bound validity with binomial slack.
  bool consistent(double sigmas = 3) const {
    if (mc_samples == 0) return true;
    const double se = std::sqrt(mc_estimate / static_cast<double>(mc_samples));
    return chernoff_value >= mc_estimate - sigmas * se;
  }
};

inline constexpr double kPsdTolerance = 1e-12;

namespace detail {

inline std::uint64_t count_hits_parallel(std::uint64_t samples, std::uint64_t seed, unsigned threads,
                                         const auto& trial) {
  // Fixed-size chunks with their own streams: counts do not depend on threads.
  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> hits(chunks, 0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    auto rng = make_rng(seed, c + 1);
    const std::uint64_t begin = c * kChunk, end = std::min(samples, begin + kChunk);
    std::uint64_t h = 0;
    for (std::uint64_t s = begin; s < end; ++s) h += trial(rng) ? 1 : 0;
    hits[c] = h;
  });
  return std::accumulate(hits.begin(), hits.end(), std::uint64_t{0});
}

inline bool restriction_is_psd(const Eigen::MatrixXd& R) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -kPsdTolerance;
}

inline BoundReport finish_report(const std::optional<Eigen::VectorXd>& spectrum, int d, std::uint64_t samples,
                                 std::uint64_t hits) {
  BoundReport r;
  r.subspace_dim = d;
  r.mc_samples = samples;
  r.mc_hits = hits;
  r.mc_estimate = samples ? static_cast<double>(hits) / static_cast<double>(samples) : 0.0;
  if (spectrum) {
    const auto cb = chernoff_bound(*spectrum, d);
    r.chernoff_value = cb.bound;
    r.log_chernoff = cb.log_bound;
    r.optimal_t = cb.t;
  } else {
    r.chernoff_value = std::numeric_limits<double>::quiet_NaN();
    r.log_chernoff = std::numeric_limits<double>::quiet_NaN();
    r.optimal_t = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace detail

struct MonteCarloOptions {
  int d = 1;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// P(M|_D ⪰ 0) for a dense symmetric M with D Haar-random in the ambient space.
template <typename Derived>
BoundReport mc_convexity_probability(const Eigen::MatrixBase<Derived>& M, const MonteCarloOptions& opt) {
  if (M.rows() != M.cols() || M.rows() == 0) throw invalid_argument("monte-carlo needs a square matrix");
  if (opt.samples < 1) throw invalid_argument("monte-carlo needs samples >= 1");
  if (opt.d < 1 || opt.d > M.rows()) throw invalid_argument("subspace dimension out of range");
  const Eigen::MatrixXd S = M.template cast<double>();
  const Eigen::Index m = S.rows();
  const int d = opt.d;
  auto trial = [&](Rng& rng) {
    if (d == 1) {
      const Eigen::VectorXd v = gaussian_matrix(m, 1, rng);
      return v.dot(S * v) >= 0;
    }
    const Eigen::MatrixXd G = gaussian_matrix(m, d, rng);
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ() *
                              Eigen::MatrixXd::Identity(m, d);
    return detail::restriction_is_psd(Q.transpose() * S * Q);
  };
  const auto hits = detail::count_hits_parallel(opt.samples, opt.seed, opt.threads, trial);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return detail::finish_report(es.eigenvalues(), d, opt.samples, hits);
}

/// Same probability computed from the spectrum alone.
///
/// A Haar-random direction in the eigenbasis is a normalized Gaussian vector,
/// so vᵀMv ≥ 0 iff Σ_{λ>0} λg² ≥ Σ_{λ<0} |λ|g². Each side is split into
/// buckets of neighbouring eigenvalues. A bucket's Σg² is drawn first as a χ²
/// total, which brackets its contribution between min·total and max·total;
/// directions inside the buckets are drawn only when the brackets overlap.
/// Totals and directions are independent, so the event has exactly the law of
/// the direct estimator, at a fraction of the cost for large spectra.
template <typename Derived>
BoundReport mc_convexity_probability_spectral(const Eigen::MatrixBase<Derived>& spectrum,
                                              const MonteCarloOptions& opt) {
  if (spectrum.size() == 0) throw invalid_argument("monte-carlo needs a nonempty spectrum");
  if (opt.samples < 1) throw invalid_argument("monte-carlo needs samples >= 1");
  if (opt.d < 1 || opt.d > spectrum.size()) throw invalid_argument("subspace dimension out of range");
  const Eigen::VectorXd lam = spectrum.template cast<double>();
  const int d = opt.d;

  struct Bucket {
    std::vector<double> values;  // |λ|, descending
    std::gamma_distribution<double>::param_type total;  // χ² with |values| degrees of freedom
  };
  auto make_buckets = [](std::vector<double> v) {
    constexpr std::size_t kBuckets = 32;
    std::sort(v.begin(), v.end(), std::greater<>());
    std::vector<Bucket> out;
    const std::size_t size = std::max<std::size_t>(1, (v.size() + kBuckets - 1) / kBuckets);
    for (std::size_t b = 0; b < v.size(); b += size) {
      std::vector<double> part(v.begin() + static_cast<std::ptrdiff_t>(b),
                               v.begin() + static_cast<std::ptrdiff_t>(std::min(v.size(), b + size)));
      const double dof = static_cast<double>(part.size());
      out.push_back({std::move(part), std::gamma_distribution<double>::param_type(0.5 * dof, 2.0)});
    }
    return out;
  };
  std::vector<double> pos_values, neg_values;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > 0) pos_values.push_back(lam(i));
    if (lam(i) < 0) neg_values.push_back(-lam(i));
  }
  const std::vector<Bucket> pos = make_buckets(pos_values), neg = make_buckets(neg_values);

  auto trial = [&](Rng& rng) {
    if (d > 1) {
      const Eigen::Index m = lam.size();
      const Eigen::MatrixXd G = gaussian_matrix(m, d, rng);
      const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ() *
                                Eigen::MatrixXd::Identity(m, d);
      return detail::restriction_is_psd(Q.transpose() * lam.asDiagonal() * Q);
    }
    if (pos.empty()) return neg.empty();
    std::gamma_distribution<double> chi2;
    std::vector<double> pos_total(pos.size()), neg_total(neg.size());
    double pos_lo = 0, pos_hi = 0, neg_lo = 0, neg_hi = 0;
    for (std::size_t b = 0; b < pos.size(); ++b) {
      pos_total[b] = chi2(rng, pos[b].total);
      pos_lo += pos[b].values.back() * pos_total[b];
      pos_hi += pos[b].values.front() * pos_total[b];
    }
    for (std::size_t b = 0; b < neg.size(); ++b) {
      neg_total[b] = chi2(rng, neg[b].total);
      neg_lo += neg[b].values.back() * neg_total[b];
      neg_hi += neg[b].values.front() * neg_total[b];
    }
    if (pos_hi < neg_lo) return false;
    if (pos_lo >= neg_hi) return true;
    std::normal_distribution<double> normal(0.0, 1.0);
    auto expand = [&](const std::vector<Bucket>& buckets, const std::vector<double>& totals) {
      double sum = 0;
      for (std::size_t b = 0; b < buckets.size(); ++b) {
        const auto& v = buckets[b].values;
        if (v.front() == v.back()) {
          sum += v.front() * totals[b];
          continue;
        }
        double weighted = 0, norm2 = 0;
        for (double l : v) {
          const double g = normal(rng);
          weighted += l * g * g;
          norm2 += g * g;
        }
        sum += totals[b] * weighted / norm2;
      }
      return sum;
    };
    return expand(pos, pos_total) >= expand(neg, neg_total);
  };
  const auto hits = detail::count_hits_parallel(opt.samples, opt.seed, opt.threads, trial);
  return detail::finish_report(lam, d, opt.samples, hits);
}

enum class SamplingMethod { Direct, Spectral };

/// P(M|_D ⪰ 0) for D Haar-random inside the polytope's lin space.
///
/// Direct draws directions with random_direction_in_lin and applies the
/// Kronecker action. Spectral uses the restricted spectrum (rotation
/// invariance makes the two laws identical). The Chernoff value is reported
/// whenever the restricted spectrum is computable.
template <typename Scalar>
BoundReport mc_convexity_probability(const KroneckerHessian<Scalar>& h, const PolytopeDescriptor& desc,
                                     const MonteCarloOptions& opt,
                                     SamplingMethod method = SamplingMethod::Spectral,
                                     Eigen::Index dense_limit = kDenseRestrictionLimit) {
  desc.validate();
  std::optional<Eigen::VectorXd> spectrum;
  try {
    spectrum = restricted_spectrum(h, desc, dense_limit).template cast<double>();
  } catch (const SizeLimitError&) {
    if (method == SamplingMethod::Spectral) throw;
  }
  if (method == SamplingMethod::Spectral) return mc_convexity_probability_spectral(*spectrum, opt);

  if (opt.samples < 1) throw invalid_argument("monte-carlo needs samples >= 1");
  if (opt.d < 1 || opt.d > desc.lin_dimension()) throw invalid_argument("subspace dimension out of range");
  const int d = opt.d;
  const auto basis = make_zero_sum_basis<Scalar>(desc.n0);
  auto trial = [&](Rng& rng) {
    if (d == 1) {
      const MatrixX<Scalar> V = random_direction_in_lin<Scalar>(desc, rng);
      return V.cwiseProduct(h.apply(V)).sum() >= Scalar(0);
    }
    // Orthonormalize d Gaussian lin-space directions, then test the d×d restriction.
    std::vector<MatrixX<Scalar>> dirs;
    for (int k = 0; k < d; ++k) {
      MatrixX<Scalar> V = random_direction_in_lin<Scalar>(desc, rng);
      for (const auto& U : dirs) V -= U.cwiseProduct(V).sum() * U;
      V /= V.norm();
      dirs.push_back(std::move(V));
    }
    Eigen::MatrixXd R(d, d);
    for (int a = 0; a < d; ++a) {
      const MatrixX<Scalar> MV = h.apply(dirs[static_cast<std::size_t>(a)]);
      for (int b = 0; b < d; ++b) R(b, a) = static_cast<double>(dirs[static_cast<std::size_t>(b)].cwiseProduct(MV).sum());
    }
    return detail::restriction_is_psd(0.5 * (R + R.transpose()));
  };
  const auto hits = detail::count_hits_parallel(opt.samples, opt.seed, opt.threads, trial);
  return detail::finish_report(spectrum, d, opt.samples, hits);
}

inline constexpr Eigen::Index kOmegaDenseLimit = 5000;

/// Haar-distributed orthogonal matrix: Q from the QR of a Gaussian matrix with
/// columns sign-corrected by diag(R).
inline Eigen::MatrixXd haar_orthogonal(Eigen::Index m, Rng& rng) {
  const Eigen::MatrixXd G = gaussian_matrix(m, m, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd& R = qr.matrixQR();
  for (Eigen::Index j = 0; j < m; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

/// U Λ_{m,p} Uᵀ with U Haar on O(m).
inline Eigen::MatrixXd sample_omega_hessian(const SpectrumTemplate& tpl, std::uint64_t seed,
                                            Eigen::Index dense_limit = kOmegaDenseLimit) {
  tpl.validate();
  if (tpl.m > dense_limit)
    throw SizeLimitError("omega ensemble is limited to m <= " + std::to_string(dense_limit));
  auto rng = make_rng(seed);
  const Eigen::VectorXd lam = tpl.eigenvalues(rng);
  const Eigen::MatrixXd U = haar_orthogonal(tpl.m, rng);
  Eigen::MatrixXd M = U * lam.asDiagonal() * U.transpose();
  return 0.5 * (M + M.transpose());
}

}  // namespace ccgm
