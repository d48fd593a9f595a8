#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccgm/affinity.hpp"
#include "ccgm/concavity.hpp"
#include "ccgm/ensemble.hpp"
#include "oracles.hpp"

using namespace ccgm;

TEST_CASE("chernoff bound on the analytic case") {
  const Eigen::Vector3d lam(1, -1, -1);
  const auto cb = chernoff_bound(lam, 1);
  CHECK(cb.t == doctest::Approx(1.0 / 6).epsilon(1e-9));
  // (2/3)^{-1/2} (4/3)^{-1}
  CHECK(cb.bound == doctest::Approx(std::sqrt(1.5) * 0.75).epsilon(1e-12));
  CHECK(cb.bound == doctest::Approx(0.918559).epsilon(1e-6));
}

TEST_CASE("chernoff bound edge cases") {
  const auto neg = chernoff_bound(Eigen::Vector3d(-1, -2, -0.5), 2);
  CHECK(neg.bound == 0);
  CHECK(std::isinf(neg.log_bound));
  CHECK(chernoff_bound(Eigen::Vector3d(0, 0, 0), 1).bound == 1);
  CHECK(chernoff_bound(Eigen::Vector2d(1, -1), 1).bound == 1);  // Σλ ≥ 0
  CHECK(chernoff_bound(Eigen::Vector2d(2, -1), 1).bound == 1);
  CHECK(chernoff_bound(Eigen::Vector3d(0, -1, 0), 1).bound == 0);
  CHECK_THROWS_AS(chernoff_bound(Eigen::VectorXd(0), 1), Error);
  CHECK_THROWS_AS(chernoff_bound(Eigen::Vector2d(1, -3), 0), Error);
  CHECK_THROWS_AS(chernoff_bound(Eigen::Vector2d(NAN, -3), 1), Error);

  // Brute-force grid minimum never beats the solver.
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd lam(12);
    for (auto& v : lam) v = g(rng) - 0.8;
    const auto cb = chernoff_bound(lam, 1);
    const double hi = 1 / (2 * std::max(lam.maxCoeff(), 1e-300));
    double best = 0;
    for (int k = 1; k < 4000; ++k) {
      const double t = hi * k / 4000.0;
      double s = 0;
      for (double l : lam) s += std::log1p(-2 * t * l);
      best = std::min(best, -0.5 * s);
    }
    CHECK(cb.log_bound <= best + 1e-9);
  }
}

TEST_CASE("power law in d") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd M = oracle::random_symmetric(30, rng) - 1.5 * Eigen::MatrixXd::Identity(30, 30);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const auto b1 = chernoff_bound(es.eigenvalues(), 1);
    for (int d : {2, 3, 5}) {
      const auto bd = chernoff_bound(es.eigenvalues(), d);
      CHECK(bd.t == b1.t);
      CHECK(oracle::rel_err(bd.log_bound, d * b1.log_bound) < 1e-12);
      if (b1.bound > 1e-200) CHECK(oracle::rel_err(bd.bound, std::pow(b1.bound, d)) < 1e-9);
    }
  }
}

TEST_CASE("closed form matches chernoff on fixed templates") {
  for (auto [m, p, a, b] : {std::tuple{100, 0.3, 1.0, 1.0}, std::tuple{100, 0.3, 1.0, 2.0},
                            std::tuple{40, 0.25, 0.5, 3.0}, std::tuple{1000, 0.49, 1.0, 1.0},
                            std::tuple{100, 0.01, 1.0, 1.0}, std::tuple{1000, 0.001, 2.0, 2.0}}) {
    const SpectrumTemplate tpl{m, p, a, b, SpectrumMode::Fixed};
    const auto cb = chernoff_bound(tpl.eigenvalues(), 1);
    CHECK(oracle::rel_err(closed_form_log_bound(tpl), cb.log_bound) < 1e-9);
    CHECK(tpl.eigenvalues().maxCoeff() == a);
    CHECK((tpl.eigenvalues().array() > 0).count() == tpl.positive_count());
  }
  const SpectrumTemplate big{90000, 0.49, 1, 1, SpectrumMode::Fixed};
  const double v = closed_form_bound(big);
  CHECK(v >= 1e-5);
  CHECK(v <= 2e-4);
  CHECK(v == doctest::Approx(1.2334e-4).epsilon(1e-3));

  CHECK_THROWS_AS(closed_form_bound(SpectrumTemplate{2, 0.5, 1, 1, SpectrumMode::Fixed}), Error);
  CHECK_THROWS_AS(closed_form_bound(SpectrumTemplate{10, 0.0, 1, 1, SpectrumMode::Fixed}), Error);
  CHECK_THROWS_AS(closed_form_bound(SpectrumTemplate{10, 0.2, 2, 1, SpectrumMode::Fixed}), Error);
  CHECK_THROWS_AS(closed_form_bound(SpectrumTemplate{10, 0.2, 1, 1, SpectrumMode::Sampled}), Error);
  CHECK_THROWS_AS(SpectrumTemplate({0, 0.2, 1, 1}).validate(), Error);
}

TEST_CASE("monte-carlo estimator") {
  const Eigen::Matrix3d M = Eigen::Vector3d(1, -1, -1).asDiagonal();
  const auto r = mc_convexity_probability(M, MonteCarloOptions{1, 100000, 7, 4});
  CHECK(std::abs(r.mc_estimate - (1 - 1 / std::sqrt(2.0))) < 0.01);
  CHECK(r.mc_estimate <= r.chernoff_value);
  CHECK(r.consistent());
  CHECK(r.chernoff_value == doctest::Approx(0.918559).epsilon(1e-5));

  // Thread count does not change the counts.
  const auto r1 = mc_convexity_probability(M, MonteCarloOptions{1, 20000, 9, 1});
  const auto r3 = mc_convexity_probability(M, MonteCarloOptions{1, 20000, 9, 3});
  CHECK(r1.mc_hits == r3.mc_hits);

  const Eigen::Matrix3d N = -Eigen::Matrix3d::Identity();
  CHECK(mc_convexity_probability(N, MonteCarloOptions{2, 5000, 1, 1}).mc_hits == 0);
  CHECK_THROWS_AS(mc_convexity_probability(M, MonteCarloOptions{4, 10, 1, 1}), Error);
  CHECK_THROWS_AS(mc_convexity_probability(M, MonteCarloOptions{1, 0, 1, 1}), Error);

  // Direct and spectral samplers estimate the same probability.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd S = oracle::random_symmetric(12, rng) - 0.3 * Eigen::MatrixXd::Identity(12, 12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    for (int d : {1, 2}) {
      const auto direct = mc_convexity_probability(S, MonteCarloOptions{d, 40000, 11, 4});
      const auto spectral = mc_convexity_probability_spectral(es.eigenvalues(), MonteCarloOptions{d, 40000, 12, 4});
      const double p = 0.5 * (direct.mc_estimate + spectral.mc_estimate);
      const double se = std::sqrt(std::max(p * (1 - p), 1e-6) * 2 / 40000);
      CHECK(std::abs(direct.mc_estimate - spectral.mc_estimate) <= 5 * se + 1e-4);
      CHECK(direct.chernoff_value == doctest::Approx(spectral.chernoff_value).epsilon(1e-9));
    }
  }
}

TEST_CASE("spectral sampler on a large nearly concave spectrum") {
  // Many tail eigenvalues, so the χ² shortcut and its fallback both run.
  Eigen::VectorXd lam(600);
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = i < 15 ? 1.0 : -0.05 - 0.001 * static_cast<double>(i % 7);
  const auto s = mc_convexity_probability_spectral(lam, MonteCarloOptions{1, 10000, 5, 4});
  // Direct estimator on the diagonal matrix.
  const Eigen::MatrixXd D = lam.asDiagonal();
  const auto d = mc_convexity_probability(D, MonteCarloOptions{1, 10000, 6, 4});
  const double p = 0.5 * (s.mc_estimate + d.mc_estimate);
  CHECK(std::abs(s.mc_estimate - d.mc_estimate) <= 5 * std::sqrt(std::max(p * (1 - p), 1e-6) * 2 / 10000) + 1e-4);
  CHECK(s.consistent());

  // Distinct eigenvalues: buckets have spread, so the expansion path runs.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 1);
  for (double shift : {0.02, 0.06}) {
    Eigen::VectorXd mixed(300);
    for (auto& v : mixed) v = g(rng) - shift;
    const auto sm = mc_convexity_probability_spectral(mixed, MonteCarloOptions{1, 20000, 9, 4});
    const Eigen::MatrixXd Dm = mixed.asDiagonal();
    const auto dm = mc_convexity_probability(Dm, MonteCarloOptions{1, 20000, 10, 4});
    const double pm = 0.5 * (sm.mc_estimate + dm.mc_estimate);
    CHECK(pm > 0.05);
    CHECK(std::abs(sm.mc_estimate - dm.mc_estimate) <= 5 * std::sqrt(pm * (1 - pm) * 2 / 20000));
  }
  CHECK(mc_convexity_probability_spectral(Eigen::Vector2d(0, 0), MonteCarloOptions{1, 10, 1, 1}).mc_hits == 10);
  CHECK(mc_convexity_probability_spectral(Eigen::Vector2d(0, -1), MonteCarloOptions{1, 10, 1, 1}).mc_hits == 0);
}

TEST_CASE("certificates") {
  std::mt19937_64 rng(4);
  const auto A = oracle::distance_matrix(oracle::random_points(12, 3, rng));
  const auto B = oracle::distance_matrix(oracle::random_points(12, 3, rng));
  const auto desc = PolytopeDescriptor::permutation(12);
  const auto c = certify_conditional_concavity(hessian_E2(A, B), desc);
  CHECK(c.concave);
  CHECK(c.margin > 0);
  CHECK(c.positive_count == 0);
  CHECK(c.dimension == 121);
  const auto direct = mc_convexity_probability(hessian_E2(A, B), desc, MonteCarloOptions{1, 5000, 1, 2},
                                               SamplingMethod::Direct);
  CHECK(direct.mc_hits == 0);
  CHECK(direct.chernoff_value < 1e-12);

  // Squared distances are not conditionally concave.
  const auto sq = certify_conditional_concavity(hessian_E2(A.cwiseAbs2().eval(), B.cwiseAbs2().eval()), desc);
  CHECK_FALSE(sq.concave);
  CHECK(sq.positive_count > 0);

  const auto zero = certify_conditional_concavity(KroneckerHessian<double>(4, 4), PolytopeDescriptor::permutation(4));
  CHECK_FALSE(zero.concave);
  CHECK(zero.margin == 0);

  const auto s2 = certify_from_spectrum<double>(Eigen::Vector2d(-1, -2));
  CHECK(s2.concave);
  CHECK(s2.margin == 1);
  CHECK_FALSE(certify_from_spectrum<double>(Eigen::Vector2d(-1, 0)).concave);
}

TEST_CASE("mesh distances vs squared distances") {
  const auto mesh1 = sphere_hull_mesh(random_sphere_points(30, 1));
  const auto mesh2 = sphere_hull_mesh(random_sphere_points(30, 2));
  const auto g1 = geodesic_distances(mesh_to_graph(mesh1)).values;
  const auto g2 = geodesic_distances(mesh_to_graph(mesh2)).values;
  const auto desc = PolytopeDescriptor::permutation(30);
  const auto r = mc_convexity_probability(hessian_E2(g1, g2), desc, MonteCarloOptions{1, 20000, 3, 4});
  CHECK(r.mc_hits == 0);
  CHECK(r.chernoff_value < 1e-12);
  const auto rs = mc_convexity_probability(hessian_E2(g1.cwiseAbs2().eval(), g2.cwiseAbs2().eval()), desc,
                                           MonteCarloOptions{1, 20000, 3, 4});
  CHECK(rs.chernoff_value > 0);
  CHECK(rs.consistent());
}

TEST_CASE("omega ensemble sampling") {
  const SpectrumTemplate tpl{49, 0.3, 1, 1, SpectrumMode::Fixed};
  const auto M = sample_omega_hessian(tpl, 42);
  CHECK((M - M.transpose()).norm() == 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  Eigen::VectorXd want = tpl.eigenvalues();
  std::sort(want.begin(), want.end());
  CHECK((es.eigenvalues() - want).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((sample_omega_hessian(tpl, 42) - M).norm() == 0);
  CHECK((sample_omega_hessian(tpl, 43) - M).norm() > 0);
  CHECK_THROWS_AS(sample_omega_hessian(tpl, 1, 10), SizeLimitError);

  // Sampled mode stays inside the template bands.
  auto rng = make_rng(5);
  const SpectrumTemplate sampled{100, 0.2, 2, 3, SpectrumMode::Sampled};
  const auto lam = sampled.eigenvalues(rng);
  CHECK((lam.array() >= 0).count() == 20);
  CHECK(lam.maxCoeff() <= 2);
  for (double v : lam)
    if (v < 0) CHECK((v <= -3 && v >= -4));
  CHECK_THROWS_AS(sampled.eigenvalues(), Error);

  // Haar: first column is a unit vector with mean ≈ 0 and second moments 1/m.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(5), second = Eigen::VectorXd::Zero(5);
  const int draws = 4000;
  for (int k = 0; k < draws; ++k) {
    const Eigen::MatrixXd Q = haar_orthogonal(5, rng);
    CHECK((Q.transpose() * Q - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-12);
    mean += Q.col(0);
    second += Q.col(0).cwiseAbs2();
  }
  mean /= draws;
  second /= draws;
  CHECK(mean.cwiseAbs().maxCoeff() < 0.03);
  CHECK((second.array() - 0.2).abs().maxCoeff() < 0.02);
}

TEST_CASE("face dimension") {
  CHECK(face_dimension(permutation_state(std::vector<int>{2, 0, 1})) == 0);
  CHECK(face_dimension(MatchingState<double>{Eigen::MatrixXd::Constant(4, 4, 0.25)}) == 9);
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(4, 4);
  X.topLeftCorner(2, 2) << 0.5, 0.5, 0.5, 0.5;
  CHECK(face_dimension(MatchingState<double>{X}) == 1);
}

TEST_CASE("ensemble experiment") {
  EnsembleOptions opt;
  opt.trials = 20;
  opt.seed = 3;
  opt.threads = 4;
  const auto concave = vertex_local_minima_experiment({25, 0.0, 1, 1, SpectrumMode::Fixed}, 6, opt);
  CHECK(concave.vertex_fraction() == 1.0);
  CHECK(concave.face_histogram.at(0) == 20);
  CHECK(concave.converged_count == 20);

  const SpectrumTemplate mixed{25, 0.3, 1, 1, SpectrumMode::Fixed};
  const auto a = vertex_local_minima_experiment(mixed, 6, opt);
  opt.threads = 1;
  const auto b = vertex_local_minima_experiment(mixed, 6, opt);
  CHECK(a.vertex_count == b.vertex_count);
  CHECK(a.face_histogram == b.face_histogram);
  int total = 0;
  for (const auto& [dim, count] : a.face_histogram) total += count;
  CHECK(total == 20);
  CHECK_THROWS_AS(vertex_local_minima_experiment(mixed, 5, opt), Error);
}
