#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ccgm/affinity.hpp"
#include "ccgm/errors.hpp"
#include "ccgm/io.hpp"
#include "oracles.hpp"

using namespace ccgm;
namespace fs = std::filesystem;

namespace {

PointCloud cloud_of(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd P(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index k = 0;
    for (double v : r) P(i, k++) = v;
    ++i;
  }
  return {P};
}

AffinityMatrix distances(const Eigen::MatrixXd& D) { return {D, Provenance::Distance, "test"}; }

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path p = fs::temp_directory_path() / ("ccgm_test_affinity_" + name);
  std::ofstream(p) << contents;
  return p;
}

}  // namespace

TEST_CASE("pairwise euclidean") {
  const auto A = pairwise_euclidean(cloud_of({{0, 0}, {1, 0}}));
  CHECK(A.values(0, 1) == 1);
  CHECK(A.values(1, 0) == 1);
  CHECK(A.values(0, 0) == 0);
  CHECK(pairwise_euclidean(cloud_of({{0, 0}, {3, 4}})).values(0, 1) == doctest::Approx(5).epsilon(1e-15));
  CHECK(A.provenance == Provenance::Distance);

  std::mt19937_64 rng(3);
  const Eigen::MatrixXd P = oracle::random_points(10, 3, rng);
  CHECK((pairwise_euclidean({P}).values - oracle::distance_matrix(P)).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(pairwise_euclidean(cloud_of({{0, 0}, {1, 1}, {0, 0}})), Error);
}

TEST_CASE("geodesic distances") {
  WeightedGraph path{3, {{0, 1, 1}, {1, 2, 1}}};
  CHECK(geodesic_distances(path).values(0, 2) == 2);
  WeightedGraph tri{3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}};
  const auto T = geodesic_distances(tri).values;
  CHECK(T(0, 1) == 1);
  CHECK(T(1, 2) == 1);
  CHECK(T(0, 2) == 1);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 20;
    WeightedGraph g;
    g.vertex_count = n;
    std::vector<std::tuple<int, int, double>> edges;
    // Random spanning tree plus random extra edges.
    for (int v = 1; v < n; ++v) {
      const int u = static_cast<int>(rng() % static_cast<unsigned>(v));
      edges.emplace_back(u, v, w(rng));
    }
    for (int e = 0; e < 25; ++e) {
      const int u = static_cast<int>(rng() % n), v = static_cast<int>(rng() % n);
      if (u != v) edges.emplace_back(u, v, w(rng));
    }
    for (const auto& [u, v, wt] : edges) g.edges.push_back({u, v, wt});
    const Eigen::MatrixXd D = geodesic_distances(g, trial % 2 ? 4 : 1).values;
    CHECK((D - oracle::floyd_warshall(n, edges)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((D - D.transpose()).cwiseAbs().maxCoeff() == 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) CHECK_MESSAGE(D(i, j) <= D(i, k) + D(k, j) + 1e-12, "triangle inequality");
  }

  WeightedGraph split{4, {{0, 1, 1}, {2, 3, 1}}};
  CHECK_THROWS_AS(geodesic_distances(split), Error);
  WeightedGraph negative{2, {{0, 1, -1}}};
  CHECK_THROWS_AS(geodesic_distances(negative), Error);
}

TEST_CASE("kernels") {
  Eigen::MatrixXd D(3, 3);
  D << 0, 0.5, 2, 0.5, 0, 1, 2, 1, 0;
  KernelSpec c30 = KernelSpec::parse("c30");
  c30.scale = 1;
  const auto C = apply_kernel(distances(D), c30).values;
  CHECK(C(0, 1) == doctest::Approx(0.5));
  CHECK(C(0, 2) == 0);
  CHECK(C(0, 0) == 1);
  c30.c30_squared_form = true;
  CHECK(apply_kernel(distances(D), c30).values(0, 1) == doctest::Approx(0.75));

  KernelSpec c31 = KernelSpec::parse("wendland-c31");
  c31.scale = 1;
  const auto W = apply_kernel(distances(D), c31).values;
  CHECK(W(0, 1) == doctest::Approx(std::pow(0.5, 4) * 3));
  CHECK(W(1, 2) == 0);
  // Default scale is the largest distance.
  const auto Wd = apply_kernel(distances(D), KernelSpec::parse("c31")).values;
  CHECK(Wd(0, 2) == 0);
  CHECK(Wd(1, 2) == doctest::Approx(std::pow(0.5, 4) * 3));

  const auto G = apply_kernel(distances(D), KernelSpec::parse("gaussian")).values;
  CHECK(G(0, 0) == 1);
  CHECK(G(1, 2) == doctest::Approx(std::exp(-1.0)));

  const auto M = apply_kernel(distances(D), KernelSpec::parse("multiquadric")).values;
  CHECK(M(0, 0) == 1);
  CHECK(M(0, 2) == doctest::Approx(std::pow(5.0, 0.1)));

  const auto S = apply_kernel(distances(D), KernelSpec::parse("squared"));
  CHECK(S.values(0, 2) == 4);
  CHECK(S.provenance == Provenance::SquaredDistance);
  CHECK(apply_kernel(distances(D), KernelSpec::parse("distance")).values == D);

  KernelSpec bad = KernelSpec::parse("multiquadric");
  bad.beta = 1.5;
  CHECK_THROWS_AS(apply_kernel(distances(D), bad), Error);
  bad = KernelSpec::parse("gaussian");
  bad.tau = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = KernelSpec::parse("spherical-distance");
  bad.gamma = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = KernelSpec::parse("c30");
  bad.scale = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(KernelSpec::parse("laplacian"), Error);
  // Kernels take distances, not kernel values.
  CHECK_THROWS_AS(apply_kernel(apply_kernel(distances(D), KernelSpec::parse("gaussian")), KernelSpec::parse("gaussian")), Error);

  std::mt19937_64 rng(8);
  const Eigen::MatrixXd P = oracle::random_points(15, 3, rng);
  for (const char* name : {"distance", "squared", "multiquadric", "gaussian", "c30", "c31"}) {
    const auto K = apply_kernel(pairwise_euclidean({P}), KernelSpec::parse(name)).values;
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    const double diag = (std::string(name) == "distance" || std::string(name) == "squared") ? 0.0 : 1.0;
    CHECK((K.diagonal().array() - diag).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("spherical distances") {
  const auto A = spherical_distances(cloud_of({{0, 0, 1}, {0, 0, -1}, {1, 0, 0}})).values;
  CHECK(A(0, 1) == doctest::Approx(std::numbers::pi));
  CHECK(A(0, 2) == doctest::Approx(std::numbers::pi / 2));
  CHECK(A(0, 0) == 0);
  const auto half = spherical_distances(cloud_of({{0, 0, 1}, {0, 0, -1}}), 0.5).values;
  CHECK(half(0, 1) == doctest::Approx(std::sqrt(std::numbers::pi)));
  CHECK_THROWS_AS(spherical_distances(cloud_of({{0, 0, 2}, {1, 0, 0}})), Error);
}

TEST_CASE("conditional definiteness of order 1") {
  std::mt19937_64 rng(21);
  const Eigen::MatrixXd P = oracle::random_points(10, 3, rng);
  AffinityMatrix neg{-pairwise_euclidean({P}).values, Provenance::Kernel, "-distance"};
  const auto s = cpd_order1_test(neg, make_zero_sum_basis(10));
  CHECK(s.definiteness == Definiteness::Positive);
  CHECK(s.eigenvalues.minCoeff() > 0);
  CHECK(s.margin == doctest::Approx(s.eigenvalues.minCoeff()));

  const auto two = cpd_order1_test(pairwise_euclidean(cloud_of({{0, 0}, {1, 0}})), make_zero_sum_basis(2));
  REQUIRE(two.eigenvalues.size() == 1);
  CHECK(two.eigenvalues(0) == doctest::Approx(-1));
  CHECK(two.definiteness == Definiteness::Negative);

  const auto zero = cpd_order1_test({Eigen::MatrixXd::Zero(4, 4), Provenance::Other, "zero"}, make_zero_sum_basis(4));
  CHECK(zero.eigenvalues.cwiseAbs().maxCoeff() == 0);
  CHECK(zero.definiteness == Definiteness::Indefinite);
  CHECK_THROWS_AS(cpd_order1_test({Eigen::MatrixXd::Zero(4, 4), Provenance::Other, "zero"}, make_zero_sum_basis(3)), Error);

  for (int n : {5, 12, 25, 40})
    for (int d : {2, 3, 5}) {
      const Eigen::MatrixXd Q = oracle::random_points(n, d, rng);
      const auto D = pairwise_euclidean({Q});
      AffinityMatrix negD{-D.values, Provenance::Kernel, "-distance"};
      CHECK(cpd_order1_test(negD, make_zero_sum_basis(n)).definiteness == Definiteness::Positive);
      const auto G = apply_kernel(D, KernelSpec::parse("gaussian")).values;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() > 0);
    }
}

TEST_CASE("sphere hull mesh") {
  for (int n : {4, 12, 60}) {
    const auto cloud = random_sphere_points(n, static_cast<std::uint64_t>(n));
    const auto mesh = sphere_hull_mesh(cloud);
    CHECK(static_cast<int>(mesh.faces.size()) == 2 * n - 4);
    // Closed and consistently oriented: every directed edge appears once, its
    // reverse once.
    std::set<std::pair<int, int>> directed;
    const Eigen::Vector3d centroid = mesh.vertices.colwise().mean();
    for (const auto& f : mesh.faces) {
      for (int k = 0; k < 3; ++k) CHECK(directed.insert({f[k], f[(k + 1) % 3]}).second);
      const Eigen::Vector3d a = mesh.vertices.row(f[0]), b = mesh.vertices.row(f[1]), c = mesh.vertices.row(f[2]);
      CHECK((b - a).cross(c - a).dot(a - centroid) > 0);
    }
    for (const auto& [u, v] : directed) CHECK(directed.count({v, u}) == 1);
    const auto g = mesh_to_graph(mesh);
    CHECK(static_cast<int>(g.edges.size()) == 3 * n - 6);
    const auto D = geodesic_distances(g).values;
    CHECK(D.allFinite());
    // Graph paths on chords are never shorter than straight lines.
    CHECK((D - pairwise_euclidean(cloud).values).minCoeff() >= -1e-12);
  }
  CHECK(random_sphere_points(5, 1).points == random_sphere_points(5, 1).points);
}

TEST_CASE("io round trips and errors") {
  std::istringstream csv("# header comment\n0,0,0\n1,0,0\n\n0,2,0\n");
  const Eigen::MatrixXd P = io::parse_dense_csv(csv);
  CHECK(P.rows() == 3);
  CHECK(P(2, 1) == 2);
  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(io::parse_dense_csv(ragged), Error);
  std::istringstream junk("1,abc\n");
  try {
    io::parse_dense_csv(junk);
    FAIL("expected an input error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
  }

  const auto xyz = temp_file("cloud.xyz", "0 0 0\n1 0 0\n0 1 0\n");
  CHECK(io::read_point_cloud(xyz).size() == 3);

  const auto edges = temp_file("g.edges", "0 1 1.5\n1 2 2\n# comment\n");
  const auto g = io::read_edge_list(edges);
  CHECK(g.vertex_count == 3);
  CHECK(geodesic_distances(g).values(0, 2) == 3.5);
  CHECK_THROWS_AS(io::read_edge_list(temp_file("bad.edges", "0 1\n")), Error);
  CHECK_THROWS_AS(io::read_edge_list(temp_file("neg.edges", "0 1 -2\n")), Error);

  const auto cloud = random_sphere_points(8, 4);
  const auto mesh = sphere_hull_mesh(cloud);
  const fs::path off = fs::temp_directory_path() / "ccgm_test_affinity_mesh.off";
  io::write_off(off, mesh);
  const auto back = io::read_off(off);
  CHECK(back.faces == mesh.faces);
  CHECK((back.vertices - mesh.vertices).cwiseAbs().maxCoeff() == 0);
  CHECK_THROWS_AS(io::read_off(temp_file("bad.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n")), Error);
  CHECK_THROWS_AS(io::read_point_cloud("/nonexistent/ccgm.csv"), Error);

  io::LabelledMatrix m{{"plain", "with,comma", "with \"quote\""}, Eigen::MatrixXd::Zero(3, 3)};
  m.values(0, 1) = m.values(1, 0) = 0.1;
  m.values(2, 0) = m.values(0, 2) = std::numeric_limits<double>::quiet_NaN();
  std::ostringstream os;
  io::write_labelled_matrix(os, m);
  const auto lm = temp_file("labelled.csv", os.str());
  const auto r = io::read_labelled_matrix(lm);
  CHECK(r.labels == m.labels);
  CHECK(r.values(0, 1) == 0.1);
  CHECK(std::isnan(r.values(2, 0)));
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::csv_field("a,b") == "\"a,b\"");
  CHECK(io::split_csv_line("\"a,b\",c") == std::vector<std::string>{"a,b", "c"});
}
