#include "ccgm/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ccgm/errors.hpp"
#include "ccgm/parallel.hpp"
#include "ccgm/random.hpp"

namespace ccgm {

void PointCloud::validate() const {
  if (points.rows() == 0 || points.cols() == 0) throw invalid_argument("point cloud is empty");
  if (!points.allFinite()) throw invalid_argument("point cloud has non-finite coordinates");
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (Eigen::Index j = i + 1; j < points.rows(); ++j)
      if ((points.row(i) - points.row(j)).norm() <= 1e-12)
        throw invalid_argument("duplicate points " + std::to_string(i) + " and " + std::to_string(j));
}

void WeightedGraph::validate() const {
  if (vertex_count < 1) throw invalid_argument("graph has no vertices");
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= vertex_count || e.v >= vertex_count)
      throw invalid_argument("edge references vertex out of range");
    if (!(e.weight > 0) || !std::isfinite(e.weight)) throw invalid_argument("edge weights must be positive");
  }
}

AffinityMatrix pairwise_euclidean(const PointCloud& cloud) {
  cloud.validate();
  const auto n = cloud.size();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) D(i, j) = D(j, i) = (cloud.points.row(i) - cloud.points.row(j)).norm();
  return {std::move(D), Provenance::Distance, "distance"};
}

AffinityMatrix geodesic_distances(const WeightedGraph& graph, unsigned threads) {
  graph.validate();
  const int n = graph.vertex_count;
  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
  for (const auto& e : graph.edges) {
    adj[static_cast<std::size_t>(e.u)].push_back({e.v, e.weight});
    adj[static_cast<std::size_t>(e.v)].push_back({e.u, e.weight});
  }
  Eigen::MatrixXd D(n, n);
  const double inf = std::numeric_limits<double>::infinity();
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t src) {
    std::vector<double> dist(static_cast<std::size_t>(n), inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[src] = 0;
    heap.push({0.0, static_cast<int>(src)});
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[static_cast<std::size_t>(u)]) continue;
      for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
        const double nd = d + w;
        if (nd < dist[static_cast<std::size_t>(v)]) {
          dist[static_cast<std::size_t>(v)] = nd;
          heap.push({nd, v});
        }
      }
    }
    for (int v = 0; v < n; ++v) D(static_cast<Eigen::Index>(src), v) = dist[static_cast<std::size_t>(v)];
  });
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (!std::isfinite(D(i, j)))
        throw invalid_argument("graph is disconnected: vertex " + std::to_string(j) + " unreachable from " +
                               std::to_string(i));
  // Dijkstra from both ends can differ in the last bit.
  D = (0.5 * (D + D.transpose())).eval();
  return {std::move(D), Provenance::Distance, "geodesic"};
}

WeightedGraph mesh_to_graph(const TriangleMesh& mesh) {
  const auto n = static_cast<int>(mesh.vertices.rows());
  std::set<std::pair<int, int>> seen;
  WeightedGraph g;
  g.vertex_count = n;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      int a = f[static_cast<std::size_t>(k)], b = f[static_cast<std::size_t>((k + 1) % 3)];
      if (a < 0 || b < 0 || a >= n || b >= n) throw invalid_argument("mesh face references vertex out of range");
      if (a > b) std::swap(a, b);
      if (a == b || !seen.insert({a, b}).second) continue;
      const double w = (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
      if (!(w > 0)) throw invalid_argument("mesh has a zero-length edge");
      g.edges.push_back({a, b, w});
    }
  }
  return g;
}

AffinityMatrix spherical_distances(const PointCloud& cloud, double gamma) {
  cloud.validate();
  if (!(gamma > 0 && gamma <= 1)) throw invalid_argument("spherical exponent gamma must be in (0, 1]");
  const auto n = cloud.size();
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(cloud.points.row(i).norm() - 1) > 1e-9)
      throw invalid_argument("point " + std::to_string(i) + " is not on the unit sphere");
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = std::clamp(cloud.points.row(i).dot(cloud.points.row(j)), -1.0, 1.0);
      D(i, j) = D(j, i) = std::pow(std::acos(c), gamma);
    }
  return {std::move(D), Provenance::Distance, gamma == 1 ? "spherical" : "spherical^" + std::to_string(gamma)};
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Distance: return "distance";
    case KernelKind::SquaredDistance: return "squared";
    case KernelKind::Multiquadric: return "multiquadric";
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::WendlandC30: return "c30";
    case KernelKind::WendlandC31: return "c31";
    case KernelKind::SphericalDistance: return "spherical-distance";
    case KernelKind::SphericalGaussian: return "spherical-gaussian";
  }
  return "unknown";
}

KernelSpec KernelSpec::parse(const std::string& name) {
  static const std::map<std::string, KernelKind> names{
      {"distance", KernelKind::Distance},
      {"squared", KernelKind::SquaredDistance},
      {"squared-distance", KernelKind::SquaredDistance},
      {"multiquadric", KernelKind::Multiquadric},
      {"gaussian", KernelKind::Gaussian},
      {"c30", KernelKind::WendlandC30},
      {"wendland-c30", KernelKind::WendlandC30},
      {"c31", KernelKind::WendlandC31},
      {"wendland-c31", KernelKind::WendlandC31},
      {"spherical-distance", KernelKind::SphericalDistance},
      {"spherical-gaussian", KernelKind::SphericalGaussian},
  };
  const auto it = names.find(name);
  if (it == names.end()) throw invalid_argument("unknown kernel '" + name + "'");
  KernelSpec k;
  k.kind = it->second;
  return k;
}

void KernelSpec::validate() const {
  switch (kind) {
    case KernelKind::Multiquadric:
      if (!(beta > 0 && beta <= 1)) throw invalid_argument("multiquadric beta must be in (0, 1]");
      if (!(c >= 0)) throw invalid_argument("multiquadric c must be >= 0");
      break;
    case KernelKind::Gaussian:
      if (!(tau > 0)) throw invalid_argument("gaussian tau must be > 0");
      break;
    case KernelKind::WendlandC30:
    case KernelKind::WendlandC31:
      if (scale && !(*scale > 0)) throw invalid_argument("wendland scale must be > 0");
      break;
    case KernelKind::SphericalDistance:
      if (!(gamma > 0 && gamma <= 1)) throw invalid_argument("spherical gamma must be in (0, 1]");
      break;
    case KernelKind::SphericalGaussian:
      if (!(gamma > 0 && gamma <= 1)) throw invalid_argument("spherical gamma must be in (0, 1]");
      if (!(tau > 0)) throw invalid_argument("spherical gaussian tau must be > 0");
      break;
    default:
      break;
  }
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case KernelKind::Multiquadric: os << "(c=" << c << ",beta=" << beta << ")"; break;
    case KernelKind::Gaussian: os << "(tau=" << tau << ")"; break;
    case KernelKind::WendlandC30:
    case KernelKind::WendlandC31:
      if (scale) os << "(s=" << *scale << ")";
      if (c30_squared_form && kind == KernelKind::WendlandC30) os << "[squared-form]";
      break;
    case KernelKind::SphericalDistance: os << "(gamma=" << gamma << ")"; break;
    case KernelKind::SphericalGaussian: os << "(tau=" << tau << ",gamma=" << gamma << ")"; break;
    default: break;
  }
  return os.str();
}

AffinityMatrix apply_kernel(const AffinityMatrix& distances, const KernelSpec& spec) {
  spec.validate();
  if (distances.provenance != Provenance::Distance)
    throw invalid_argument("kernels apply to distance matrices only");
  const Eigen::MatrixXd& D = distances.values;
  const double s = spec.scale.value_or(D.size() ? D.maxCoeff() : 1.0);
  std::function<double(double)> f;
  Provenance prov = Provenance::Kernel;
  switch (spec.kind) {
    case KernelKind::Distance:
      f = [](double d) { return d; };
      prov = Provenance::Distance;
      break;
    case KernelKind::SquaredDistance:
      f = [](double d) { return d * d; };
      prov = Provenance::SquaredDistance;
      break;
    case KernelKind::Multiquadric:
      f = [&](double d) { return std::pow(spec.c * spec.c + d * d, spec.beta); };
      break;
    case KernelKind::Gaussian:
      f = [&](double d) { return std::exp(-spec.tau * spec.tau * d * d); };
      break;
    case KernelKind::WendlandC30:
      f = [&, s](double d) {
        const double r = s > 0 ? d / s : 0.0;
        return spec.c30_squared_form ? std::max(0.0, 1 - r * r) : std::max(0.0, 1 - r);
      };
      break;
    case KernelKind::WendlandC31:
      f = [s](double d) {
        const double r = s > 0 ? d / s : 0.0;
        const double h = std::max(0.0, 1 - r);
        return h * h * h * h * (4 * r + 1);
      };
      break;
    case KernelKind::SphericalDistance:
      f = [&](double d) { return std::pow(d, spec.gamma); };
      prov = Provenance::Distance;
      break;
    case KernelKind::SphericalGaussian:
      f = [&](double d) { return std::exp(-spec.tau * spec.tau * std::pow(d, spec.gamma)); };
      break;
  }
  AffinityMatrix out{D.unaryExpr(f), prov, spec.describe()};
  return out;
}

std::string to_string(Definiteness d) {
  switch (d) {
    case Definiteness::Positive: return "positive";
    case Definiteness::Negative: return "negative";
    case Definiteness::Indefinite: return "indefinite";
  }
  return "indefinite";
}

ConditionalSpectrum cpd_order1_test(const AffinityMatrix& A, const ZeroSumBasis<double>& basis) {
  if (A.values.rows() != basis.dimension() || A.values.cols() != basis.dimension())
    throw invalid_argument("basis dimension does not match affinity matrix");
  const auto& F = basis.columns;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F.transpose() * A.values * F, Eigen::EigenvaluesOnly);
  ConditionalSpectrum out;
  out.eigenvalues = es.eigenvalues();
  if (out.eigenvalues.size() == 0) return out;
  out.margin = out.eigenvalues.cwiseAbs().minCoeff();
  if (out.eigenvalues.minCoeff() > 0)
    out.definiteness = Definiteness::Positive;
  else if (out.eigenvalues.maxCoeff() < 0)
    out.definiteness = Definiteness::Negative;
  return out;
}

PointCloud random_sphere_points(Eigen::Index n, std::uint64_t seed) {
  auto rng = make_rng(seed);
  Eigen::MatrixXd P = gaussian_matrix(n, 3, rng);
  P.rowwise().normalize();
  return {std::move(P)};
}

TriangleMesh sphere_hull_mesh(const PointCloud& cloud) {
  cloud.validate();
  if (cloud.dimension() != 3 || cloud.size() < 4) throw invalid_argument("hull mesh needs >= 4 points in R^3");
  const auto& P = cloud.points;
  const int n = static_cast<int>(P.rows());
  // A triple is a hull face iff every other point lies strictly on one side
  // of its plane; for points on a sphere that is the empty-circumcircle test.
  TriangleMesh mesh;
  mesh.vertices = P;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) {
        const Eigen::Vector3d pa = P.row(a), pb = P.row(b), pc = P.row(c);
        const Eigen::Vector3d normal = (pb - pa).cross(pc - pa);
        const double off = normal.dot(pa);
        int above = 0, below = 0;
        for (int k = 0; k < n && !(above && below); ++k) {
          if (k == a || k == b || k == c) continue;
          const double s = normal.dot(P.row(k).transpose()) - off;
          if (s > 0)
            ++above;
          else
            ++below;
        }
        if (above && below) continue;
        if (above)
          mesh.faces.push_back({a, c, b});
        else
          mesh.faces.push_back({a, b, c});
      }
  // Euler characteristic of a triangulated sphere: F = 2V − 4.
  if (static_cast<int>(mesh.faces.size()) != 2 * n - 4)
    throw numerical_error("hull mesh is degenerate (points not in general position)");
  return mesh;
}

}  // namespace ccgm
