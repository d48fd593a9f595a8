#pragma once

// Edge-affinity matrices from point clouds, weighted graphs and triangle
// meshes, plus the kernel catalog used to turn distances into affinities.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccgm/polytope.hpp"

namespace ccgm {

/// One point per row.
struct PointCloud {
  Eigen::MatrixXd points;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dimension() const { return points.cols(); }

  /// Throws if empty or if two points are closer than 1e-12.
  void validate() const;
};

struct WeightedEdge {
  int u, v;
  double weight;
};

struct WeightedGraph {
  int vertex_count = 0;
  std::vector<WeightedEdge> edges;

  void validate() const;
};

struct TriangleMesh {
  Eigen::MatrixXd vertices;  // n×3
  std::vector<std::array<int, 3>> faces;
};

enum class Provenance { Distance, SquaredDistance, Kernel, Other };

struct AffinityMatrix {
  Eigen::MatrixXd values;
  Provenance provenance = Provenance::Other;
  std::string label;  // kernel name and parameters

  Eigen::Index size() const { return values.rows(); }
};

enum class KernelKind {
  Distance,
  SquaredDistance,
  Multiquadric,
  Gaussian,
  WendlandC30,
  WendlandC31,
  SphericalDistance,
  SphericalGaussian,
};

struct KernelSpec {
  KernelKind kind = KernelKind::Distance;
  double c = 1;       // multiquadric offset
  double beta = 0.1;  // multiquadric exponent, (0, 1]
  double tau = 1;     // gaussian width
  double gamma = 1;   // spherical exponent, (0, 1]
  std::optional<double> scale;   // Wendland support radius; default max distance
  bool c30_squared_form = false; // (1 − r²)₊ instead of (1 − r)₊

  void validate() const;
  std::string describe() const;

  static KernelSpec parse(const std::string& name);
};

std::string to_string(KernelKind kind);

AffinityMatrix pairwise_euclidean(const PointCloud& cloud);

/// All-pairs shortest paths by Dijkstra from every vertex.
AffinityMatrix geodesic_distances(const WeightedGraph& graph, unsigned threads = 1);

/// Mesh edges weighted by Euclidean length.
WeightedGraph mesh_to_graph(const TriangleMesh& mesh);

/// arccos⟨xᵢ, xⱼ⟩ (clamped), raised to γ.
AffinityMatrix spherical_distances(const PointCloud& cloud, double gamma = 1);

/// Elementwise kernel on a distance matrix.
AffinityMatrix apply_kernel(const AffinityMatrix& distances, const KernelSpec& spec);

enum class Definiteness { Positive, Negative, Indefinite };

std::string to_string(Definiteness d);

/// Spectrum of FᵀAF: definiteness of A on the zero-sum subspace.
struct ConditionalSpectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  Definiteness definiteness = Definiteness::Indefinite;
  double margin = 0;            // min |eigenvalue|
};

ConditionalSpectrum cpd_order1_test(const AffinityMatrix& A, const ZeroSumBasis<double>& basis);

/// Random points on the unit sphere S².
PointCloud random_sphere_points(Eigen::Index n, std::uint64_t seed);

/// Convex hull of points on the unit sphere: a closed triangulated sphere with
/// every point as a vertex, faces oriented outward. Points must be in general
/// position (no four cocircular), which holds almost surely for random input.
TriangleMesh sphere_hull_mesh(const PointCloud& cloud);

}  // namespace ccgm
