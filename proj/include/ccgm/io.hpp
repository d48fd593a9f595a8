#pragma once

// Text formats: point clouds (CSV / XYZ), edge lists, OFF meshes, dense
// matrices (CSV), labelled dissimilarity matrices and embeddings.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccgm/affinity.hpp"

namespace ccgm::io {

/// Comma-separated rows; blank lines and lines starting with '#' are skipped.
Eigen::MatrixXd parse_dense_csv(std::istream& in);
/// Whitespace-separated rows.
Eigen::MatrixXd parse_whitespace_matrix(std::istream& in);

PointCloud read_point_cloud(const std::filesystem::path& path);  // .csv or .xyz
WeightedGraph read_edge_list(const std::filesystem::path& path, int vertex_count = 0);
TriangleMesh read_off(const std::filesystem::path& path);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

void write_off(const std::filesystem::path& path, const TriangleMesh& mesh);
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& M);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& s);
std::vector<std::string> split_csv_line(const std::string& line);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

struct LabelledMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;
};

/// Header row of labels, then one numeric row per label. Empty cells are NaN.
void write_labelled_matrix(std::ostream& out, const LabelledMatrix& m);
LabelledMatrix read_labelled_matrix(const std::filesystem::path& path);

/// Rows "label,x1,...,xk" under a header "label,x1,...".
void write_embedding(std::ostream& out, const std::vector<std::string>& labels, const Eigen::MatrixXd& coords);

}  // namespace ccgm::io
