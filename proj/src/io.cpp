#include "ccgm/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ccgm/errors.hpp"

namespace ccgm::io {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open '" + path.string() + "'");
  return in;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, std::size_t line_no) {
  const std::string s = trim(raw);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw input_error("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
  return v;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw input_error("no numeric rows found");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw input_error("row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                        " fields, expected " + std::to_string(cols));
    for (std::size_t j = 0; j < cols; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return M;
}

bool skip_line(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  if (quoted) throw input_error("unterminated quoted CSV field");
  out.push_back(cur);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Eigen::MatrixXd parse_dense_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::vector<double> row;
    for (const auto& f : split_csv_line(line)) {
      const double v = parse_number(f, line_no);
      if (std::isnan(v)) throw input_error("line " + std::to_string(line_no) + ": empty field");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return to_matrix(rows);
}

Eigen::MatrixXd parse_whitespace_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) row.push_back(parse_number(tok, line_no));
    rows.push_back(std::move(row));
  }
  return to_matrix(rows);
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string ext = lower_extension(path);
  PointCloud cloud{ext == ".xyz" ? parse_whitespace_matrix(in) : parse_dense_csv(in)};
  return cloud;
}

WeightedGraph read_edge_list(const std::filesystem::path& path, int vertex_count) {
  auto in = open_input(path);
  WeightedGraph g;
  std::string line;
  std::size_t line_no = 0;
  int max_vertex = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::istringstream ls(line);
    std::string a, b, w, extra;
    if (!(ls >> a >> b >> w) || (ls >> extra))
      throw input_error("line " + std::to_string(line_no) + ": expected 'i j w'");
    const double fi = parse_number(a, line_no), fj = parse_number(b, line_no);
    if (fi != std::floor(fi) || fj != std::floor(fj) || fi < 0 || fj < 0)
      throw input_error("line " + std::to_string(line_no) + ": vertex indices must be nonnegative integers");
    const WeightedEdge e{static_cast<int>(fi), static_cast<int>(fj), parse_number(w, line_no)};
    max_vertex = std::max({max_vertex, e.u, e.v});
    g.edges.push_back(e);
  }
  g.vertex_count = vertex_count > 0 ? vertex_count : max_vertex + 1;
  try {
    g.validate();
  } catch (const Error& e) {
    throw input_error(path.string() + ": " + e.what());
  }
  return g;
}

TriangleMesh read_off(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  std::size_t pos = 0;
  auto next = [&]() -> const std::string& {
    if (pos >= tokens.size()) throw input_error(path.string() + ": truncated OFF file");
    return tokens[pos++];
  };
  auto next_int = [&]() {
    const double v = parse_number(next(), 0);
    if (v != std::floor(v) || v < 0) throw input_error(path.string() + ": expected a nonnegative integer");
    return static_cast<int>(v);
  };
  if (next() != "OFF") throw input_error(path.string() + ": missing OFF header");
  const int nv = next_int(), nf = next_int();
  next_int();  // edge count, unused
  TriangleMesh mesh;
  mesh.vertices.resize(nv, 3);
  for (int i = 0; i < nv; ++i)
    for (int k = 0; k < 3; ++k) mesh.vertices(i, k) = parse_number(next(), 0);
  for (int f = 0; f < nf; ++f) {
    const int count = next_int();
    if (count != 3) throw input_error(path.string() + ": only triangle faces are supported");
    std::array<int, 3> tri{};
    for (auto& v : tri) {
      v = next_int();
      if (v >= nv) throw input_error(path.string() + ": face references vertex out of range");
    }
    mesh.faces.push_back(tri);
  }
  return mesh;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_dense_csv(in);
}

void write_off(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path.string() + "'");
  out << "OFF\n" << mesh.vertices.rows() << ' ' << mesh.faces.size() << " 0\n";
  for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i)
    out << format_double(mesh.vertices(i, 0)) << ' ' << format_double(mesh.vertices(i, 1)) << ' '
        << format_double(mesh.vertices(i, 2)) << '\n';
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << format_double(M(i, j));
    out << '\n';
  }
}

void write_labelled_matrix(std::ostream& out, const LabelledMatrix& m) {
  for (std::size_t i = 0; i < m.labels.size(); ++i) out << (i ? "," : "") << csv_field(m.labels[i]);
  out << '\n';
  write_matrix_csv(out, m.values);
}

LabelledMatrix read_labelled_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  LabelledMatrix m;
  while (std::getline(in, line) && skip_line(line)) {
  }
  if (!in && line.empty()) throw input_error(path.string() + ": empty dissimilarity file");
  m.labels = split_csv_line(line);
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::vector<double> row;
    for (const auto& f : split_csv_line(line)) row.push_back(parse_number(f, line_no));
    rows.push_back(std::move(row));
  }
  m.values = to_matrix(rows);
  if (m.values.rows() != static_cast<Eigen::Index>(m.labels.size()) || m.values.cols() != m.values.rows())
    throw input_error(path.string() + ": expected a square matrix matching the label header");
  return m;
}

void write_embedding(std::ostream& out, const std::vector<std::string>& labels, const Eigen::MatrixXd& coords) {
  out << "label";
  for (Eigen::Index k = 0; k < coords.cols(); ++k) out << ",x" << (k + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    out << csv_field(labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index k = 0; k < coords.cols(); ++k) out << ',' << format_double(coords(i, k));
    out << '\n';
  }
}

}  // namespace ccgm::io
