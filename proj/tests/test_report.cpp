#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ccgm/io.hpp"
#include "ccgm/report.hpp"
#include "oracles.hpp"
#include "schema_check.hpp"

using namespace ccgm;
using report::Json;

namespace {

const schema_check::Validator& validator() {
  static const schema_check::Validator v(CCGM_SCHEMA_DIR);
  return v;
}

std::vector<std::string> keys(const Json& j) {
  std::vector<std::string> out;
  for (const auto& [k, v] : j.items()) out.push_back(k);
  return out;
}

void check_schema(const Json& j, const std::string& schema) {
  const auto errors = validator().validate(schema_check::Json::parse(j.dump()), schema);
  for (const auto& e : errors) FAIL_CHECK(schema << ": " << e);
}

}  // namespace

TEST_CASE("number") {
  CHECK(report::number(1.5) == Json(1.5));
  CHECK(report::number(NAN).is_null());
  CHECK(report::number(INFINITY).is_null());
  CHECK(report::number(-INFINITY).is_null());
}

TEST_CASE("solver result records") {
  std::mt19937_64 rng(1);
  const auto h = hessian_E2(oracle::distance_matrix(oracle::random_points(6, 2, rng)),
                            oracle::distance_matrix(oracle::random_points(6, 2, rng)));
  const auto r = frank_wolfe(h, sinkhorn_project(Eigen::MatrixXd::Constant(6, 6, 1.0).eval()));
  const Json j = report::to_json(r);
  CHECK(keys(j) == std::vector<std::string>{"kind", "assignment", "energy", "iterations", "converged", "is_vertex", "trace"});
  CHECK(j["assignment"].get<std::vector<int>>() == assignment_of(r.X));
  CHECK(j["trace"].size() == r.trace.size());
  check_schema(j, "solver_result.schema.json");

  SolverResult<double> interior;
  interior.X = {Eigen::MatrixXd::Constant(2, 2, 0.5), PolytopeKind::Permutation};
  interior.energy = NAN;
  const Json ji = report::to_json(interior);
  CHECK(ji["assignment"].is_null());
  CHECK(ji["energy"].is_null());
  check_schema(ji, "solver_result.schema.json");
}

TEST_CASE("certificate and bound records") {
  ConcavityCertificate c;
  c.concave = true;
  c.margin = 0.5;
  c.max_eigenvalue = -0.5;
  c.min_eigenvalue = -3;
  c.dimension = 4;
  const Json jc = report::to_json(c);
  CHECK(jc["certificate"] == "concave");
  CHECK(keys(jc) == std::vector<std::string>{"certificate", "margin", "max_eigenvalue", "min_eigenvalue",
                                             "nonnegative_count", "dimension"});
  check_schema(jc, "certificate.schema.json");

  const Eigen::Vector3d lam(1, -1, -1);
  const auto br = mc_convexity_probability_spectral(lam, MonteCarloOptions{2, 1000, 3, 1});
  const Json jb = report::to_json(br);
  CHECK(keys(jb) == std::vector<std::string>{"chernoff_value", "log_chernoff", "optimal_t", "subspace_dim",
                                             "epsilon_hat", "mc_estimate", "mc_samples", "mc_hits"});
  check_schema(jb, "bound_report.schema.json");
  const auto back = report::bound_report_from_json(jb);
  CHECK(back.chernoff_value == br.chernoff_value);
  CHECK(back.log_chernoff == br.log_chernoff);
  CHECK(back.optimal_t == br.optimal_t);
  CHECK(back.subspace_dim == 2);
  CHECK(back.mc_hits == br.mc_hits);
  CHECK(back.mc_estimate == br.mc_estimate);
  // Round trip through text as well.
  CHECK(report::to_json(report::bound_report_from_json(Json::parse(jb.dump()))) == jb);

  // A concave spectrum has log bound −∞, serialized as null.
  const auto neg = mc_convexity_probability_spectral(Eigen::Vector2d(-1, -2), MonteCarloOptions{1, 10, 0, 1});
  const Json jn = report::to_json(neg);
  CHECK(jn["log_chernoff"].is_null());
  CHECK(jn["chernoff_value"] == 0.0);
  check_schema(jn, "bound_report.schema.json");
  CHECK(std::isnan(report::bound_report_from_json(jn).log_chernoff));

  CHECK_THROWS_AS(report::bound_report_from_json(Json::object()), Error);
  CHECK_THROWS_AS(report::bound_report_from_json(Json{{"chernoff_value", "x"}}), Error);
}

TEST_CASE("ensemble records") {
  EnsembleOptions opt;
  opt.trials = 6;
  const auto rep = vertex_local_minima_experiment({16, 0.3, 1, 1, SpectrumMode::Fixed}, 5, opt);
  const Json j = report::to_json(rep);
  CHECK(keys(j) == std::vector<std::string>{"spectrum", "n", "trials", "vertex_count", "vertex_fraction",
                                            "converged_count", "mean_iterations", "face_histogram"});
  check_schema(Json{{"command", "ensemble"}, {"seed", 0}, {"report", j}}, "ensemble.schema.json");
  check_schema(j["spectrum"], "spectrum_template.schema.json");
  const auto back = report::ensemble_report_from_json(Json::parse(j.dump()));
  CHECK(back.vertex_count == rep.vertex_count);
  CHECK(back.face_histogram == rep.face_histogram);
  CHECK(back.spectrum.m == 16);
  CHECK(report::to_json(back) == j);
  CHECK_THROWS_AS(report::ensemble_report_from_json(Json{{"n", 3}}), Error);

  CHECK(report::ensemble_csv_header().find("face_histogram") != std::string::npos);
  EnsembleReport fake;
  fake.spectrum = {9, 0.25, 1, 2, SpectrumMode::Sampled};
  fake.n = 4;
  fake.trials = 10;
  fake.vertex_count = 8;
  fake.converged_count = 10;
  fake.mean_iterations = 3.5;
  fake.face_histogram = {{0, 8}, {1, 2}};
  CHECK(report::ensemble_csv_row(fake) == "9,0.25,1,2,sampled,4,10,8,0.8,10,3.5,0:8;1:2");
}

TEST_CASE("dissimilarity records") {
  DissimilarityMatrix d;
  d.labels = {"a", "b,c"};
  d.values = Eigen::Matrix2d{{0, NAN}, {NAN, 0}};
  d.failures.push_back({"a", "b,c", "size mismatch"});
  const Json j = report::to_json(d);
  CHECK(j["values"][0][1].is_null());
  CHECK(j["labels"][1] == "b,c");
  check_schema(j, "dissimilarity.schema.json");
}

TEST_CASE("summaries and csv") {
  const auto s = report::summarize({1, 2, NAN, 3});
  CHECK(s.count == 3);
  CHECK(s.mean == 2);
  CHECK(s.std == doctest::Approx(std::sqrt(2.0 / 3)));
  CHECK(std::isnan(report::summarize({}).mean));
  CHECK(std::isnan(report::summarize({NAN}).std));

  BoundReport r;
  r.chernoff_value = 0.5;
  r.log_chernoff = std::log(0.5);
  r.optimal_t = 0.25;
  r.subspace_dim = 1;
  r.mc_estimate = 0.125;
  r.mc_samples = 8;
  r.mc_hits = 1;
  const std::string row = report::bound_csv_row("x,y", r);
  CHECK(row.rfind("\"x,y\",0.5,", 0) == 0);
  CHECK(row.substr(row.size() - 10) == ",0.125,8,1");
  const auto header_fields = io::split_csv_line(report::bound_csv_header());
  CHECK(io::split_csv_line(row).size() == header_fields.size());
}

TEST_CASE("write_json") {
  std::ostringstream os;
  report::write_json(os, Json{{"b", 1}, {"a", 2}});
  CHECK(os.str() == "{\n  \"b\": 1,\n  \"a\": 2\n}\n");
}

TEST_CASE("schema checker rejects bad records") {
  Json j = report::to_json(ConcavityCertificate{});
  j["extra"] = 1;
  CHECK_FALSE(validator().validate(schema_check::Json::parse(j.dump()), "certificate.schema.json").empty());
  Json k = report::to_json(ConcavityCertificate{});
  k["certificate"] = "maybe";
  CHECK_FALSE(validator().validate(schema_check::Json::parse(k.dump()), "certificate.schema.json").empty());
  Json m = report::to_json(ConcavityCertificate{});
  m.erase("margin");
  CHECK_FALSE(validator().validate(schema_check::Json::parse(m.dump()), "certificate.schema.json").empty());
}
