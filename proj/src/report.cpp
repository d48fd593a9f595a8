#include "ccgm/report.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "ccgm/errors.hpp"
#include "ccgm/io.hpp"

namespace ccgm::report {
namespace {

double get_number(const Json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const SolverResult<double>& r) {
  Json j;
  j["kind"] = to_string(r.X.kind);
  Json assignment = Json::array();
  if (r.is_vertex)
    for (int c : assignment_of(r.X)) assignment.push_back(c);
  else
    assignment = nullptr;
  j["assignment"] = assignment;
  j["energy"] = number(r.energy);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["is_vertex"] = r.is_vertex;
  Json trace = Json::array();
  for (const auto& t : r.trace) trace.push_back(Json{{"energy", number(t.energy)}, {"step", number(t.step)}});
  j["trace"] = trace;
  return j;
}

Json to_json(const ConcavityCertificate& c) {
  Json j;
  j["certificate"] = c.concave ? "concave" : "indefinite";
  j["margin"] = number(c.margin);
  j["max_eigenvalue"] = number(c.max_eigenvalue);
  j["min_eigenvalue"] = number(c.min_eigenvalue);
  j["nonnegative_count"] = c.positive_count;
  j["dimension"] = c.dimension;
  return j;
}

Json to_json(const BoundReport& r) {
  Json j;
  j["chernoff_value"] = number(r.chernoff_value);
  j["log_chernoff"] = number(r.log_chernoff);
  j["optimal_t"] = number(r.optimal_t);
  j["subspace_dim"] = r.subspace_dim;
  j["epsilon_hat"] = number(r.epsilon_hat());
  j["mc_estimate"] = number(r.mc_estimate);
  j["mc_samples"] = r.mc_samples;
  j["mc_hits"] = r.mc_hits;
  return j;
}

Json to_json(const SpectrumTemplate& t) {
  Json j;
  j["m"] = t.m;
  j["p"] = t.p;
  j["pos_bound"] = t.pos_bound;
  j["neg_bound"] = t.neg_bound;
  j["mode"] = t.mode == SpectrumMode::Fixed ? "fixed" : "sampled";
  return j;
}

Json to_json(const EnsembleReport& r) {
  Json j;
  j["spectrum"] = to_json(r.spectrum);
  j["n"] = r.n;
  j["trials"] = r.trials;
  j["vertex_count"] = r.vertex_count;
  j["vertex_fraction"] = r.vertex_fraction();
  j["converged_count"] = r.converged_count;
  j["mean_iterations"] = r.mean_iterations;
  Json hist = Json::array();
  for (const auto& [dim, count] : r.face_histogram) hist.push_back(Json{{"face_dimension", dim}, {"count", count}});
  j["face_histogram"] = hist;
  return j;
}

Json to_json(const DissimilarityMatrix& d) {
  Json j;
  j["labels"] = d.labels;
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < d.values.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < d.values.cols(); ++k) row.push_back(number(d.values(i, k)));
    rows.push_back(row);
  }
  j["values"] = rows;
  Json fails = Json::array();
  for (const auto& f : d.failures) fails.push_back(Json{{"first", f.first}, {"second", f.second}, {"message", f.message}});
  j["failures"] = fails;
  return j;
}

BoundReport bound_report_from_json(const Json& j) {
  try {
    BoundReport r;
    r.chernoff_value = get_number(j, "chernoff_value");
    r.log_chernoff = get_number(j, "log_chernoff");
    r.optimal_t = get_number(j, "optimal_t");
    r.subspace_dim = j.at("subspace_dim").get<int>();
    r.mc_estimate = get_number(j, "mc_estimate");
    r.mc_samples = j.at("mc_samples").get<std::uint64_t>();
    r.mc_hits = j.at("mc_hits").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("malformed bound report: ") + e.what());
  }
}

EnsembleReport ensemble_report_from_json(const Json& j) {
  try {
    EnsembleReport r;
    const auto& s = j.at("spectrum");
    r.spectrum.m = s.at("m").get<Eigen::Index>();
    r.spectrum.p = s.at("p").get<double>();
    r.spectrum.pos_bound = s.at("pos_bound").get<double>();
    r.spectrum.neg_bound = s.at("neg_bound").get<double>();
    r.spectrum.mode = s.at("mode").get<std::string>() == "sampled" ? SpectrumMode::Sampled : SpectrumMode::Fixed;
    r.n = j.at("n").get<Eigen::Index>();
    r.trials = j.at("trials").get<int>();
    r.vertex_count = j.at("vertex_count").get<int>();
    r.converged_count = j.at("converged_count").get<int>();
    r.mean_iterations = j.at("mean_iterations").get<double>();
    for (const auto& h : j.at("face_histogram"))
      r.face_histogram[h.at("face_dimension").get<int>()] = h.at("count").get<int>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("malformed ensemble report: ") + e.what());
  }
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  double sum = 0, sq = 0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    ++s.count;
    sum += v;
  }
  if (s.count == 0) {
    s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = sum / static_cast<double>(s.count);
  for (double v : values)
    if (!std::isnan(v)) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(s.count));
  return s;
}

std::string bound_csv_header() {
  return "label,chernoff_value,log_chernoff,optimal_t,subspace_dim,epsilon_hat,mc_estimate,mc_samples,mc_hits";
}

std::string bound_csv_row(const std::string& label, const BoundReport& r) {
  std::ostringstream os;
  os << io::csv_field(label) << ',' << io::format_double(r.chernoff_value) << ','
     << io::format_double(r.log_chernoff) << ',' << io::format_double(r.optimal_t) << ',' << r.subspace_dim << ','
     << io::format_double(r.epsilon_hat()) << ',' << io::format_double(r.mc_estimate) << ',' << r.mc_samples << ','
     << r.mc_hits;
  return os.str();
}

std::string ensemble_csv_header() {
  return "m,p,pos_bound,neg_bound,mode,n,trials,vertex_count,vertex_fraction,converged_count,mean_iterations,"
         "face_histogram";
}

std::string ensemble_csv_row(const EnsembleReport& r) {
  std::ostringstream hist;
  bool first = true;
  for (const auto& [dim, count] : r.face_histogram) {
    hist << (first ? "" : ";") << dim << ':' << count;
    first = false;
  }
  std::ostringstream os;
  os << r.spectrum.m << ',' << io::format_double(r.spectrum.p) << ',' << io::format_double(r.spectrum.pos_bound)
     << ',' << io::format_double(r.spectrum.neg_bound) << ','
     << (r.spectrum.mode == SpectrumMode::Fixed ? "fixed" : "sampled") << ',' << r.n << ',' << r.trials << ','
     << r.vertex_count << ',' << io::format_double(r.vertex_fraction()) << ',' << r.converged_count << ','
     << io::format_double(r.mean_iterations) << ',' << io::csv_field(hist.str());
  return os.str();
}

void write_json(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

}  // namespace ccgm::report
