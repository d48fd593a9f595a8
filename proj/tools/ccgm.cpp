// ccgm: command-line front end.
//
//   ccgm match            --affinity A [--affinity B] ...
//   ccgm concavity-check  --affinity A [--affinity B ...]
//   ccgm bound            --eigenvalues 1,-1,-1 | --m M --p P ...
//   ccgm ensemble         --n N --p P ...
//   ccgm dissimilarity    --affinity S1 --affinity S2 ...
//   ccgm embed            --input D.csv --k 2
//
// Exit codes: 0 ok, 1 usage, 2 input, 3 numerical.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccgm/affinity.hpp"
#include "ccgm/concavity.hpp"
#include "ccgm/energy.hpp"
#include "ccgm/ensemble.hpp"
#include "ccgm/errors.hpp"
#include "ccgm/io.hpp"
#include "ccgm/parallel.hpp"
#include "ccgm/pipeline.hpp"
#include "ccgm/report.hpp"
#include "ccgm/solver.hpp"

namespace fs = std::filesystem;
using namespace ccgm;
using report::Json;

namespace {

enum class EnergyKind { E2, OneSided, E1 };

struct RunConfig {
  std::vector<std::string> inputs;
  std::vector<std::string> labels;
  std::string input_type = "auto";
  std::string kernel = "distance";
  std::vector<std::string> kernel_params;
  std::string polytope;
  std::string energy = "E2";
  std::string linear;
  int restarts = 10;
  int anchors = 3;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_iters = 500;
  std::uint64_t samples = 10000;
  int d = 1;
  std::string out;
  std::string format;
  unsigned threads = 0;
  bool no_row_decoupling = false;
  std::string method = "spectral";

  // bound / ensemble
  std::string eigenvalues;
  Eigen::Index m = 0;
  Eigen::Index n = 8;
  double p = 0.3;
  double a = 1, b = 1;
  std::string mode = "fixed";
  int trials = 200;

  // embed
  std::string matrix;
  Eigen::Index k = 2;
};

KernelSpec kernel_from(const RunConfig& cfg) {
  KernelSpec spec = KernelSpec::parse(cfg.kernel);
  for (const auto& kv : cfg.kernel_params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw invalid_argument("--kernel-param expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw invalid_argument("--kernel-param " + key + ": '" + value + "' is not a number");
    }
    if (key == "c")
      spec.c = v;
    else if (key == "beta")
      spec.beta = v;
    else if (key == "tau")
      spec.tau = v;
    else if (key == "gamma")
      spec.gamma = v;
    else if (key == "scale")
      spec.scale = v;
    else if (key == "c30-squared")
      spec.c30_squared_form = v != 0;
    else
      throw invalid_argument("unknown kernel parameter '" + key + "'");
  }
  spec.validate();
  return spec;
}

std::string resolve_input_type(const RunConfig& cfg, const fs::path& path) {
  if (cfg.input_type != "auto") return cfg.input_type;
  std::string ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (ext == ".off") return "mesh";
  if (ext == ".edges" || ext == ".graph") return "graph";
  return "points";
}

/// Reads one input and applies the kernel. Validation failures of file
/// contents are input errors.
AffinityMatrix load_affinity(const RunConfig& cfg, const std::string& file, const KernelSpec& spec,
                             unsigned threads) {
  const fs::path path(file);
  if (!fs::exists(path)) throw input_error("input '" + file + "' does not exist");
  const std::string type = resolve_input_type(cfg, path);
  const bool spherical = spec.kind == KernelKind::SphericalDistance || spec.kind == KernelKind::SphericalGaussian;
  AffinityMatrix D;
  try {
    if (type == "points") {
      const PointCloud cloud = io::read_point_cloud(path);
      cloud.validate();
      D = spherical ? spherical_distances(cloud, 1.0) : pairwise_euclidean(cloud);
    } else if (type == "mesh") {
      D = geodesic_distances(mesh_to_graph(io::read_off(path)), threads);
    } else if (type == "graph") {
      D = geodesic_distances(io::read_edge_list(path), threads);
    } else if (type == "distances" || type == "affinity") {
      const Eigen::MatrixXd M = io::read_matrix_csv(path);
      if (M.rows() != M.cols()) throw input_error("matrix must be square");
      if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff()))
        throw input_error("matrix must be symmetric");
      if (type == "affinity") {
        if (spec.kind != KernelKind::Distance) throw invalid_argument("--input-type affinity takes no kernel");
        return {M, Provenance::Other, "affinity"};
      }
      D = {M, Provenance::Distance, "distances"};
    } else {
      throw invalid_argument("unknown input type '" + type + "'");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument && type != "points" && type != "mesh" && type != "graph" &&
        type != "distances")
      throw;
    throw input_error(file + ": " + e.what());
  }
  return apply_kernel(D, spec);
}

std::vector<AffinityMatrix> load_inputs(const RunConfig& cfg, unsigned threads) {
  if (cfg.inputs.empty()) throw invalid_argument("at least one --affinity input is required");
  const KernelSpec spec = kernel_from(cfg);
  std::vector<AffinityMatrix> out;
  for (const auto& f : cfg.inputs) out.push_back(load_affinity(cfg, f, spec, threads));
  return out;
}

EnergyKind energy_kind(const std::string& s) {
  if (s == "E2" || s == "e2") return EnergyKind::E2;
  if (s == "onesided" || s == "one-sided") return EnergyKind::OneSided;
  if (s == "E1" || s == "e1") return EnergyKind::E1;
  throw invalid_argument("unknown energy '" + s + "' (E2, onesided, E1)");
}

PolytopeKind polytope_kind(const RunConfig& cfg, EnergyKind e) {
  const PolytopeKind implied = e == EnergyKind::OneSided ? PolytopeKind::OneSided : PolytopeKind::Permutation;
  if (cfg.polytope.empty()) return implied;
  PolytopeKind k;
  if (cfg.polytope == "permutation" || cfg.polytope == "ds")
    k = PolytopeKind::Permutation;
  else if (cfg.polytope == "one-sided" || cfg.polytope == "onesided")
    k = PolytopeKind::OneSided;
  else
    throw invalid_argument("unknown polytope '" + cfg.polytope + "' (permutation, one-sided)");
  if (k != implied) throw invalid_argument("--energy " + cfg.energy + " requires --polytope " + to_string(implied));
  return k;
}

KroneckerHessian<double> build_hessian(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, EnergyKind e,
                                       const RunConfig& cfg) {
  if (e != EnergyKind::OneSided && A.rows() != B.rows())
    throw invalid_argument("permutation matching needs inputs of equal size (" + std::to_string(A.rows()) + " vs " +
                           std::to_string(B.rows()) + ")");
  auto h = e == EnergyKind::OneSided ? hessian_onesided(A, B) : hessian_E2(A, B);
  if (!cfg.linear.empty()) {
    Eigen::MatrixXd lin;
    try {
      lin = io::read_matrix_csv(cfg.linear);
    } catch (const Error& err) {
      throw input_error(cfg.linear + ": " + err.what());
    }
    if (lin.rows() != h.rows() || lin.cols() != h.cols()) throw input_error("--linear has the wrong shape");
    h.set_linear(lin);
  }
  return h;
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig s;
  s.max_iters = cfg.max_iters;
  s.stationarity_tol = cfg.tol;
  s.seed = cfg.seed;
  s.row_decoupling = !cfg.no_row_decoupling;
  s.validate();
  return s;
}

std::string output_format(const RunConfig& cfg, const std::string& fallback) {
  const std::string f = cfg.format.empty() ? fallback : cfg.format;
  if (f != "json" && f != "csv") throw invalid_argument("--format must be json or csv");
  return f;
}

/// Writes to --out, or stdout when absent.
void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw input_error("cannot write '" + cfg.out + "'");
  f << text;
}

std::string json_text(const Json& j) {
  std::ostringstream os;
  report::write_json(os, j);
  return os.str();
}

/// Human-readable lines go to stdout unless stdout carries the report.
std::ostream& status(const RunConfig& cfg) { return cfg.out.empty() ? std::cerr : std::cout; }

int cmd_match(const RunConfig& cfg) {
  const unsigned threads = resolve_threads(cfg.threads);
  const auto inputs = load_inputs(cfg, threads);
  if (inputs.size() > 2) throw invalid_argument("match takes one or two --affinity inputs");
  const EnergyKind e = energy_kind(cfg.energy);
  const PolytopeKind kind = polytope_kind(cfg, e);
  const Eigen::MatrixXd& A = inputs[0].values;
  const Eigen::MatrixXd& B = inputs.size() > 1 ? inputs[1].values : inputs[0].values;
  const auto h = build_hessian(A, B, e, cfg);
  const int anchors = static_cast<int>(std::min<Eigen::Index>(cfg.anchors, std::min(h.rows(), h.cols())));
  const auto best = multi_start(h, kind, anchors, cfg.restarts, solver_config(cfg), threads);
  const auto& r = best.best;

  Json j;
  j["command"] = "match";
  j["energy_kind"] = cfg.energy;
  j["polytope"] = to_string(kind);
  j["kernel"] = inputs[0].label;
  j["seed"] = cfg.seed;
  j["restarts"] = cfg.restarts;
  j["anchors"] = anchors;
  j["best_restart"] = best.best_restart;
  j["result"] = report::to_json(r);
  std::optional<double> e1;
  if (kind == PolytopeKind::Permutation && r.is_vertex) e1 = energy_E1(A, B, r.X.entries);
  j["e1"] = e1 ? report::number(*e1) : Json(nullptr);

  if (output_format(cfg, "json") == "json") {
    emit(cfg, json_text(j));
  } else {
    std::ostringstream os;
    os << "energy,e1,iterations,converged,is_vertex,assignment\n";
    std::ostringstream assignment;
    if (r.is_vertex) {
      const auto cols = assignment_of(r.X);
      for (std::size_t i = 0; i < cols.size(); ++i) assignment << (i ? ";" : "") << cols[i];
    }
    os << io::format_double(r.energy) << ',' << (e1 ? io::format_double(*e1) : "") << ',' << r.iterations << ','
       << (r.converged ? "true" : "false") << ',' << (r.is_vertex ? "true" : "false") << ','
       << io::csv_field(assignment.str()) << '\n';
    emit(cfg, os.str());
  }
  status(cfg) << "energy " << io::format_double(r.energy) << "\nis_vertex " << (r.is_vertex ? "true" : "false")
              << '\n';
  return 0;
}

int cmd_concavity_check(const RunConfig& cfg) {
  const unsigned threads = resolve_threads(cfg.threads);
  const auto inputs = load_inputs(cfg, threads);
  const EnergyKind e = energy_kind(cfg.energy);
  const PolytopeKind kind = polytope_kind(cfg, e);
  if (cfg.samples < 1) throw invalid_argument("--samples must be >= 1");
  const SamplingMethod method = cfg.method == "direct" ? SamplingMethod::Direct : SamplingMethod::Spectral;
  if (cfg.method != "direct" && cfg.method != "spectral") throw invalid_argument("--method must be direct or spectral");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (inputs.size() == 1) pairs.push_back({0, 0});
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (std::size_t k = i + 1; k < inputs.size(); ++k) pairs.push_back({i, k});

  auto label = [&](std::size_t i) {
    return i < cfg.labels.size() ? cfg.labels[i] : fs::path(cfg.inputs[i]).filename().string();
  };

  Json records = Json::array();
  std::vector<double> bounds, empirical;
  std::ostringstream csv;
  csv << "first,second,certificate," << report::bound_csv_header().substr(6) << '\n';
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto [i, k] = pairs[pi];
    const auto h = build_hessian(inputs[i].values, inputs[k].values, e, cfg);
    const PolytopeDescriptor desc{kind, h.rows(), h.cols()};
    Json rec;
    rec["first"] = label(i);
    rec["second"] = label(k);
    std::optional<ConcavityCertificate> cert;
    try {
      cert = certify_conditional_concavity(h, desc);
    } catch (const SizeLimitError&) {
    }
    rec["certificate"] = cert ? report::to_json(*cert) : Json(nullptr);
    MonteCarloOptions mc{cfg.d, cfg.samples, derive_seed(cfg.seed, pi), threads};
    const BoundReport br =
        mc_convexity_probability(h, desc, mc, cert ? method : SamplingMethod::Direct);
    rec["bound"] = report::to_json(br);
    records.push_back(rec);
    bounds.push_back(br.chernoff_value);
    empirical.push_back(br.mc_estimate);
    const std::string row = report::bound_csv_row("", br);
    csv << io::csv_field(label(i)) << ',' << io::csv_field(label(k)) << ','
        << (cert ? (cert->concave ? "concave" : "indefinite") : "") << row << '\n';
    status(cfg) << label(i) << " / " << label(k) << ": "
                << (cert ? (cert->concave ? "concave" : "indefinite") : "uncertified") << ", bound "
                << io::format_double(br.chernoff_value) << ", empirical " << br.mc_hits << '/' << br.mc_samples
                << '\n';
  }
  const auto bs = report::summarize(bounds), es = report::summarize(empirical);
  Json j;
  j["command"] = "concavity-check";
  j["energy_kind"] = cfg.energy;
  j["polytope"] = to_string(kind);
  j["kernel"] = inputs[0].label;
  j["subspace_dim"] = cfg.d;
  j["samples"] = cfg.samples;
  j["seed"] = cfg.seed;
  j["pairs"] = records;
  j["summary"] = Json{{"bound_mean", report::number(bs.mean)},
                      {"bound_std", report::number(bs.std)},
                      {"empirical_mean", report::number(es.mean)},
                      {"empirical_std", report::number(es.std)}};
  emit(cfg, output_format(cfg, "json") == "json" ? json_text(j) : csv.str());
  return 0;
}

Eigen::VectorXd parse_eigenvalues(const std::string& text) {
  std::vector<double> vals;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(cur, &used));
      if (used != cur.size()) throw std::invalid_argument(cur);
    } catch (const std::exception&) {
      throw invalid_argument("--eigenvalues: '" + cur + "' is not a number");
    }
  }
  if (vals.empty()) throw invalid_argument("--eigenvalues is empty");
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

SpectrumTemplate template_from(const RunConfig& cfg, Eigen::Index m) {
  SpectrumTemplate t;
  t.m = m;
  t.p = cfg.p;
  t.pos_bound = cfg.a;
  t.neg_bound = cfg.b;
  if (cfg.mode == "fixed")
    t.mode = SpectrumMode::Fixed;
  else if (cfg.mode == "sampled")
    t.mode = SpectrumMode::Sampled;
  else
    throw invalid_argument("--mode must be fixed or sampled");
  t.validate();
  return t;
}

int cmd_bound(const RunConfig& cfg) {
  const unsigned threads = resolve_threads(cfg.threads);
  if (cfg.d < 1) throw invalid_argument("--d must be >= 1");
  Json j;
  j["command"] = "bound";
  Eigen::VectorXd lam;
  std::optional<SpectrumTemplate> tpl;
  if (!cfg.eigenvalues.empty()) {
    lam = parse_eigenvalues(cfg.eigenvalues);
    j["source"] = "eigenvalues";
  } else {
    if (cfg.m < 1) throw invalid_argument("bound needs --eigenvalues or a template (--m, --p, --a, --b)");
    tpl = template_from(cfg, cfg.m);
    auto rng = make_rng(cfg.seed);
    lam = tpl->eigenvalues(rng);
    j["source"] = "template";
    j["template"] = report::to_json(*tpl);
  }
  BoundReport br;
  if (cfg.samples > 0) {
    br = mc_convexity_probability_spectral(lam, MonteCarloOptions{cfg.d, cfg.samples, cfg.seed, threads});
  } else {
    br = detail::finish_report(lam, cfg.d, 0, 0);
  }
  j["report"] = report::to_json(br);
  std::optional<double> closed;
  if (tpl && tpl->mode == SpectrumMode::Fixed && tpl->p > 0 && tpl->pos_bound <= tpl->neg_bound) {
    const double lb = closed_form_log_bound(*tpl);
    j["closed_form_log_bound"] = report::number(lb);
    j["closed_form_bound"] = report::number(std::exp(lb));
    closed = std::exp(lb);
  } else {
    j["closed_form_log_bound"] = nullptr;
    j["closed_form_bound"] = nullptr;
  }
  if (output_format(cfg, "json") == "json") {
    emit(cfg, json_text(j));
  } else {
    emit(cfg, report::bound_csv_header() + ",closed_form_bound\n" + report::bound_csv_row(j["source"], br) + ',' +
                  (closed ? io::format_double(*closed) : "") + '\n');
  }
  status(cfg) << "bound " << io::format_double(br.chernoff_value) << "\nt " << io::format_double(br.optimal_t)
              << '\n';
  return 0;
}

int cmd_ensemble(const RunConfig& cfg) {
  if (cfg.n < 2) throw invalid_argument("--n must be >= 2");
  const SpectrumTemplate tpl = template_from(cfg, (cfg.n - 1) * (cfg.n - 1));
  EnsembleOptions opt;
  opt.trials = cfg.trials;
  opt.seed = cfg.seed;
  opt.solver = solver_config(cfg);
  opt.threads = resolve_threads(cfg.threads);
  const auto rep = vertex_local_minima_experiment(tpl, cfg.n, opt);
  if (output_format(cfg, "json") == "json") {
    Json j;
    j["command"] = "ensemble";
    j["seed"] = cfg.seed;
    j["report"] = report::to_json(rep);
    emit(cfg, json_text(j));
  } else {
    emit(cfg, report::ensemble_csv_header() + '\n' + report::ensemble_csv_row(rep) + '\n');
  }
  status(cfg) << "vertex_fraction " << io::format_double(rep.vertex_fraction()) << '\n';
  return 0;
}

int cmd_dissimilarity(const RunConfig& cfg) {
  const unsigned threads = resolve_threads(cfg.threads);
  const auto inputs = load_inputs(cfg, threads);
  const EnergyKind e = energy_kind(cfg.energy);
  if (!cfg.linear.empty()) throw invalid_argument("dissimilarity takes no --linear term");
  std::vector<CorpusItem> corpus;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    corpus.push_back({i < cfg.labels.size() ? cfg.labels[i] : fs::path(cfg.inputs[i]).stem().string(),
                      inputs[i].values});
  DissimilaritySettings s;
  s.kind = polytope_kind(cfg, e);
  s.anchors = cfg.anchors;
  s.restarts = cfg.restarts;
  s.solver = solver_config(cfg);
  s.threads = threads;
  const auto D = all_pairs_dissimilarity(corpus, s);
  for (const auto& f : D.failures) std::cerr << "pair " << f.first << " / " << f.second << " failed: " << f.message << '\n';
  if (output_format(cfg, "csv") == "json") {
    emit(cfg, json_text(report::to_json(D)));
  } else {
    std::ostringstream os;
    io::write_labelled_matrix(os, {D.labels, D.values});
    emit(cfg, os.str());
  }
  return D.failures.empty() ? 0 : 3;
}

int cmd_embed(const RunConfig& cfg) {
  if (cfg.matrix.empty()) throw invalid_argument("embed needs --input");
  if (!fs::exists(cfg.matrix)) throw input_error("input '" + cfg.matrix + "' does not exist");
  io::LabelledMatrix D;
  try {
    D = io::read_labelled_matrix(cfg.matrix);
  } catch (const Error& err) {
    throw input_error(cfg.matrix + ": " + err.what());
  }
  if (!D.values.allFinite()) throw input_error(cfg.matrix + ": dissimilarity matrix has missing entries");
  const Eigen::MatrixXd X = classical_mds(D.values, cfg.k);
  if (output_format(cfg, "csv") == "json") {
    Json j;
    j["labels"] = D.labels;
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < X.cols(); ++c) row.push_back(report::number(X(i, c)));
      rows.push_back(row);
    }
    j["coordinates"] = rows;
    emit(cfg, json_text(j));
  } else {
    std::ostringstream os;
    io::write_embedding(os, D.labels, X);
    emit(cfg, os.str());
  }
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return 1;
    case ErrorKind::Input: return 2;
    case ErrorKind::Numerical: return 3;
  }
  return 3;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, "random seed");
  sub->add_option("--out", cfg.out, "output file (default stdout)");
  sub->add_option("--format", cfg.format, "json or csv");
  sub->add_option("--threads", cfg.threads, "worker threads (default CCGM_THREADS or all cores)");
}

void add_inputs(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--affinity", cfg.inputs, "input file: point cloud (.csv/.xyz), mesh (.off), edge list")->required();
  sub->add_option("--label", cfg.labels, "label per input (default file name)");
  sub->add_option("--input-type", cfg.input_type, "auto, points, mesh, graph, distances, affinity");
  sub->add_option("--kernel", cfg.kernel, "distance, squared, multiquadric, gaussian, c30, c31, spherical-distance, spherical-gaussian");
  sub->add_option("--kernel-param", cfg.kernel_params, "key=value: c, beta, tau, gamma, scale, c30-squared");
  sub->add_option("--energy", cfg.energy, "E2, onesided, E1");
  sub->add_option("--polytope", cfg.polytope, "permutation or one-sided (default implied by --energy)");
  sub->add_option("--linear", cfg.linear, "CSV linear term a (n x n0)");
}

void add_solver(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--restarts", cfg.restarts, "multi-start restarts");
  sub->add_option("--anchors", cfg.anchors, "random anchor pairs per restart");
  sub->add_option("--tol", cfg.tol, "relative Frank-Wolfe gap tolerance");
  sub->add_option("--max-iters", cfg.max_iters, "iteration cap per solve");
  sub->add_flag("--no-row-decoupling", cfg.no_row_decoupling, "concave search on the raw Hessian");
}

void add_template(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--p", cfg.p, "positive eigenvalue fraction, [0, 1/2)");
  sub->add_option("--a", cfg.a, "positive eigenvalue bound");
  sub->add_option("--b", cfg.b, "negative eigenvalue bound");
  sub->add_option("--mode", cfg.mode, "fixed or sampled");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph matching over matching polytopes with concavity certificates"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* match = app.add_subcommand("match", "solve a matching by multi-start Frank-Wolfe");
  add_inputs(match, cfg);
  add_solver(match, cfg);
  add_common(match, cfg);

  auto* check = app.add_subcommand("concavity-check", "certificate, Chernoff bound and Monte-Carlo estimate");
  add_inputs(check, cfg);
  check->add_option("--samples", cfg.samples, "Monte-Carlo samples");
  check->add_option("--d", cfg.d, "subspace dimension");
  check->add_option("--method", cfg.method, "spectral or direct sampling");
  add_common(check, cfg);

  auto* bound = app.add_subcommand("bound", "Chernoff bound of a spectrum or a spectrum template");
  bound->add_option("--eigenvalues", cfg.eigenvalues, "comma-separated eigenvalues");
  bound->add_option("--m", cfg.m, "template dimension");
  add_template(bound, cfg);
  bound->add_option("--d", cfg.d, "subspace dimension");
  bound->add_option("--samples", cfg.samples, "Monte-Carlo samples (0 disables)")->default_val(0);
  add_common(bound, cfg);

  auto* ensemble = app.add_subcommand("ensemble", "vertex fraction of Frank-Wolfe limits for random Hessians");
  ensemble->add_option("--n", cfg.n, "matrix size, m = (n-1)^2");
  add_template(ensemble, cfg);
  ensemble->add_option("--trials", cfg.trials, "number of random Hessians");
  ensemble->add_option("--tol", cfg.tol, "relative Frank-Wolfe gap tolerance");
  ensemble->add_option("--max-iters", cfg.max_iters, "iteration cap per solve");
  add_common(ensemble, cfg);

  auto* dis = app.add_subcommand("dissimilarity", "all-pairs matching dissimilarity over a corpus");
  add_inputs(dis, cfg);
  add_solver(dis, cfg);
  add_common(dis, cfg);

  auto* embed = app.add_subcommand("embed", "classical MDS of a dissimilarity matrix");
  embed->add_option("--input", cfg.matrix, "labelled dissimilarity CSV")->required();
  embed->add_option("--k", cfg.k, "target dimension");
  add_common(embed, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*match) return cmd_match(cfg);
    if (*check) return cmd_concavity_check(cfg);
    if (*bound) return cmd_bound(cfg);
    if (*ensemble) return cmd_ensemble(cfg);
    if (*dis) return cmd_dissimilarity(cfg);
    if (*embed) return cmd_embed(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
