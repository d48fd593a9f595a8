#pragma once

// JSON records and CSV summary rows for solver results, concavity reports,
// ensemble experiments and dissimilarity runs. Key order is fixed.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccgm/concavity.hpp"
#include "ccgm/ensemble.hpp"
#include "ccgm/pipeline.hpp"
#include "ccgm/solver.hpp"

namespace ccgm::report {

using Json = nlohmann::ordered_json;

/// NaN and infinities become null.
Json number(double v);

Json to_json(const SolverResult<double>& r);
Json to_json(const ConcavityCertificate& c);
Json to_json(const BoundReport& r);
Json to_json(const SpectrumTemplate& t);
Json to_json(const EnsembleReport& r);
Json to_json(const DissimilarityMatrix& d);

/// Inverse of to_json for the report types a later command consumes.
BoundReport bound_report_from_json(const Json& j);
EnsembleReport ensemble_report_from_json(const Json& j);

/// Mean and population standard deviation; NaN entries are skipped.
struct Summary {
  double mean = 0, std = 0;
  std::size_t count = 0;
};
Summary summarize(const std::vector<double>& values);

std::string bound_csv_header();
std::string bound_csv_row(const std::string& label, const BoundReport& r);

std::string ensemble_csv_header();
std::string ensemble_csv_row(const EnsembleReport& r);

/// Two-space indentation, trailing newline.
void write_json(std::ostream& out, const Json& j);

}  // namespace ccgm::report
