#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bellopt/cli.hpp"
#include "bellopt/ga.hpp"
#include "bellopt/quantum.hpp"

namespace bellopt::cli {

using Json = nlohmann::ordered_json;

Json to_json(const Matrix& m);
Json to_json(const Vector& v);
Matrix matrix_from_json(const Json& j);

Json to_json(const EprConfiguration& cfg);
EprConfiguration configuration_from_json(const Json& j);

Json to_json(const CorrelationReport& r);
Json to_json(const SearchResult& r, const WeightMatrix& w, double target);

/// Column-oriented table used for csv and md output.
struct Table {
  std::vector<std::string> header;
  std::vector<Json> rows;  // each an array of scalars
};

/// Output document: the json form is always available; commands with a
/// natural tabular layout also provide a table for csv and md.
struct Document {
  std::string title;
  Json record;
  std::optional<Table> table;
};

std::string render(const Document& doc, Format format);

std::string format_scalar(const Json& v);

}  // namespace bellopt::cli
