#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bellopt/ga.hpp"
#include "bellopt/weights.hpp"

namespace bellopt::cli {

enum class Exit : int {
  ok = 0,
  target_missed = 1,
  config_error = 2,
  resource_limit = 3,
  numeric_failure = 4,
};

inline constexpr const char* kToolVersion = "0.3.0";

enum class Format { json, csv, md };

Format parse_format(const std::string& text);

/// Where the weight matrix of a run comes from.
struct WeightSource {
  enum class Kind { chsh, magic3, w00, bell, matrix, file };
  Kind kind = Kind::chsh;
  Index bell_order = 0;
  std::uint64_t bell_seed = 0;
  std::string matrix_text;  // inline form: rows separated by ';'
  std::string path;

  WeightMatrix load() const;
  std::string describe() const;
};

/// Key/value run description for `search`. Every key is optional except the
/// weight source and dims; unknown keys are rejected.
struct RunConfig {
  WeightSource weight;
  bool has_weight = false;
  EprDims dims;
  bool has_dims = false;
  GaConfig ga;
  SearchConstraint constraint;
  double target = 1e-5;  // allowed thm1 deviation for exit code 0
  Format format = Format::json;
  std::string out;
  unsigned threads = 1;
  bool timestamp = false;

  /// Canonical `key = value` lines, independent of the input layout.
  std::string canonical() const;
};

/// Parses the key/value form; `source` names the input in error messages.
RunConfig parse_run_config(std::string_view text, const std::string& source);

std::uint64_t fnv1a64(std::string_view data) noexcept;
std::string hex64(std::uint64_t v);

/// "1 1; 1 -1" style inline matrix.
Matrix parse_matrix_text(std::string_view text);

/// Weight file: first line `N_a N_b`, then N_a rows of N_b reals.
Matrix parse_weights_text(std::string_view text, const std::string& source);
Matrix read_weights_file(const std::string& path);
std::string format_weights_text(const Matrix& m);

/// Runs one command line (without the program name). Output goes to `out`
/// unless a command writes a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace bellopt::cli
