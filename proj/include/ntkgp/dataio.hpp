#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <ntkgp/datagen.hpp>

// Durable artifacts and external data: experiment records (JSON), numeric
// tables (CSV), loaders for the two real benchmark datasets, and the three
// evaluation metrics the experiments report.
namespace ntkgp {

/// A malformed, missing, or schema-incompatible input file.
struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One completed run: what was asked (`config` is a flat key=value line;
/// written one pair per line under an `[experiment]` section it replays
/// through the CLI's --config), what came out, and where side files went.
struct ExperimentRecord {
  int version = 1;
  std::string experiment;
  std::string config;
  std::map<std::string, double> hypers;
  std::map<std::string, double> metrics;
  double elapsed_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;
};

/// Serializes the record as pretty-printed JSON (keys sorted, so output is
/// byte-stable). Throws std::runtime_error when the file cannot be written.
void write_record(const std::string& path, const ExperimentRecord& record);

/// Reads a record back; wrong schema version, unparsable JSON, or a missing
/// file raise IngestError.
[[nodiscard]] ExperimentRecord read_record(const std::string& path);

/// Writes a CSV table: one header row, then values formatted %.17g (lossless
/// double round trip), LF line endings. `values` must have one column per
/// header entry.
void write_table(const std::string& path,
                 const std::vector<std::string>& columns, const Matrix& values);

/// Concrete compressive-strength table: comma-separated, exactly 9 numeric
/// columns (8 mixture/age features, strength last), an optional header row
/// (auto-detected). Returns features in x and strength in y. Any field that
/// fails to parse raises IngestError naming the row and column.
[[nodiscard]] Dataset load_concrete(const std::string& path);

/// Forest-fires table: header row required; keeps the temp, RH, wind, and
/// rain columns as features and regresses log(area + 1). A missing required
/// column raises IngestError.
[[nodiscard]] Dataset load_fire(const std::string& path);

/// Root-mean-square difference. Sizes must match and be nonzero.
[[nodiscard]] double rmse(const VectorRef& a, const VectorRef& b);

/// Pearson correlation; either input being constant is a domain error.
[[nodiscard]] double pearson(const VectorRef& a, const VectorRef& b);

/// Coefficient of determination 1 - SS_res/SS_tot against ground truth
/// `truth`; constant truth (zero total sum of squares) is a domain error.
[[nodiscard]] double r_squared(const VectorRef& truth, const VectorRef& pred);

}  // namespace ntkgp
