#include <ntkgp/dataio.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ntkgp {
namespace {

using nlohmann::json;

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

bool parse_double(const std::string& field, double& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  if (begin == end) return false;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

// Reads all lines, dropping trailing carriage returns and a final empty line.
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

double field_or_throw(const std::string& field, const std::string& path,
                      std::size_t row, std::size_t col) {
  double value = 0.0;
  if (!parse_double(field, value))
    throw IngestError(path + ": row " + std::to_string(row + 1) + ", column " +
                      std::to_string(col + 1) + ": not numeric: '" + field +
                      "'");
  return value;
}

}  // namespace

void write_record(const std::string& path, const ExperimentRecord& record) {
  json doc;
  doc["version"] = record.version;
  doc["experiment"] = record.experiment;
  doc["config"] = record.config;
  doc["hypers"] = record.hypers;
  doc["metrics"] = record.metrics;
  doc["elapsed_seconds"] = record.elapsed_seconds;
  doc["seed"] = record.seed;
  doc["artifacts"] = record.artifacts;
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

ExperimentRecord read_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& err) {
    throw IngestError(path + ": " + err.what());
  }
  try {
    ExperimentRecord record;
    record.version = doc.at("version").get<int>();
    if (record.version != 1)
      throw IngestError(path + ": unsupported record version " +
                        std::to_string(record.version));
    record.experiment = doc.at("experiment").get<std::string>();
    record.config = doc.at("config").get<std::string>();
    record.hypers = doc.at("hypers").get<std::map<std::string, double>>();
    record.metrics = doc.at("metrics").get<std::map<std::string, double>>();
    record.elapsed_seconds = doc.at("elapsed_seconds").get<double>();
    record.seed = doc.at("seed").get<std::uint64_t>();
    record.artifacts = doc.at("artifacts").get<std::vector<std::string>>();
    return record;
  } catch (const json::exception& err) {
    throw IngestError(path + ": " + err.what());
  }
}

void write_table(const std::string& path,
                 const std::vector<std::string>& columns,
                 const Matrix& values) {
  if (columns.empty())
    throw std::invalid_argument("write_table: need at least one column");
  if (values.cols() != static_cast<Eigen::Index>(columns.size()))
    throw std::invalid_argument("write_table: header/value column mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t j = 0; j < columns.size(); ++j)
    out << (j ? "," : "") << columns[j];
  out << '\n';
  char buffer[40];
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      std::snprintf(buffer, sizeof buffer, "%.17g", values(i, j));
      out << (j ? "," : "") << buffer;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

Dataset load_concrete(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw IngestError(path + ": empty file");

  // header detection: a first line with any non-numeric field is a header
  std::size_t first_row = 0;
  {
    double ignored = 0.0;
    for (const std::string& field : split_fields(lines[0]))
      if (!parse_double(field, ignored)) {
        first_row = 1;
        break;
      }
  }
  const std::size_t n = lines.size() - first_row;
  if (n == 0) throw IngestError(path + ": no data rows");

  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(n), 8);
  data.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t row = first_row + i;
    const std::vector<std::string> fields = split_fields(lines[row]);
    if (fields.size() != 9)
      throw IngestError(path + ": row " + std::to_string(row + 1) +
                        ": expected 9 fields, got " +
                        std::to_string(fields.size()));
    for (std::size_t j = 0; j < 8; ++j)
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          field_or_throw(fields[j], path, row, j);
    data.y[static_cast<Eigen::Index>(i)] =
        field_or_throw(fields[8], path, row, 8);
  }
  data.provenance = "concrete " + path + " n=" + std::to_string(n);
  return data;
}

Dataset load_fire(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.size() < 2) throw IngestError(path + ": need a header and data");

  const std::vector<std::string> header = split_fields(lines[0]);
  const std::vector<std::string> wanted{"temp", "RH", "wind", "rain", "area"};
  std::vector<std::size_t> where;
  for (const std::string& name : wanted) {
    std::size_t found = header.size();
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) {
        found = j;
        break;
      }
    if (found == header.size())
      throw IngestError(path + ": missing required column '" + name + "'");
    where.push_back(found);
  }

  const std::size_t n = lines.size() - 1;
  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(n), 4);
  data.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t row = i + 1;
    const std::vector<std::string> fields = split_fields(lines[row]);
    if (fields.size() != header.size())
      throw IngestError(path + ": row " + std::to_string(row + 1) +
                        ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(fields.size()));
    for (std::size_t k = 0; k < 4; ++k)
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          field_or_throw(fields[where[k]], path, row, where[k]);
    const double area = field_or_throw(fields[where[4]], path, row, where[4]);
    if (area < 0.0)
      throw IngestError(path + ": row " + std::to_string(row + 1) +
                        ": negative burned area");
    data.y[static_cast<Eigen::Index>(i)] = std::log1p(area);
  }
  data.provenance = "forest-fires " + path + " n=" + std::to_string(n);
  return data;
}

namespace {

void check_same_size(const VectorRef& a, const VectorRef& b,
                     const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(what) + ": size mismatch");
  if (a.size() == 0)
    throw std::invalid_argument(std::string(what) + ": empty input");
}

}  // namespace

double rmse(const VectorRef& a, const VectorRef& b) {
  check_same_size(a, b, "rmse");
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

double pearson(const VectorRef& a, const VectorRef& b) {
  check_same_size(a, b, "pearson");
  const double mean_a = a.mean();
  const double mean_b = b.mean();
  const Vector da = a.array() - mean_a;
  const Vector db = b.array() - mean_b;
  const double denom = da.norm() * db.norm();
  if (!(denom > 0.0))
    throw std::domain_error("pearson: constant input has no correlation");
  return da.dot(db) / denom;
}

double r_squared(const VectorRef& truth, const VectorRef& pred) {
  check_same_size(truth, pred, "r_squared");
  const double total = (truth.array() - truth.mean()).square().sum();
  if (!(total > 0.0))
    throw std::domain_error("r_squared: constant ground truth");
  return 1.0 - (truth - pred).squaredNorm() / total;
}

}  // namespace ntkgp
