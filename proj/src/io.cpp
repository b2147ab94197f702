#include "csel/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace csel {
namespace {

static_assert(std::endian::native == std::endian::little, "binary matrix I/O assumes a little-endian host");

bool parse_double(std::string_view field, double& out) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
  return s.substr(start);
}

bool has_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char head[sizeof kBinaryMagic] = {};
  in.read(head, sizeof head);
  return in.gcount() == static_cast<std::streamsize>(sizeof head) &&
         std::memcmp(head, kBinaryMagic, sizeof head) == 0;
}

Dataset load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  char head[sizeof kBinaryMagic];
  std::uint64_t dims[2] = {0, 0};
  in.read(head, sizeof head);
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in) throw DataError(path + ": truncated binary header");
  const std::uint64_t n = dims[0];
  const std::uint64_t d = dims[1];
  const auto payload = std::filesystem::file_size(path) - sizeof head - sizeof dims;
  if (n == 0 || d == 0 || n > payload / 8 / d || n * d * 8 != payload) {
    throw DataError(path + ": declared " + std::to_string(n) + "x" + std::to_string(d) +
                    " does not match payload of " + std::to_string(payload) + " bytes");
  }
  MatrixXd m(static_cast<Index>(n), static_cast<Index>(d));
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(payload));
  if (!in) throw DataError(path + ": short read");
  return Dataset(std::move(m));
}

MatrixXd to_matrix(const CsvTable& table, const std::string& path) {
  if (table.rows.empty()) throw DataError(path + ": no data rows");
  const auto d = static_cast<Index>(table.rows.front().size());
  MatrixXd m(static_cast<Index>(table.rows.size()), d);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (Index j = 0; j < d; ++j) m(static_cast<Index>(i), j) = table.rows[i][static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace

std::string format_real(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size() && numeric; ++j) numeric = parse_double(fields[j], values[j]);
    if (!numeric) {
      if (table.rows.empty() && table.header.empty()) {
        for (const auto& f : fields) table.header.push_back(strip(f));
        width = fields.size();
        continue;
      }
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed numeric row");
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw DataError(path + ":" + std::to_string(lineno) + ": non-finite value");
    }
    if (width == 0) width = values.size();
    if (values.size() != width) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) + " columns, got " +
                      std::to_string(values.size()));
    }
    table.rows.push_back(std::move(values));
  }
  return table;
}

Dataset load_matrix(const std::string& path) {
  if (!std::filesystem::exists(path)) throw DataError("no such file: " + path);
  if (has_magic(path)) return load_binary(path);
  return Dataset(to_matrix(read_csv(path), path));
}

void save_matrix_binary(const MatrixXd& matrix, const std::string& path) {
  std::string bytes(kBinaryMagic, sizeof kBinaryMagic);
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(matrix.rows()), static_cast<std::uint64_t>(matrix.cols())};
  bytes.append(reinterpret_cast<const char*>(dims), sizeof dims);
  bytes.append(reinterpret_cast<const char*>(matrix.data()), static_cast<std::size_t>(matrix.size()) * sizeof(double));
  write_text(path, bytes);
}

void save_matrix_csv(const MatrixXd& matrix, const std::string& path) {
  std::string out;
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_real(matrix(i, j));
    }
    out += '\n';
  }
  write_text(path, out);
}

VectorXd load_vector(const std::string& path, const std::string& column) {
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) throw DataError(path + ": no values");
  std::size_t col = 0;
  if (!column.empty()) {
    auto it = std::find(table.header.begin(), table.header.end(), column);
    if (it == table.header.end()) throw DataError(path + ": no column named '" + column + "'");
    col = static_cast<std::size_t>(it - table.header.begin());
  } else if (table.rows.front().size() != 1) {
    throw DataError(path + ": several columns; name one");
  }
  VectorXd out(static_cast<Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) out[static_cast<Index>(i)] = table.rows[i][col];
  return out;
}

LossTable load_losses(const std::string& path, Index expected_n, const std::string& column) {
  VectorXd values = load_vector(path, column);
  if (expected_n >= 0 && values.size() != expected_n) {
    throw DataError(path + ": " + std::to_string(values.size()) + " losses for " + std::to_string(expected_n) +
                    " points");
  }
  return LossTable(std::move(values));
}

RegressionInstance load_regression(const std::string& path) {
  const CsvTable table = read_csv(path);
  const MatrixXd all = to_matrix(table, path);
  if (all.cols() < 2) throw DataError(path + ": need at least one feature column and a target column");
  return RegressionInstance(all.leftCols(all.cols() - 1), all.col(all.cols() - 1));
}

RegressionInstance load_regression(const std::string& features, const std::string& targets) {
  Dataset a = load_matrix(features);
  VectorXd b = load_vector(targets);
  if (b.size() != a.n()) {
    throw DataError(targets + ": " + std::to_string(b.size()) + " targets for " + std::to_string(a.n()) + " rows");
  }
  return RegressionInstance(a.rows(), std::move(b));
}

std::string sample_csv(const WeightedSample& sample) {
  std::string out = "index,weight\n";
  for (const auto& e : sample.entries) {
    out += std::to_string(e.index);
    out += ',';
    out += format_real(e.weight);
    out += '\n';
  }
  return out;
}

void save_sample(const WeightedSample& sample, const std::string& path) { write_text(path, sample_csv(sample)); }

WeightedSample load_sample(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header != std::vector<std::string>{"index", "weight"}) {
    throw DataError(path + ": expected header 'index,weight'");
  }
  WeightedSample sample;
  for (const auto& row : table.rows) {
    const double idx = row[0];
    if (idx < 0 || idx != std::floor(idx)) throw DataError(path + ": index must be a non-negative integer");
    if (row[1] < 0) throw DataError(path + ": negative weight");
    sample.entries.push_back({static_cast<Index>(idx), row[1]});
  }
  return sample;
}

void write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError("short write to " + path);
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string assignment_csv(const Clustering& clustering) {
  std::string out = "point,cluster\n";
  for (std::size_t e = 0; e < clustering.assignment.size(); ++e) {
    out += std::to_string(e) + ',' + std::to_string(clustering.assignment[e]) + '\n';
  }
  return out;
}

std::string centers_csv(const Clustering& clustering) {
  const MatrixXd& pos = clustering.centers.positions;
  std::string out = "cluster,row,size,cost";
  for (Index j = 0; j < pos.cols(); ++j) out += ",x" + std::to_string(j);
  out += '\n';
  for (Index c = 0; c < pos.rows(); ++c) {
    const auto u = static_cast<std::size_t>(c);
    const Index row = u < clustering.centers.rows.size() ? clustering.centers.rows[u] : kNoRow;
    out += std::to_string(c) + ',' + std::to_string(row) + ',' + std::to_string(clustering.cluster_size[u]) + ',' +
           format_real(clustering.cluster_cost[c]);
    for (Index j = 0; j < pos.cols(); ++j) out += ',' + format_real(pos(c, j));
    out += '\n';
  }
  return out;
}

std::string vector_csv(const std::string& name, const VectorXd& values) {
  std::string out = name + '\n';
  for (Index i = 0; i < values.size(); ++i) out += format_real(values[i]) + '\n';
  return out;
}

nlohmann::json trial_report_json(const TrialReport& report) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : report.config.echo()) config[k] = v;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"trial", r.trial},
                    {"round", r.round},
                    {"delta", r.delta},
                    {"bound", r.bound},
                    {"success", r.success},
                    {"queries_used", r.queries_used}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"command", "bench"},
          {"config", config},
          {"trials", report.rows.size()},
          {"success_rate", report.success_rate},
          {"mean_delta", report.mean_delta},
          {"median_delta", report.median_delta},
          {"std_error", report.std_error},
          {"max_unbiasedness_residual", report.max_unbiasedness_residual},
          {"support_deficient", report.support_deficient},
          {"rows", rows}};
}

std::string trial_rows_csv(const TrialReport& report) {
  std::string out = "trial,round,delta,bound,success,queries_used\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.trial) + ',' + std::to_string(r.round) + ',' + format_real(r.delta) + ',' +
           format_real(r.bound) + ',' + (r.success ? "1" : "0") + ',' + std::to_string(r.queries_used) + '\n';
  }
  return out;
}

}  // namespace csel
