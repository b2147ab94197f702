#ifndef CSEL_IO_HPP
#define CSEL_IO_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "csel/core.hpp"
#include "csel/evaluation.hpp"
#include "csel/regression.hpp"
#include "csel/selection.hpp"

namespace csel {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr char kBinaryMagic[5] = {'C', 'S', 'E', 'L', '1'};

/// Shortest decimal string that parses back to the same double.
std::string format_real(double value);

/// Header row (if any) and numeric body of a CSV file.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// The first line is a header if any field fails to parse as a number.
CsvTable read_csv(const std::string& path);

/// CSV or CSEL1 binary, detected by the magic bytes.
Dataset load_matrix(const std::string& path);
void save_matrix_binary(const MatrixXd& matrix, const std::string& path);
void save_matrix_csv(const MatrixXd& matrix, const std::string& path);

/**
 * One value per line, or the named column of a headed CSV. When
 * expected_n >= 0 a different length is a DataError.
 */
LossTable load_losses(const std::string& path, Index expected_n = -1, const std::string& column = "");
/// Plain numeric vector, same layout rules as load_losses; values may be negative.
VectorXd load_vector(const std::string& path, const std::string& column = "");

/// CSV whose last column is the target.
RegressionInstance load_regression(const std::string& path);
/// Features from a matrix file, targets from a separate vector file.
RegressionInstance load_regression(const std::string& features, const std::string& targets);

void save_sample(const WeightedSample& sample, const std::string& path);
WeightedSample load_sample(const std::string& path);

/// Writes via a temporary file and rename, so readers never see a partial file.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

std::string sample_csv(const WeightedSample& sample);
std::string assignment_csv(const Clustering& clustering);
std::string centers_csv(const Clustering& clustering);
std::string vector_csv(const std::string& name, const VectorXd& values);

nlohmann::json trial_report_json(const TrialReport& report);
std::string trial_rows_csv(const TrialReport& report);

}  // namespace csel

#endif  // CSEL_IO_HPP
