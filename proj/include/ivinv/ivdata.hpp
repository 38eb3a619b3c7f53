#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ivinv {

enum class ErrorKind { Homoskedastic, Heteroskedastic, Hac, Clustered };

struct ErrorSpec {
  ErrorKind kind = ErrorKind::Homoskedastic;
  int bandwidth = -1;               // hac only; negative selects the default rule
  std::vector<long> cluster_id;     // clustered only; one entry per observation
  std::string cluster_column;       // source column when loaded from a file

  static ErrorSpec homoskedastic() { return {}; }
  static ErrorSpec heteroskedastic() { return {ErrorKind::Heteroskedastic, -1, {}, {}}; }
  static ErrorSpec hac(int bandwidth = -1) { return {ErrorKind::Hac, bandwidth, {}, {}}; }
  static ErrorSpec clustered(std::vector<long> ids) { return {ErrorKind::Clustered, -1, std::move(ids), {}}; }
};

/// Parses "hom", "het", "hac", "hac:B", or "cluster:COLUMN".
ErrorSpec parse_error_spec(const std::string& text);
std::string describe(const ErrorSpec& spec);

/// floor(4 (n/100)^(2/9)).
int default_hac_bandwidth(int n);

struct Dataset {
  Eigen::VectorXd y1;  // outcome
  Eigen::VectorXd y2;  // endogenous regressor
  Eigen::MatrixXd Z;   // n x k instruments
  Eigen::MatrixXd X;   // n x d exogenous covariates, d may be 0
  ErrorSpec errors;

  int n() const { return static_cast<int>(y1.size()); }
  int k() const { return static_cast<int>(Z.cols()); }
  int d() const { return static_cast<int>(X.cols()); }
};

/// Throws ConfigError when a Dataset invariant fails.
void validate(const Dataset& data);

/// Column mapping for delimited text input.
struct ColumnMap {
  std::string y1;
  std::string y2;
  std::vector<std::string> z;
  std::vector<std::string> x;
  bool intercept = true;
  char delimiter = ',';
};

/// Parses "y1=a;y2=b;z=c,d;x=e" into a ColumnMap.
ColumnMap parse_column_map(const std::string& text);

/// Loads a delimited file with a header row. An intercept column is appended to
/// X unless disabled; a cluster column named in the error spec is mapped to ids.
Dataset load_dataset(const std::string& path, const ColumnMap& columns, ErrorSpec errors);

/// R (k x 2, columns for y1 and y2) and the 2k x 2k covariance of vec(R).
struct SufficientStats {
  Eigen::MatrixXd R;
  Eigen::MatrixXd Sigma;
  Eigen::Matrix2d Omega = Eigen::Matrix2d::Zero();  // reduced-form residual covariance
  int k = 0;
  int n = 0;

  Eigen::VectorXd vecR() const;
};

/// Partials out X, orthonormalizes the instruments with the symmetric inverse
/// square root, and builds the covariance estimate for the declared errors.
SufficientStats compute_sufficient_stats(const Dataset& data);

/// Residualizes the columns of A on X (returns A when X has no columns).
Eigen::MatrixXd partial_out(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A);

/// Symmetric (eigen) inverse square root of a positive-definite matrix.
Eigen::MatrixXd inv_sqrt_sym(const Eigen::MatrixXd& m);

}  // namespace ivinv
