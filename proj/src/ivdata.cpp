#include "ivinv/ivdata.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ivinv/errors.hpp"

namespace ivinv {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  std::string t = s.substr(a, b - a);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  return t;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (c == delim && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_number(const std::string& cell, int row, const std::string& col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ConfigError("non-numeric cell '" + cell + "' in column '" + col + "' at data row " +
                      std::to_string(row));
  return v;
}

int numeric_rank(const Eigen::MatrixXd& a) {
  if (a.cols() == 0) return 0;
  Eigen::MatrixXd s = a;
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    const double nrm = s.col(j).norm();
    if (nrm > 0) s.col(j) /= nrm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * sv(0)) ++r;
  return r;
}

}  // namespace

ErrorSpec parse_error_spec(const std::string& text) {
  const std::string t = trim(text);
  if (t == "hom") return ErrorSpec::homoskedastic();
  if (t == "het") return ErrorSpec::heteroskedastic();
  if (t == "hac") return ErrorSpec::hac();
  if (t.rfind("hac:", 0) == 0) {
    int b = -1;
    const std::string num = t.substr(4);
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), b);
    if (num.empty() || ec != std::errc() || ptr != num.data() + num.size() || b < 0)
      throw ConfigError("invalid HAC bandwidth in '" + text + "'");
    return ErrorSpec::hac(b);
  }
  if (t.rfind("cluster:", 0) == 0 && t.size() > 8) {
    ErrorSpec e{ErrorKind::Clustered, -1, {}, t.substr(8)};
    return e;
  }
  throw ConfigError("unknown error specification '" + text + "' (expected hom, het, hac[:B], cluster:COL)");
}

std::string describe(const ErrorSpec& spec) {
  switch (spec.kind) {
    case ErrorKind::Homoskedastic: return "hom";
    case ErrorKind::Heteroskedastic: return "het";
    case ErrorKind::Hac: return spec.bandwidth >= 0 ? "hac:" + std::to_string(spec.bandwidth) : "hac";
    case ErrorKind::Clustered: return "cluster:" + (spec.cluster_column.empty() ? "ids" : spec.cluster_column);
  }
  return "?";
}

int default_hac_bandwidth(int n) {
  return static_cast<int>(std::floor(4.0 * std::pow(n / 100.0, 2.0 / 9.0)));
}

void validate(const Dataset& data) {
  const int n = data.n(), k = data.k(), d = data.d();
  if (k < 1) throw ConfigError("at least one instrument is required");
  if (data.y2.size() != n || data.Z.rows() != n || (d > 0 && data.X.rows() != n))
    throw ConfigError("dataset columns have inconsistent lengths");
  if (n < k + d + 2)
    throw ConfigError("too few observations: n = " + std::to_string(n) + " < k + d + 2 = " +
                      std::to_string(k + d + 2));
  if (!data.y1.allFinite() || !data.y2.allFinite() || !data.Z.allFinite() || (d > 0 && !data.X.allFinite()))
    throw ConfigError("dataset contains non-finite values");
  if (d > 0 && numeric_rank(data.X) < d) throw ConfigError("covariates X are rank deficient");
  Eigen::MatrixXd xz(n, d + k);
  if (d > 0) xz.leftCols(d) = data.X;
  xz.rightCols(k) = data.Z;
  if (numeric_rank(xz) < d + k) throw ConfigError("instruments are rank deficient (given the covariates)");
  if (data.errors.kind == ErrorKind::Clustered) {
    if (static_cast<int>(data.errors.cluster_id.size()) != n)
      throw ConfigError("cluster ids must have one entry per observation");
    std::vector<long> ids = data.errors.cluster_id;
    std::sort(ids.begin(), ids.end());
    if (std::unique(ids.begin(), ids.end()) - ids.begin() < 2)
      throw ConfigError("clustered errors need at least two distinct clusters");
  }
}

ColumnMap parse_column_map(const std::string& text) {
  ColumnMap m;
  for (const std::string& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("column mapping entry '" + item + "' lacks '='");
    const std::string key = trim(item.substr(0, eq));
    const std::vector<std::string> vals = split(item.substr(eq + 1), ',');
    if (key == "y1" && vals.size() == 1) m.y1 = vals[0];
    else if (key == "y2" && vals.size() == 1) m.y2 = vals[0];
    else if (key == "z") m.z = vals;
    else if (key == "x") m.x = vals;
    else throw ConfigError("unknown column mapping key '" + key + "'");
  }
  if (m.y1.empty() || m.y2.empty() || m.z.empty())
    throw ConfigError("column mapping must name y1, y2 and at least one instrument z");
  return m;
}

Dataset load_dataset(const std::string& path, const ColumnMap& columns, ErrorSpec errors) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("input file '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
  const std::vector<std::string> header = split(line, columns.delimiter);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  auto col = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw ConfigError("column '" + name + "' not found in '" + path + "'");
    return it->second;
  };
  const std::size_t iy1 = col(columns.y1), iy2 = col(columns.y2);
  std::vector<std::size_t> iz, ix;
  for (const auto& z : columns.z) iz.push_back(col(z));
  for (const auto& x : columns.x) ix.push_back(col(x));
  const bool clustered = errors.kind == ErrorKind::Clustered;
  const std::size_t icl = clustered ? col(errors.cluster_column) : 0;

  std::vector<std::vector<double>> rows;
  std::vector<std::string> cluster_labels;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split(line, columns.delimiter);
    if (cells.size() != header.size())
      throw ConfigError("data row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(header.size()));
    std::vector<double> r;
    r.push_back(parse_number(cells[iy1], row, columns.y1));
    r.push_back(parse_number(cells[iy2], row, columns.y2));
    for (std::size_t j = 0; j < iz.size(); ++j) r.push_back(parse_number(cells[iz[j]], row, columns.z[j]));
    for (std::size_t j = 0; j < ix.size(); ++j) r.push_back(parse_number(cells[ix[j]], row, columns.x[j]));
    rows.push_back(std::move(r));
    if (clustered) cluster_labels.push_back(cells[icl]);
  }
  const int n = static_cast<int>(rows.size());
  const int k = static_cast<int>(iz.size());
  const int dx = static_cast<int>(ix.size());
  const int d = dx + (columns.intercept ? 1 : 0);
  Dataset data;
  data.y1.resize(n);
  data.y2.resize(n);
  data.Z.resize(n, k);
  data.X.resize(n, d);
  for (int i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    data.y1(i) = r[0];
    data.y2(i) = r[1];
    for (int j = 0; j < k; ++j) data.Z(i, j) = r[static_cast<std::size_t>(2 + j)];
    for (int j = 0; j < dx; ++j) data.X(i, j) = r[static_cast<std::size_t>(2 + k + j)];
    if (columns.intercept) data.X(i, dx) = 1.0;
  }
  if (clustered) {
    std::map<std::string, long> ids;
    errors.cluster_id.clear();
    for (const auto& lab : cluster_labels) {
      auto it = ids.emplace(lab, static_cast<long>(ids.size())).first;
      errors.cluster_id.push_back(it->second);
    }
  }
  data.errors = std::move(errors);
  validate(data);
  return data;
}

Eigen::VectorXd SufficientStats::vecR() const {
  Eigen::VectorXd v(2 * k);
  v.head(k) = R.col(0);
  v.tail(k) = R.col(1);
  return v;
}

Eigen::MatrixXd partial_out(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A) {
  if (X.cols() == 0) return A;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(X.rows(), X.cols());
  return A - Q * (Q.transpose() * A);
}

Eigen::MatrixXd inv_sqrt_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0)
    throw NumericalError("inverse square root of a matrix that is not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

SufficientStats compute_sufficient_stats(const Dataset& data) {
  validate(data);
  const int n = data.n(), k = data.k(), d = data.d();
  Eigen::MatrixXd Y(n, 2);
  Y.col(0) = data.y1;
  Y.col(1) = data.y2;
  const Eigen::MatrixXd Zp = partial_out(data.X, data.Z);
  const Eigen::MatrixXd Yp = partial_out(data.X, Y);
  const Eigen::MatrixXd Q = Zp.transpose() * Zp;
  const Eigen::MatrixXd Qih = inv_sqrt_sym(Q);
  SufficientStats ss;
  ss.k = k;
  ss.n = n;
  ss.R = Qih * (Zp.transpose() * Yp);
  // Reduced-form residuals of Y on (Z, X).
  const Eigen::MatrixXd Zt = Zp * Qih;  // orthonormal columns
  const Eigen::MatrixXd V = Yp - Zt * ss.R;
  const double dof = static_cast<double>(n - k - d);
  ss.Omega = V.transpose() * V / dof;

  Eigen::MatrixXd S;
  if (data.errors.kind == ErrorKind::Homoskedastic) {
    S = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        S.block(a * k, b * k, k, k) = ss.Omega(a, b) * Eigen::MatrixXd::Identity(k, k);
  } else {
    // h_i = v_i (x) z~_i, stacked as rows.
    Eigen::MatrixXd H(n, 2 * k);
    H.leftCols(k) = Zt.array().colwise() * V.col(0).array();
    H.rightCols(k) = Zt.array().colwise() * V.col(1).array();
    const double df = static_cast<double>(n) / dof;
    if (data.errors.kind == ErrorKind::Heteroskedastic) {
      S = df * (H.transpose() * H);
    } else if (data.errors.kind == ErrorKind::Hac) {
      const int B = data.errors.bandwidth >= 0 ? data.errors.bandwidth : default_hac_bandwidth(n);
      S = H.transpose() * H;
      for (int j = 1; j <= std::min(B, n - 1); ++j) {
        const double w = 1.0 - static_cast<double>(j) / (B + 1.0);
        const Eigen::MatrixXd G = H.bottomRows(n - j).transpose() * H.topRows(n - j);
        S += w * (G + G.transpose());
      }
      S *= df;
    } else {
      std::map<long, int> slot;
      for (long id : data.errors.cluster_id) slot.emplace(id, static_cast<int>(slot.size()));
      const int g = static_cast<int>(slot.size());
      Eigen::MatrixXd C = Eigen::MatrixXd::Zero(g, 2 * k);
      for (int i = 0; i < n; ++i) C.row(slot[data.errors.cluster_id[static_cast<std::size_t>(i)]]) += H.row(i);
      const double cf = g / (g - 1.0) * (n - 1.0) / dof;
      S = cf * (C.transpose() * C);
    }
  }
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition of the covariance estimate failed");
  const double emax = es.eigenvalues().maxCoeff(), emin = es.eigenvalues().minCoeff();
  if (!(emax > 0) || emin <= 1e-13 * emax)
    throw NumericalError("covariance estimate is not positive definite (degenerate residuals or too few clusters)");
  ss.Sigma = S;
  return ss;
}

}  // namespace ivinv
