#pragma once

#include <cstdint>

#include "ivinv/ivdata.hpp"

namespace ivinv {

/// Linear IV design y2 = Z pi + v2, y1 = beta y2 + u with an intercept covariate.
/// pi = sqrt(strength / (n k)) * 1_k, so strength is the population concentration.
struct DesignSpec {
  int n = 250;
  int k = 5;
  double beta = 0.0;
  double strength = 5.0;
  double rho = 0.5;        // corr(u, v2)
  ErrorKind errors = ErrorKind::Heteroskedastic;
  double ar_coef = 0.5;    // AR(1) coefficient of errors and instruments under Hac
  int clusters = 25;       // Clustered only
  bool intercept = true;
};

/// Draws one dataset; the error spec attached matches design.errors (default HAC
/// bandwidth, cluster ids 0..clusters-1 assigned in contiguous blocks).
Dataset simulate_dataset(const DesignSpec& design, std::uint64_t seed);

}  // namespace ivinv
