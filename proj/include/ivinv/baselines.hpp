#pragma once

#include <functional>
#include <utility>

#include "ivinv/invert_exact.hpp"
#include "ivinv/ivdata.hpp"

namespace ivinv {

struct TslsFit {
  double beta_hat = 0.0;
  double se = 0.0;
};

/// Two-stage least squares after partialling out X, with a standard error that
/// follows the dataset's error specification.
TslsFit tsls(const Dataset& data);

enum class GridKind { Even, Cheb };

/// beta -> (statistic, critical value). Must accept infinite beta for Cheb grids.
using GridEvaluator = std::function<std::pair<double, double>(double)>;

/// Even: points nodes on beta_hat +- 2 se, and an accepted end node extends the
/// set to infinity on that side (the weakiv rule, reproduced on purpose).
/// Cheb: second-kind nodes on theta in [-1, 1] mapped to beta. Runs of accepted
/// nodes become intervals from the first to the last node of the run.
InversionResult invert_grid(const GridEvaluator& ev, GridKind grid, const TslsFit& fit, int points, double alpha);

/// beta_hat +- z_{1 - alpha/2} se.
InversionResult tratio_interval(const TslsFit& fit, double alpha);

/// Pointwise evaluator of AR, LM or CQLR from the matrix forms.
GridEvaluator exact_grid_evaluator(const StatProfile& profile, Method method, double alpha);

}  // namespace ivinv
