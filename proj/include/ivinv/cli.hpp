#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ivinv/invert_approx.hpp"
#include "ivinv/invert_exact.hpp"
#include "ivinv/ivdata.hpp"
#include "ivinv/simulate.hpp"

namespace ivinv {

struct RunConfig {
  std::string input;            // delimited file; empty selects the simulated design
  std::string columns;          // "y1=a;y2=b;z=c,d;x=e"
  std::string errors = "het";
  std::vector<Method> methods{Method::AR, Method::LM, Method::CQLR};
  Method stat = Method::AR;     // statistic inverted by grid and approx methods
  double alpha = 0.05;
  int degree = 500;
  int draws = 10000;
  std::uint64_t seed = 20240917;
  int grid_points = 501;
  std::string out;              // JSON path; empty writes JSON to stdout
  std::string csv;              // compare/simulate: tidy CSV path
  bool table = true;            // human-readable table on stdout (or stderr when JSON goes to stdout)
  DesignSpec design;            // simulated data when no input is given
  int reps = 200;               // simulate: replications; compare: number of designs
  Method reference = Method::CQLR;
  std::string emit_csv;         // simulate: write one simulated dataset and stop

  void validate() const;
};

/// Runs one method on prepared data. CLR/CIL and APPROX use the Chebyshev pathway.
InversionResult run_method(Method method, const Dataset& data, const StatProfile& profile, const RunConfig& cfg);

/// Writes a dataset as CSV with columns y1, y2, z1..zk, x1..xd and cluster when present.
void write_dataset_csv(const Dataset& data, const std::string& path);

/// Entry point; returns 0 on success, 2 on configuration errors, 3 on numerical failures.
int run_cli(int argc, const char* const* argv);

}  // namespace ivinv
