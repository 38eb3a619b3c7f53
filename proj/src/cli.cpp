#include "ivinv/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ivinv/baselines.hpp"
#include "ivinv/errors.hpp"
#include "ivinv/result_io.hpp"

namespace ivinv {

namespace {

bool needs_k2(Method m) { return m == Method::CIL; }

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isspace(c); }), tok.end());
    if (!tok.empty()) out.push_back(parse_method(tok));
  }
  if (out.empty()) throw ConfigError("at least one method is required");
  return out;
}

std::string methods_text(const std::vector<Method>& ms) {
  std::string s;
  for (Method m : ms) s += (s.empty() ? "" : ",") + method_name(m);
  return s;
}

ErrorKind error_kind_of(const std::string& text) {
  const std::string t = text.substr(0, text.find(':'));
  if (t == "hom") return ErrorKind::Homoskedastic;
  if (t == "het") return ErrorKind::Heteroskedastic;
  if (t == "hac") return ErrorKind::Hac;
  if (t == "cluster") return ErrorKind::Clustered;
  throw ConfigError("unknown error specification '" + text + "'");
}

Dataset prepare_data(const RunConfig& cfg, std::uint64_t seed) {
  if (!cfg.input.empty()) {
    if (cfg.columns.empty()) throw ConfigError("--columns is required with --input");
    return load_dataset(cfg.input, parse_column_map(cfg.columns), parse_error_spec(cfg.errors));
  }
  DesignSpec d = cfg.design;
  d.errors = error_kind_of(cfg.errors);
  Dataset data = simulate_dataset(d, seed);
  if (d.errors == ErrorKind::Hac && cfg.errors.size() > 4) data.errors = parse_error_spec(cfg.errors);
  return data;
}

void check_methods_for(const RunConfig& cfg, int k) {
  for (Method m : cfg.methods)
    if (needs_k2(m) && k < 2)
      throw ConfigError("method CIL requires k >= 2 instruments; the data have k = " + std::to_string(k));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

std::string fmt(double x, int prec = 6) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char b[64];
  std::snprintf(b, sizeof b, "%.*g", prec, x);
  return b;
}

struct Outputs {
  std::ostream& table;
  explicit Outputs(const RunConfig& cfg) : table(cfg.out.empty() ? std::cerr : std::cout) {}
};

void emit_json(const RunConfig& cfg, const nlohmann::json& j) {
  const std::string text = j.dump(2) + "\n";
  if (cfg.out.empty()) std::cout << text;
  else write_text(cfg.out, text);
}

nlohmann::json config_json(const RunConfig& cfg) {
  nlohmann::json c;
  c["alpha"] = cfg.alpha;
  c["methods"] = methods_text(cfg.methods);
  c["stat"] = method_name(cfg.stat);
  c["degree"] = cfg.degree;
  c["draws"] = cfg.draws;
  c["seed"] = cfg.seed;
  c["grid_points"] = cfg.grid_points;
  c["errors"] = cfg.errors;
  if (cfg.input.empty()) {
    c["design"] = {{"n", cfg.design.n},         {"k", cfg.design.k},     {"beta", cfg.design.beta},
                   {"strength", cfg.design.strength}, {"rho", cfg.design.rho}};
  } else {
    c["input"] = cfg.input;
    c["columns"] = cfg.columns;
  }
  return c;
}

// --- invert -----------------------------------------------------------------

int cmd_invert(const RunConfig& cfg) {
  const Dataset data = prepare_data(cfg, cfg.seed);
  check_methods_for(cfg, data.k());
  const SufficientStats ss = compute_sufficient_stats(data);
  const StatProfile profile = build_profile(ss);
  nlohmann::json out;
  out["command"] = "invert";
  out["config"] = config_json(cfg);
  out["dataset"] = {{"n", data.n()}, {"k", data.k()}, {"d", data.d()}, {"errors", describe(data.errors)}};
  out["results"] = nlohmann::json::array();
  Outputs o(cfg);
  int code = 0;
  for (Method m : cfg.methods) {
    try {
      const InversionResult r = run_method(m, data, profile, cfg);
      out["results"].push_back(result_to_json(r));
      if (cfg.table) o.table << method_name(m) << "\t" << format_set(r.set) << (r.reliable ? "" : "\t(unreliable)") << "\n";
    } catch (const NumericalError& e) {
      out["results"].push_back({{"method", method_name(m)}, {"error", e.what()}});
      if (cfg.table) o.table << method_name(m) << "\tfailed: " << e.what() << "\n";
      code = 3;
    }
  }
  emit_json(cfg, out);
  return code;
}

// --- compare ----------------------------------------------------------------

int cmd_compare(const RunConfig& cfg) {
  if (cfg.methods.empty()) throw ConfigError("compare needs at least one method besides the reference");
  RunConfig rc = cfg;
  Method ref = cfg.reference;
  bool ref_fallback = false;
  if (ref == Method::CLR || ref == Method::CIL) {
    ref_fallback = true;  // no exact inversion: highest-degree approximation
    rc.degree = std::max(cfg.degree, 1000);
  }
  const int designs = cfg.input.empty() ? cfg.reps : 1;
  struct Row {
    int design;
    Method method;
    double h, hn, hh, hhn;
    bool bounded_agree, empty_agree;
  };
  std::vector<Row> rows;
  int failures = 0;
  for (int dsn = 0; dsn < designs; ++dsn) {
    const Dataset data = prepare_data(cfg, cfg.seed + static_cast<std::uint64_t>(dsn));
    check_methods_for(cfg, data.k());
    if (needs_k2(ref) && data.k() < 2) throw ConfigError("reference CIL requires k >= 2");
    try {
      const StatProfile profile = build_profile(compute_sufficient_stats(data));
      RunConfig refcfg = rc;
      refcfg.stat = ref;
      const InversionResult rr = run_method(ref, data, profile, refcfg);
      for (Method m : cfg.methods) {
        const InversionResult r = run_method(m, data, profile, cfg);
        const double h = hausdorff(r.set, rr.set), hh = hausdorff(hull(r.set), hull(rr.set));
        rows.push_back({dsn, m, h, normalized_distance(h), hh, normalized_distance(hh),
                        r.set.bounded() == rr.set.bounded(), r.set.empty() == rr.set.empty()});
      }
    } catch (const NumericalError& e) {
      ++failures;
      std::cerr << "design " << dsn << " excluded: " << e.what() << "\n";
    }
  }
  nlohmann::json out;
  out["command"] = "compare";
  out["config"] = config_json(cfg);
  out["reference"] = method_name(ref);
  out["reference_is_approximation"] = ref_fallback;
  out["designs"] = designs;
  out["excluded"] = failures;
  nlohmann::json summary = nlohmann::json::object();
  Outputs o(cfg);
  if (cfg.table) o.table << "method\tq10\tq50\tq90\tmax\tshare=1\tbounded_agree\tempty_agree\n";
  for (Method m : cfg.methods) {
    std::vector<double> v;
    int ba = 0, ea = 0;
    for (const Row& r : rows)
      if (r.method == m) {
        v.push_back(r.hn);
        ba += r.bounded_agree;
        ea += r.empty_agree;
      }
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    auto q = [&](double p) { return v[std::min(v.size() - 1, static_cast<std::size_t>(std::floor(p * (v.size() - 1) + 0.5)))]; };
    const double ones = static_cast<double>(std::count(v.begin(), v.end(), 1.0)) / v.size();
    nlohmann::json ecdf = nlohmann::json::array();
    for (int i = 1; i <= 10; ++i) ecdf.push_back({{"p", i / 10.0}, {"distance", q(i / 10.0)}});
    summary[method_name(m)] = {{"ecdf", ecdf},
                               {"share_infinite", ones},
                               {"bounded_agreement", static_cast<double>(ba) / v.size()},
                               {"empty_agreement", static_cast<double>(ea) / v.size()}};
    if (cfg.table)
      o.table << method_name(m) << "\t" << fmt(q(0.1), 3) << "\t" << fmt(q(0.5), 3) << "\t" << fmt(q(0.9), 3) << "\t"
              << fmt(v.back(), 3) << "\t" << fmt(ones, 3) << "\t" << fmt(static_cast<double>(ba) / v.size(), 3) << "\t"
              << fmt(static_cast<double>(ea) / v.size(), 3) << "\n";
  }
  out["summary"] = summary;
  if (!cfg.csv.empty()) {
    std::ostringstream csv;
    csv << "design,method,reference,hausdorff,hausdorff_normalized,hull_hausdorff,hull_normalized,bounded_agree,"
           "empty_agree\n";
    for (const Row& r : rows)
      csv << r.design << "," << method_name(r.method) << "," << method_name(ref) << "," << fmt(r.h, 12) << ","
          << fmt(r.hn, 12) << "," << fmt(r.hh, 12) << "," << fmt(r.hhn, 12) << "," << r.bounded_agree << ","
          << r.empty_agree << "\n";
    write_text(cfg.csv, csv.str());
  }
  emit_json(cfg, out);
  return 0;
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg) {
  if (!cfg.emit_csv.empty()) {
    write_dataset_csv(prepare_data(cfg, cfg.seed), cfg.emit_csv);
    return 0;
  }
  if (!cfg.input.empty()) throw ConfigError("simulate draws its own datasets; --input is not accepted");
  check_methods_for(cfg, cfg.design.k);
  const double truth = cfg.design.beta;
  std::vector<int> cover(cfg.methods.size(), 0), bounded(cfg.methods.size(), 0), empty(cfg.methods.size(), 0),
      used(cfg.methods.size(), 0), excluded(cfg.methods.size(), 0);
  for (int rep = 0; rep < cfg.reps; ++rep) {
    const Dataset data = prepare_data(cfg, cfg.seed + static_cast<std::uint64_t>(rep));
    StatProfile profile;
    bool ok = true;
    try {
      profile = build_profile(compute_sufficient_stats(data));
    } catch (const NumericalError&) {
      ok = false;
    }
    RunConfig rc = cfg;
    rc.seed = cfg.seed + 7919ULL * static_cast<std::uint64_t>(rep);
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
      if (!ok) {
        ++excluded[i];
        continue;
      }
      try {
        const InversionResult r = run_method(cfg.methods[i], data, profile, rc);
        ++used[i];
        cover[i] += r.set.contains(truth);
        bounded[i] += r.set.bounded();
        empty[i] += r.set.empty();
      } catch (const NumericalError& e) {
        ++excluded[i];
        std::cerr << "rep " << rep << " " << method_name(cfg.methods[i]) << " excluded: " << e.what() << "\n";
      }
    }
  }
  nlohmann::json out;
  out["command"] = "simulate";
  out["config"] = config_json(cfg);
  out["reps"] = cfg.reps;
  if (cfg.reps < 2) out["warning"] = "fewer than two replications: the Monte Carlo band is degenerate";
  const double nominal = 1.0 - cfg.alpha;
  Outputs o(cfg);
  if (cfg.table) o.table << "method\tcoverage\tband_lo\tband_hi\tbounded\tempty\texcluded\n";
  nlohmann::json res = nlohmann::json::array();
  std::ostringstream csv;
  csv << "method,coverage,band_lo,band_hi,bounded,empty,used,excluded\n";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const double n = std::max(1, used[i]);
    const double cov = cover[i] / n;
    const double half = 3.0 * std::sqrt(nominal * (1.0 - nominal) / n);
    res.push_back({{"method", method_name(cfg.methods[i])},
                   {"coverage", cov},
                   {"band", {nominal - half, nominal + half}},
                   {"bounded_share", bounded[i] / n},
                   {"empty_share", empty[i] / n},
                   {"used", used[i]},
                   {"excluded", excluded[i]}});
    csv << method_name(cfg.methods[i]) << "," << fmt(cov) << "," << fmt(nominal - half) << "," << fmt(nominal + half)
        << "," << fmt(bounded[i] / n) << "," << fmt(empty[i] / n) << "," << used[i] << "," << excluded[i] << "\n";
    if (cfg.table)
      o.table << method_name(cfg.methods[i]) << "\t" << fmt(cov, 4) << "\t" << fmt(nominal - half, 4) << "\t"
              << fmt(nominal + half, 4) << "\t" << fmt(bounded[i] / n, 3) << "\t" << fmt(empty[i] / n, 3) << "\t"
              << excluded[i] << "\n";
  }
  out["results"] = res;
  if (cfg.reps < 2) std::cerr << "warning: fewer than two replications; the coverage band is degenerate\n";
  if (!cfg.csv.empty()) write_text(cfg.csv, csv.str());
  emit_json(cfg, out);
  return 0;
}

void apply_config_file(const std::string& path, RunConfig& cfg, std::string& methods, std::string& stat,
                       std::string& reference) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const std::exception& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }
  for (const auto& [key, v] : j.items()) {
    if (key == "input") cfg.input = v.get<std::string>();
    else if (key == "columns") cfg.columns = v.get<std::string>();
    else if (key == "errors") cfg.errors = v.get<std::string>();
    else if (key == "methods") methods = v.get<std::string>();
    else if (key == "stat") stat = v.get<std::string>();
    else if (key == "reference") reference = v.get<std::string>();
    else if (key == "alpha") cfg.alpha = v.get<double>();
    else if (key == "degree") cfg.degree = v.get<int>();
    else if (key == "draws") cfg.draws = v.get<int>();
    else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
    else if (key == "grid_points") cfg.grid_points = v.get<int>();
    else if (key == "out") cfg.out = v.get<std::string>();
    else if (key == "csv") cfg.csv = v.get<std::string>();
    else if (key == "reps") cfg.reps = v.get<int>();
    else if (key == "n") cfg.design.n = v.get<int>();
    else if (key == "k") cfg.design.k = v.get<int>();
    else if (key == "beta") cfg.design.beta = v.get<double>();
    else if (key == "strength") cfg.design.strength = v.get<double>();
    else if (key == "rho") cfg.design.rho = v.get<double>();
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (!(alpha > 0.0 && alpha <= 0.5)) throw ConfigError("alpha must lie in (0, 0.5]");
  if (degree < 8) throw ConfigError("--degree must be at least 8");
  if (draws < 1) throw ConfigError("--draws must be positive");
  if (grid_points < 3) throw ConfigError("--grid-points must be at least 3");
  if (reps < 1) throw ConfigError("--reps must be positive");
  if (design.k < 1 || design.n < design.k + 4) throw ConfigError("design needs k >= 1 and n >= k + 4");
  error_kind_of(errors);
}

InversionResult run_method(Method method, const Dataset& data, const StatProfile& profile, const RunConfig& cfg) {
  ApproxConfig ac;
  ac.degree = cfg.degree;
  ac.alpha = cfg.alpha;
  ac.mc.draws = cfg.draws;
  ac.mc.seed = cfg.seed;
  switch (method) {
    case Method::AR: return invert_ar(profile, cfg.alpha);
    case Method::LM: return invert_lm(profile, cfg.alpha);
    case Method::CQLR: return invert_cqlr(profile, CvfSpec{profile.k, cfg.alpha});
    case Method::CLR:
    case Method::CIL: return invert_approx(profile, method, ac);
    case Method::APPROX: {
      InversionResult r = invert_approx(profile, cfg.stat, ac);
      r.method = Method::APPROX;
      r.notes.push_back("approximated statistic: " + method_name(cfg.stat));
      return r;
    }
    case Method::TRATIO: return tratio_interval(tsls(data), cfg.alpha);
    case Method::GRID_EVEN:
    case Method::GRID_CHEB: {
      GridEvaluator ev;
      if (cfg.stat == Method::CLR || cfg.stat == Method::CIL) {
        auto mc = std::make_shared<ConditionalMc>(profile, cfg.stat, ac);
        const double tau = 1.0 - cfg.alpha;
        ev = [mc, tau](double b) { return std::pair{mc->composite(Compactification::forward(b)), tau}; };
      } else {
        ev = exact_grid_evaluator(profile, cfg.stat, cfg.alpha);
      }
      InversionResult r = invert_grid(ev, method == Method::GRID_EVEN ? GridKind::Even : GridKind::Cheb, tsls(data),
                                      cfg.grid_points, cfg.alpha);
      r.notes.push_back("grid statistic: " + method_name(cfg.stat));
      return r;
    }
  }
  throw ConfigError("unsupported method");
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ostringstream s;
  s.precision(17);
  s << "y1,y2";
  for (int j = 0; j < data.k(); ++j) s << ",z" << j + 1;
  for (int j = 0; j < data.d(); ++j) s << ",x" << j + 1;
  const bool cl = data.errors.kind == ErrorKind::Clustered;
  if (cl) s << ",cluster";
  s << "\n";
  for (int i = 0; i < data.n(); ++i) {
    s << data.y1(i) << "," << data.y2(i);
    for (int j = 0; j < data.k(); ++j) s << "," << data.Z(i, j);
    for (int j = 0; j < data.d(); ++j) s << "," << data.X(i, j);
    if (cl) s << "," << data.errors.cluster_id[static_cast<std::size_t>(i)];
    s << "\n";
  }
  write_text(path, s.str());
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Exact and approximate inversion of weak-instrument robust tests"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string methods = "AR,LM,CQLR", stat = "AR", reference = "CQLR", config;
  bool no_table = false;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", config, "JSON file whose keys override the flags");
    s->add_option("--input", cfg.input, "delimited data file with a header row");
    s->add_option("--columns", cfg.columns, "column map, e.g. y1=wage;y2=educ;z=qob1,qob2;x=age");
    s->add_option("--errors", cfg.errors, "hom | het | hac | hac:B | cluster:COLUMN");
    s->add_option("--methods,--method", methods, "comma list: AR,LM,CQLR,CLR,CIL,TRATIO,GRID_EVEN,GRID_CHEB,APPROX");
    s->add_option("--stat", stat, "statistic for grid and approx methods (AR, LM, CQLR, CLR, CIL)");
    s->add_option("--alpha", cfg.alpha, "significance level");
    s->add_option("--degree", cfg.degree, "Chebyshev degree for approximate inversion");
    s->add_option("--draws", cfg.draws, "Monte Carlo draws for CLR and CIL");
    s->add_option("--seed", cfg.seed, "random seed");
    s->add_option("--grid-points,--points", cfg.grid_points, "grid size for grid methods");
    s->add_option("--out", cfg.out, "JSON output path (stdout when omitted)");
    s->add_option("--csv", cfg.csv, "tidy CSV output path");
    s->add_flag("--no-table", no_table, "suppress the human-readable table");
    s->add_option("--n", cfg.design.n, "simulated design: sample size");
    s->add_option("--k", cfg.design.k, "simulated design: instruments");
    s->add_option("--beta", cfg.design.beta, "simulated design: true beta");
    s->add_option("--strength", cfg.design.strength, "simulated design: concentration parameter");
    s->add_option("--rho", cfg.design.rho, "simulated design: endogeneity correlation");
  };
  CLI::App* inv = app.add_subcommand("invert", "confidence sets for one dataset");
  CLI::App* cmp = app.add_subcommand("compare", "distances of methods to a reference over a design suite");
  CLI::App* sim = app.add_subcommand("simulate", "coverage over simulated datasets");
  for (CLI::App* s : {inv, cmp, sim}) add_common(s);
  cmp->add_option("--reference", reference, "reference method (exact where available)");
  cmp->add_option("--designs", cfg.reps, "number of simulated designs");
  sim->add_option("--reps", cfg.reps, "replications");
  sim->add_option("--emit-csv", cfg.emit_csv, "write one simulated dataset as CSV and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (!config.empty()) apply_config_file(config, cfg, methods, stat, reference);
    cfg.methods = parse_methods(methods);
    cfg.stat = parse_method(stat);
    cfg.reference = parse_method(reference);
    cfg.table = !no_table;
    cfg.validate();
    if (*inv) return cmd_invert(cfg);
    if (*cmp) return cmd_compare(cfg);
    return cmd_simulate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace ivinv
