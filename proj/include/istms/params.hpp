#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace istms {

// All rates are in units of kappa = 1 by convention, times in 1/kappa.
// omega_* may stay zero when working in the rotating frame.
struct SystemParams {
  double omega_c = 0.0;
  double omega_q = 0.0;
  double omega_p = 0.0;
  double j = 0.0;               // tunnel coupling J
  double g = 0.0;               // qubit-cavity coupling
  double lambda = 0.0;          // parametric drive amplitude
  double kappa = 1.0;           // output-port decay per normal mode
  double kappa_int = 0.0;       // internal decay
  double kappa_left_int = 0.0;  // left-cavity internal decay kappa'
  double eta = 0.0;             // external transmission loss fraction

  // optional explicit dispersive shift; when unset it is derived from g and j
  std::optional<double> chi;

  double kappa_tot() const { return kappa + kappa_int; }
  double epsilon() const { return kappa_int / kappa_tot(); }
  double omega_e() const { return omega_c + j; }
  double omega_o() const { return omega_c - j; }
};

inline double derive_chi(const SystemParams& p) {
  if (p.j <= 0.0) throw domain_error("derive_chi: j must be positive");
  const double r = p.lambda / p.j;
  return p.g * p.g / (2.0 * p.j) / (1.0 + r * r);
}

// chi override if present, otherwise the derived value (0 when g = 0)
inline double effective_chi(const SystemParams& p) {
  if (p.chi) return *p.chi;
  if (p.g == 0.0) return 0.0;
  return derive_chi(p);
}

// squeezing photon number, lossless-kappa convention
inline double n_sqz(const SystemParams& p) {
  const double h = p.kappa / 2.0;
  if (p.lambda >= h) throw instability_error("n_sqz: lambda >= kappa/2");
  return p.lambda * p.lambda / (h * h - p.lambda * p.lambda);
}

// variant with kappa replaced by kappa_tot (internal loss present)
inline double n_sqz_tot(const SystemParams& p) {
  const double h = p.kappa_tot() / 2.0;
  if (p.lambda >= h) throw instability_error("n_sqz_tot: lambda >= kappa_tot/2");
  return p.lambda * p.lambda / (h * h - p.lambda * p.lambda);
}

inline double n_crit(const SystemParams& p) {
  const double chi = effective_chi(p);
  if (chi <= 0.0) throw domain_error("n_crit: chi must be positive");
  return p.j / (4.0 * chi);
}

struct ValidityCondition {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ValidityReport {
  std::vector<ValidityCondition> conditions;
  double tol = 0.1;
  bool all_pass() const {
    for (const auto& c : conditions)
      if (!c.pass) return false;
    return true;
  }
};

// Every condition uses strict '<'.  Stability is measured against kappa_tot,
// the RWA ratios against j; j = 0 marks the j-based ratios as failed.
inline ValidityReport validity_report(const SystemParams& p, double tol = 0.1,
                                      std::optional<double> nbar = std::nullopt) {
  ValidityReport r;
  r.tol = tol;
  auto add = [&r](const char* name, double value, double threshold) {
    r.conditions.push_back({name, value, threshold, value < threshold});
  };
  add("lambda < kappa_tot/2", p.lambda, p.kappa_tot() / 2.0);
  const double inf = std::numeric_limits<double>::infinity();
  if (p.j > 0.0) {
    const double chi = effective_chi(p);
    add("lambda/(4 j) < tol", p.lambda / (4.0 * p.j), tol);
    add("lambda*chi/(4 j^2) < tol", p.lambda * chi / (4.0 * p.j * p.j), tol);
    add("g/j < tol", p.g / p.j, tol);
    add("kappa/j < tol", p.kappa / p.j, tol);
  } else {
    add("lambda/(4 j) < tol", inf, tol);
    add("lambda*chi/(4 j^2) < tol", inf, tol);
    add("g/j < tol", inf, tol);
    add("kappa/j < tol", inf, tol);
  }
  if (nbar) {
    const double chi = effective_chi(p);
    add("nbar < n_crit", *nbar, chi > 0.0 ? n_crit(p) : inf);
  }
  return r;
}

// basic invariants shared by config loading and the CLI
inline void check_params(const SystemParams& p) {
  if (!(p.kappa > 0.0)) throw domain_error("kappa must be positive");
  if (p.kappa_int < 0.0) throw domain_error("kappa_int must be non-negative");
  if (p.kappa_left_int < 0.0) throw domain_error("kappa_left_int must be non-negative");
  if (p.g < 0.0) throw domain_error("g must be non-negative");
  if (p.lambda < 0.0) throw domain_error("lambda must be non-negative");
  if (p.j < 0.0) throw domain_error("j must be non-negative");
  if (p.eta < 0.0 || p.eta > 1.0) throw domain_error("eta must lie in [0,1]");
  if ((p.g > 0.0 || p.lambda > 0.0) && p.j <= 0.0 && !p.chi)
    throw domain_error("j is required when g or lambda is nonzero");
}

// flat key=value config; '#' starts a comment, blank lines ignored
inline std::map<std::string, double> parse_config(std::istream& in) {
  static const char* known[] = {"omega_c", "omega_q", "omega_p", "j",     "g",
                                "lambda",  "kappa",   "kappa_int", "kappa_left_int", "eta"};
  std::map<std::string, double> out;
  std::string line;
  auto trim = [](std::string s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw domain_error("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw domain_error("config: unknown key '" + key + "'");
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(val, &used);
    } catch (const std::exception&) {
      throw domain_error("config: invalid number for key '" + key + "'");
    }
    if (used != val.size())
      throw domain_error("config: invalid number for key '" + key + "'");
    out[key] = x;
  }
  return out;
}

inline void apply_config(SystemParams& p, const std::map<std::string, double>& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "omega_c") p.omega_c = v;
    else if (k == "omega_q") p.omega_q = v;
    else if (k == "omega_p") p.omega_p = v;
    else if (k == "j") p.j = v;
    else if (k == "g") p.g = v;
    else if (k == "lambda") p.lambda = v;
    else if (k == "kappa") p.kappa = v;
    else if (k == "kappa_int") p.kappa_int = v;
    else if (k == "kappa_left_int") p.kappa_left_int = v;
    else if (k == "eta") p.eta = v;
  }
}

inline SystemParams load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open config file: " + path);
  SystemParams p;
  apply_config(p, parse_config(in));
  check_params(p);
  return p;
}

}  // namespace istms
