#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "analytic.hpp"
#include "errors.hpp"
#include "lindblad.hpp"
#include "params.hpp"
#include "spectra.hpp"

namespace istms {

struct ManifestInfo {
  std::string tool = "istms";
  std::string version = "1.0.0";
  std::string timestamp;
};

struct SweepResult {
  nlohmann::json manifest;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> status;  // one tag per row: "ok", "invalid", or "error: ..."
};

inline std::string format_g17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw domain_error("linspace: need at least one point");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return v;
}

inline std::vector<double> logspace(double exp_a, double exp_b, int n) {
  std::vector<double> v = linspace(exp_a, exp_b, n);
  for (double& x : v) x = std::pow(10.0, x);
  return v;
}

inline nlohmann::json params_json(const SystemParams& p) {
  nlohmann::json j;
  j["omega_c"] = p.omega_c;
  j["omega_q"] = p.omega_q;
  j["omega_p"] = p.omega_p;
  j["j"] = p.j;
  j["g"] = p.g;
  j["lambda"] = p.lambda;
  j["kappa"] = p.kappa;
  j["kappa_int"] = p.kappa_int;
  j["kappa_left_int"] = p.kappa_left_int;
  j["eta"] = p.eta;
  if (p.chi)
    j["chi_override"] = *p.chi;
  else
    j["chi_override"] = nullptr;
  return j;
}

inline nlohmann::json base_manifest(const std::string& sweep, const SystemParams& p,
                                    const ManifestInfo& info) {
  nlohmann::json m;
  m["sweep"] = sweep;
  m["tool"] = info.tool;
  m["version"] = info.version;
  m["timestamp"] = info.timestamp;
  m["params"] = params_json(p);
  return m;
}

inline void write_csv(std::ostream& out, const SweepResult& r) {
  out << "# manifest: " << r.manifest.dump() << "\n";
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    if (i) out << ",";
    out << r.columns[i];
  }
  out << ",status\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    for (std::size_t c = 0; c < r.rows[i].size(); ++c) {
      if (c) out << ",";
      out << format_g17(r.rows[i][c]);
    }
    out << "," << (i < r.status.size() ? r.status[i] : "ok") << "\n";
  }
}

inline std::string to_csv(const SweepResult& r) {
  std::ostringstream s;
  write_csv(s, r);
  return s.str();
}

inline nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json j;
  j["manifest"] = r.manifest;
  j["columns"] = r.columns;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json jr = nlohmann::json::array();
    for (double v : row) {
      if (std::isfinite(v))
        jr.push_back(v);
      else
        jr.push_back(nullptr);
    }
    j["rows"].push_back(std::move(jr));
  }
  j["status"] = r.status;
  return j;
}

inline SweepResult parse_csv(std::istream& in) {
  SweepResult r;
  std::string line;
  if (!std::getline(in, line)) throw domain_error("parse_csv: empty input");
  const std::string prefix = "# manifest: ";
  if (line.rfind(prefix, 0) != 0) throw domain_error("parse_csv: missing manifest line");
  r.manifest = nlohmann::json::parse(line.substr(prefix.size()));
  if (!std::getline(in, line)) throw domain_error("parse_csv: missing column header");
  std::stringstream hs(line);
  std::string cell;
  std::vector<std::string> header;
  while (std::getline(hs, cell, ',')) header.push_back(cell);
  if (header.empty() || header.back() != "status")
    throw domain_error("parse_csv: last column must be status");
  header.pop_back();
  r.columns = header;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != r.columns.size() + 1) throw domain_error("parse_csv: ragged row");
    std::vector<double> row(r.columns.size());
    for (std::size_t c = 0; c < r.columns.size(); ++c) {
      char* end = nullptr;
      row[c] = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str()) throw domain_error("parse_csv: bad number '" + cells[c] + "'");
    }
    r.rows.push_back(std::move(row));
    r.status.push_back(cells.back());
  }
  return r;
}

// fixed-index task pool: results land in grid order regardless of worker count
inline void run_grid(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) workers = 1;
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

inline void mark_error(SweepResult& r, std::size_t i, const std::string& what) {
  for (double& v : r.rows[i]) v = std::numeric_limits<double>::quiet_NaN();
  r.status[i] = "error: " + what;
}

}  // namespace detail

inline SystemParams fig2_base() {
  SystemParams p;
  p.lambda = p.kappa / 4.0;
  return p;
}

// output squeezing spectrum rows (chi, omega, s_out, s_out_db)
inline SweepResult fig2_spectrum(const SystemParams& base = fig2_base(),
                                 std::vector<double> chi_list = {},
                                 int points = 2001, const ManifestInfo& info = {},
                                 int workers = 1) {
  if (chi_list.empty())
    chi_list = {0.001 * base.kappa, 0.1 * base.kappa, 0.5 * base.kappa, base.kappa};
  const std::vector<double> omega = linspace(-10.0 * base.kappa, 10.0 * base.kappa, points);
  SweepResult r;
  r.manifest = base_manifest("fig2_spectrum", base, info);
  r.manifest["grid"] = {{"chi", chi_list}, {"omega_min", omega.front()},
                        {"omega_max", omega.back()}, {"points", points}};
  r.columns = {"chi", "omega", "s_out", "s_out_db"};
  const std::size_t n = chi_list.size() * omega.size();
  r.rows.assign(n, std::vector<double>(r.columns.size(), 0.0));
  r.status.assign(n, "ok");
  run_grid(n, workers, [&](std::size_t i) {
    const std::size_t ci = i / omega.size();
    const std::size_t wi = i % omega.size();
    SystemParams p = base;
    p.chi = chi_list[ci];
    try {
      const double s = squeezing_spectrum(omega[wi], p);
      r.rows[i] = {chi_list[ci], omega[wi], s, spectrum_db(omega[wi], p)};
    } catch (const std::exception& e) {
      detail::mark_error(r, i, e.what());
      r.rows[i][0] = chi_list[ci];
      r.rows[i][1] = omega[wi];
    }
  });
  return r;
}

enum class LambdaMode { zero, threshold };

inline std::vector<double> default_nbar_grid(double n_sqz_floor) {
  const double lo = std::max(n_sqz_floor + 1.5, 2.0);
  return logspace(std::log10(lo), 4.0, 25);
}

// rows (nbar_total, nbar0_istms, tau_star_istms, tau_star_standard, tau_star_strong, ratio)
// standard: lambda=0 at the same chi; strong: lambda=0 at chi=kappa/2
inline SweepResult fig3_tau_star(double chi, LambdaMode lambda_mode = LambdaMode::threshold,
                                 std::vector<double> nbar_grid = {},
                                 const SystemParams& base = SystemParams{},
                                 double f_target = 0.9999, const ManifestInfo& info = {},
                                 int workers = 1) {
  SystemParams p = base;
  p.chi = chi;
  const double lam =
      lambda_mode == LambdaMode::threshold ? p.kappa / 2.0 - chi : 0.0;
  if (lam < 0.0) throw domain_error("fig3_tau_star: chi above kappa/2 has no threshold drive");
  SystemParams pi = p;
  pi.lambda = lam;
  const double nsq = lam > 0.0 ? n_sqz(pi) : 0.0;
  if (nbar_grid.empty()) nbar_grid = default_nbar_grid(nsq);

  SweepResult r;
  r.manifest = base_manifest("fig3_tau_star", pi, info);
  r.manifest["grid"] = {{"chi", chi},
                        {"lambda_mode", lambda_mode == LambdaMode::threshold ? "threshold" : "zero"},
                        {"lambda", lam},
                        {"n_sqz", nsq},
                        {"f_target", f_target},
                        {"nbar_total", nbar_grid}};
  r.columns = {"nbar_total", "nbar0_istms", "tau_star_istms", "tau_star_standard",
               "tau_star_strong", "ratio"};
  r.rows.assign(nbar_grid.size(), std::vector<double>(r.columns.size(), 0.0));
  r.status.assign(nbar_grid.size(), "ok");

  run_grid(nbar_grid.size(), workers, [&](std::size_t i) {
    const double ntot = nbar_grid[i];
    const double n0 = ntot - nsq;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double>& row = r.rows[i];
    row = {ntot, n0, nan, nan, nan, nan};
    try {
      SystemParams ps = p;
      ps.lambda = 0.0;
      row[3] = tau_star(ps, DriveConfig::from_nbar0(ntot), f_target);
      SystemParams pg = p;
      pg.lambda = 0.0;
      pg.chi = pg.kappa / 2.0;
      row[4] = tau_star(pg, DriveConfig::from_nbar0(ntot), f_target);
      if (n0 < 1.0) {
        r.status[i] = "invalid";
        return;
      }
      row[2] = tau_star(pi, DriveConfig::from_nbar0(n0), f_target);
      row[5] = row[3] / row[2];
    } catch (const std::exception& e) {
      r.status[i] = std::string("error: ") + e.what();
    }
  });
  return r;
}

struct LossSetting {
  std::string kind;  // "external" or "internal"
  double value = 0.0;
};

// rows (eta, epsilon, nbar_total, nbar0, n_sqz, tau_star)
inline SweepResult fig5_loss(double chi = 0.05, std::vector<LossSetting> loss_list = {},
                             std::vector<double> nbar_grid = {},
                             const SystemParams& base = SystemParams{},
                             double f_target = 0.9999, const ManifestInfo& info = {},
                             int workers = 1) {
  if (loss_list.empty())
    loss_list = {{"external", 0.0}, {"external", 0.01}, {"external", 0.1},
                 {"internal", 0.01}, {"internal", 0.1}};
  SystemParams p = base;
  p.chi = chi;
  if (nbar_grid.empty()) {
    SystemParams pt = p;
    pt.lambda = pt.kappa / 2.0 - chi;
    nbar_grid = logspace(std::log10(n_sqz(pt) + 2.0), 3.0, 13);
  }
  SweepResult r;
  r.manifest = base_manifest("fig5_loss", p, info);
  nlohmann::json jl = nlohmann::json::array();
  for (const auto& ls : loss_list) jl.push_back({{"kind", ls.kind}, {"value", ls.value}});
  r.manifest["grid"] = {{"chi", chi}, {"f_target", f_target}, {"loss", jl},
                        {"nbar_total", nbar_grid}};
  r.columns = {"eta", "epsilon", "nbar_total", "nbar0", "n_sqz", "tau_star"};
  const std::size_t n = loss_list.size() * nbar_grid.size();
  r.rows.assign(n, std::vector<double>(r.columns.size(), 0.0));
  r.status.assign(n, "ok");

  run_grid(n, workers, [&](std::size_t i) {
    const auto& ls = loss_list[i / nbar_grid.size()];
    const double ntot = nbar_grid[i % nbar_grid.size()];
    const bool internal = ls.kind == "internal";
    if (!internal && ls.kind != "external") {
      detail::mark_error(r, i, "unknown loss kind '" + ls.kind + "'");
      return;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double eta = internal ? 0.0 : ls.value;
    const double eps = internal ? ls.value : 0.0;
    std::vector<double>& row = r.rows[i];
    row = {eta, eps, ntot, nan, nan, nan};
    try {
      SystemParams ps = p;
      const double kappa_tot = internal ? ps.kappa / (1.0 - eps) : ps.kappa;
      ps.lambda = kappa_tot / 2.0 - chi;
      if (internal) ps.kappa_int = ps.kappa * eps / (1.0 - eps);
      const double nsq = internal ? n_sqz_tot(ps) : n_sqz(ps);
      const double n0 = ntot - nsq;
      row[4] = nsq;
      row[3] = n0;
      if (n0 < 1.0) {
        r.status[i] = "invalid";
        return;
      }
      const DriveConfig d = DriveConfig::from_nbar0(n0);
      auto fn = [&](double tau) {
        return internal ? snr_int(tau, ps, d, eps) : snr_ext(tau, ps, d, eta);
      };
      row[5] = tau_star(ps, d, f_target, fn);
    } catch (const std::exception& e) {
      r.status[i] = std::string("error: ") + e.what();
    }
  });
  return r;
}

inline SystemParams fig4_base() {
  SystemParams p;
  p.j = 5.0 * p.kappa;
  return p;
}

// rows (omega, dos_right, dos_left)
inline SweepResult fig4_dos(const SystemParams& base = fig4_base(), int points = 4001,
                            const ManifestInfo& info = {}, int workers = 1) {
  if (base.j <= 0.0) throw domain_error("fig4_dos: j must be positive");
  const std::vector<double> omega = linspace(-2.0 * base.j, 2.0 * base.j, points);
  SweepResult r;
  r.manifest = base_manifest("fig4_dos", base, info);
  r.manifest["grid"] = {{"omega_min", omega.front()}, {"omega_max", omega.back()},
                        {"points", points}};
  r.columns = {"omega", "dos_right", "dos_left"};
  r.rows.assign(omega.size(), std::vector<double>(r.columns.size(), 0.0));
  r.status.assign(omega.size(), "ok");
  run_grid(omega.size(), workers, [&](std::size_t i) {
    try {
      r.rows[i] = {omega[i], dos_right(omega[i], base), dos_left(omega[i], base)};
    } catch (const std::exception& e) {
      detail::mark_error(r, i, e.what());
      r.rows[i][0] = omega[i];
    }
  });
  return r;
}

inline SystemParams fig6_base() {
  SystemParams p;
  p.j = 10.0 * p.kappa;
  p.g = p.kappa;
  return p;
}

// rows (lambda, full_error, qubit_error, p_e, mean_n_even, mean_n_odd,
//       residual_jc, residual_disp)
inline SweepResult fig6_jc(std::vector<double> lambda_grid = {},
                           const SystemParams& base = fig6_base(),
                           const HilbertConfig& hilbert = HilbertConfig{},
                           const SteadyStateOptions& solver = {},
                           const ManifestInfo& info = {}, int workers = 1) {
  SystemParams p = base;
  if (lambda_grid.empty()) {
    const double chi = effective_chi(p);
    const double top = p.kappa / 2.0 - chi;
    for (int k = 1; k <= 8; ++k) lambda_grid.push_back(top * k / 8.0);
  }
  SweepResult r;
  r.manifest = base_manifest("fig6_jc", p, info);
  r.manifest["grid"] = {{"lambda", lambda_grid},
                        {"n_max_even", hilbert.n_max_even},
                        {"n_max_odd", hilbert.n_max_odd}};
  r.columns = {"lambda", "full_error", "qubit_error", "p_e", "mean_n_even",
               "mean_n_odd", "residual_jc", "residual_disp"};
  r.rows.assign(lambda_grid.size(), std::vector<double>(r.columns.size(), 0.0));
  r.status.assign(lambda_grid.size(), "ok");
  run_grid(lambda_grid.size(), workers, [&](std::size_t i) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double>& row = r.rows[i];
    row = {lambda_grid[i], nan, nan, nan, nan, nan, nan, nan};
    try {
      SystemParams pj = p;
      pj.lambda = lambda_grid[i];
      const JcComparison c = jc_vs_dispersive_error(pj, hilbert, solver);
      row = {c.lambda,      c.full_error,  c.qubit_error, c.p_e,
             c.mean_n_even, c.mean_n_odd,  c.residual_jc, c.residual_disp};
    } catch (const std::exception& e) {
      r.status[i] = std::string("error: ") + e.what();
    }
  });
  return r;
}

}  // namespace istms
