#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "istms/istms.hpp"

namespace {

using namespace istms;

struct CommonOpts {
  std::optional<double> omega_c, omega_q, omega_p, j, g, lambda, kappa, kappa_int,
      kappa_left_int, eta, chi;
  std::string config_path;
  std::string output;
  std::string format = "csv";
  bool plot = false;
  int workers = std::max(1u, std::thread::hardware_concurrency());
  std::string timestamp;
};

void add_param_flags(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--omega-c", o.omega_c, "cavity frequency (kappa units)");
  sub->add_option("--omega-q", o.omega_q, "qubit frequency");
  sub->add_option("--omega-p", o.omega_p, "pump frequency");
  sub->add_option("--j", o.j, "tunnel coupling between the cavities");
  sub->add_option("--g", o.g, "qubit-cavity coupling");
  sub->add_option("--lambda", o.lambda, "parametric drive amplitude");
  sub->add_option("--kappa", o.kappa, "output-port decay rate (default 1)");
  sub->add_option("--kappa-int", o.kappa_int, "internal cavity decay rate");
  sub->add_option("--kappa-left-int", o.kappa_left_int, "left-cavity internal decay rate");
  sub->add_option("--eta", o.eta, "external transmission loss fraction");
  sub->add_option("--chi", o.chi, "dispersive shift override (otherwise derived from g, j)");
  sub->add_option("--config", o.config_path,
                  "key=value config file; ISTMS_CONFIG supplies a default path");
  sub->add_option("--output", o.output, "write data to this file instead of stdout");
  sub->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--plot", o.plot, "write an SVG chart next to --output");
  sub->add_option("--workers", o.workers, "worker threads for sweep grids");
  sub->add_option("--timestamp", o.timestamp, "manifest timestamp (default: current UTC)");
}

std::string now_utc() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

SystemParams make_params(const CommonOpts& o) {
  SystemParams p;
  std::string cfg = o.config_path;
  if (cfg.empty()) {
    if (const char* env = std::getenv("ISTMS_CONFIG")) cfg = env;
  }
  if (!cfg.empty()) {
    std::ifstream in(cfg);
    if (!in) throw domain_error("cannot open config file: " + cfg);
    apply_config(p, parse_config(in));
  }
  if (o.omega_c) p.omega_c = *o.omega_c;
  if (o.omega_q) p.omega_q = *o.omega_q;
  if (o.omega_p) p.omega_p = *o.omega_p;
  if (o.j) p.j = *o.j;
  if (o.g) p.g = *o.g;
  if (o.lambda) p.lambda = *o.lambda;
  if (o.kappa) p.kappa = *o.kappa;
  if (o.kappa_int) p.kappa_int = *o.kappa_int;
  if (o.kappa_left_int) p.kappa_left_int = *o.kappa_left_int;
  if (o.eta) p.eta = *o.eta;
  if (o.chi) p.chi = *o.chi;
  return p;
}

ManifestInfo make_info(const CommonOpts& o) {
  ManifestInfo info;
  info.timestamp = o.timestamp.empty() ? now_utc() : o.timestamp;
  return info;
}

DriveConfig make_drive(const std::optional<double>& nbar0, const std::optional<double>& beta,
                       int sigma) {
  if (nbar0 && beta) throw domain_error("--nbar0 and --beta are mutually exclusive");
  if (!nbar0 && !beta) throw domain_error("a drive is required: pass --nbar0 or --beta");
  return nbar0 ? DriveConfig::from_nbar0(*nbar0, sigma) : DriveConfig::from_beta(*beta, sigma);
}

int col_index(const SweepResult& r, const std::string& name) {
  for (std::size_t i = 0; i < r.columns.size(); ++i)
    if (r.columns[i] == name) return static_cast<int>(i);
  throw domain_error("no column named " + name);
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

SvgSeries column_series(const SweepResult& r, const std::string& x, const std::string& y,
                        const std::string& label) {
  const int xi = col_index(r, x), yi = col_index(r, y);
  SvgSeries s;
  s.label = label;
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (r.status[i] == "ok") s.points.emplace_back(r.rows[i][xi], r.rows[i][yi]);
  return s;
}

// one series per distinct value of the group column, in first-seen order
std::vector<SvgSeries> grouped_series(const SweepResult& r, const std::string& group,
                                      const std::string& x, const std::string& y) {
  const int gi = col_index(r, group), xi = col_index(r, x), yi = col_index(r, y);
  std::vector<double> keys;
  std::vector<SvgSeries> out;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (r.status[i] != "ok") continue;
    const double k = r.rows[i][gi];
    std::size_t gidx = keys.size();
    for (std::size_t q = 0; q < keys.size(); ++q)
      if (keys[q] == k) {
        gidx = q;
        break;
      }
    if (gidx == keys.size()) {
      keys.push_back(k);
      out.push_back(SvgSeries{group + "=" + short_num(k), {}});
    }
    out[gidx].points.emplace_back(r.rows[i][xi], r.rows[i][yi]);
  }
  return out;
}

void emit(const SweepResult& r, const CommonOpts& o, const std::vector<SvgSeries>& series,
          const std::string& title, const std::string& xl, const std::string& yl) {
  std::string data = o.format == "json" ? to_json(r).dump(2) + "\n" : to_csv(r);
  if (o.output.empty()) {
    std::cout << data;
  } else {
    std::ofstream f(o.output, std::ios::binary);
    f << data;
    if (!f) throw domain_error("cannot write " + o.output);
  }
  if (o.plot) {
    if (o.output.empty()) throw domain_error("--plot requires --output");
    if (series.empty()) {
      std::cerr << "note: nothing to plot\n";
      return;
    }
    std::ofstream f(o.output + ".svg", std::ios::binary);
    write_svg_chart(f, series, title, xl, yl);
    if (!f) throw domain_error("cannot write " + o.output + ".svg");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dispersive readout with in-situ two-mode squeezing: analytics and solvers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "istms 1.0.0");

  CommonOpts o;

  auto* c_validate = app.add_subcommand("validate", "evaluate parameter validity conditions");
  add_param_flags(c_validate, o);
  double tol = 0.1;
  std::optional<double> v_nbar;
  c_validate->add_option("--tol", tol, "threshold for the 'much less than' conditions");
  c_validate->add_option("--nbar", v_nbar, "include the nbar < n_crit condition");

  auto* c_snr = app.add_subcommand("snr", "SNR(tau) table for a coherent readout drive");
  add_param_flags(c_snr, o);
  std::optional<double> snr_nbar0, snr_beta;
  int snr_sigma = 1, snr_points = 100;
  double snr_tau = 100.0, snr_tau_min = 0.0;
  c_snr->add_option("--nbar0", snr_nbar0, "intracavity coherent photon number");
  c_snr->add_option("--beta", snr_beta, "input drive amplitude |beta|");
  c_snr->add_option("--sigma", snr_sigma, "qubit eigenvalue (+1 or -1)");
  c_snr->add_option("--tau", snr_tau, "largest integration time");
  c_snr->add_option("--tau-min", snr_tau_min, "smallest integration time (default tau/points)");
  c_snr->add_option("--points", snr_points, "number of table rows");

  auto* c_tau = app.add_subcommand("tau-star", "integration time reaching a target fidelity");
  add_param_flags(c_tau, o);
  std::optional<double> tau_nbar0, tau_beta;
  int tau_sigma = 1;
  double tau_f = 0.9999;
  c_tau->add_option("--nbar0", tau_nbar0, "intracavity coherent photon number");
  c_tau->add_option("--beta", tau_beta, "input drive amplitude |beta|");
  c_tau->add_option("--sigma", tau_sigma, "qubit eigenvalue (+1 or -1)");
  c_tau->add_option("--f-target", tau_f, "target assignment fidelity");

  auto* c_spec = app.add_subcommand("spectrum", "output squeezing spectrum vs omega");
  add_param_flags(c_spec, o);
  std::vector<double> spec_chi;
  int spec_points = 2001;
  c_spec->add_option("--chi-list", spec_chi, "dispersive shifts (default 0.001 0.1 0.5 1)");
  c_spec->add_option("--points", spec_points, "omega grid size");

  auto* c_dos = app.add_subcommand("dos", "density of states of both cavities");
  add_param_flags(c_dos, o);
  int dos_points = 4001;
  c_dos->add_option("--points", dos_points, "omega grid size");

  auto* c_jc = app.add_subcommand("jc-compare",
                                  "steady-state error of the dispersive model vs the full one");
  add_param_flags(c_jc, o);
  int jc_nmax = 16;
  long long jc_direct = 200000;
  std::vector<double> jc_lambda;
  bool jc_unique = false;
  c_jc->add_option("--n-max", jc_nmax, "Fock truncation per mode");
  c_jc->add_option("--lambda-grid", jc_lambda, "drive amplitudes (default 8 points up to threshold)");
  c_jc->add_option("--direct-limit", jc_direct, "max rows for the sparse direct solver");
  c_jc->add_flag("--check-uniqueness", jc_unique, "verify independence of the initial state");

  auto* c_loss = app.add_subcommand("loss", "tau-star under external or internal loss");
  add_param_flags(c_loss, o);
  std::vector<double> loss_eta, loss_eps, loss_nbar;
  double loss_f = 0.9999;
  c_loss->add_option("--eta-list", loss_eta, "external loss fractions");
  c_loss->add_option("--epsilon-list", loss_eps, "internal loss fractions");
  c_loss->add_option("--nbar-grid", loss_nbar, "total photon-number grid");
  c_loss->add_option("--f-target", loss_f, "target assignment fidelity");

  auto* c_fig3 = app.add_subcommand("fig3", "tau-star vs total photon number, with/without drive");
  add_param_flags(c_fig3, o);
  std::string fig3_mode = "threshold";
  std::vector<double> fig3_nbar;
  double fig3_f = 0.9999;
  c_fig3->add_option("--lambda-mode", fig3_mode, "drive amplitude rule")
      ->check(CLI::IsMember({"zero", "threshold"}));
  c_fig3->add_option("--nbar-grid", fig3_nbar, "total photon-number grid");
  c_fig3->add_option("--f-target", fig3_f, "target assignment fidelity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const ManifestInfo info = make_info(o);

    if (*c_validate) {
      SystemParams p = make_params(o);
      check_params(p);
      const ValidityReport rep = validity_report(p, tol, v_nbar);
      std::printf("parameter validity report (tol = %g)\n", rep.tol);
      for (const auto& c : rep.conditions)
        std::printf("  %-22s %12s vs %-12s %s\n", c.name.c_str(), short_num(c.value).c_str(),
                    short_num(c.threshold).c_str(), c.pass ? "pass" : "fail");
      std::printf("overall: %s\n", rep.all_pass() ? "pass" : "fail");
      return 0;
    }

    if (*c_snr || *c_tau) {
      SystemParams p = make_params(o);
      check_params(p);
      if (p.eta > 0.0 && p.kappa_int > 0.0)
        throw domain_error("set only one of --eta and --kappa-int");
      const bool is_snr = static_cast<bool>(*c_snr);
      const DriveConfig d = is_snr ? make_drive(snr_nbar0, snr_beta, snr_sigma)
                                   : make_drive(tau_nbar0, tau_beta, tau_sigma);
      auto fn = [&](double t) {
        if (p.eta > 0.0) return snr_ext(t, p, d, p.eta);
        if (p.kappa_int > 0.0) return snr_int(t, p, d, p.epsilon());
        return snr(t, p, d);
      };
      SweepResult r;
      if (is_snr) {
        if (snr_points < 1) throw domain_error("--points must be positive");
        if (snr_tau <= 0.0) throw domain_error("--tau must be positive");
        const double lo = snr_tau_min > 0.0 ? snr_tau_min : snr_tau / snr_points;
        r.manifest = base_manifest("snr", p, info);
        r.manifest["grid"] = {{"tau_min", lo}, {"tau_max", snr_tau}, {"points", snr_points},
                              {"sigma", d.sigma},
                              {"drive", d.is_beta ? "beta" : "nbar0"}, {"value", d.value}};
        r.columns = {"tau", "signal", "noise", "snr", "snr_sq", "rate_longtime",
                     "snr_sq_longtime"};
        for (double t : linspace(lo, snr_tau, snr_points)) {
          const SnrResult s = fn(t);
          r.rows.push_back({t, s.signal, s.noise, s.snr, s.snr * s.snr, s.rate_longtime,
                            s.rate_longtime * t});
          r.status.push_back("ok");
        }
        emit(r, o, {column_series(r, "tau", "snr", "SNR")}, "readout SNR", "kappa tau", "SNR");
      } else {
        const double ts = tau_star(p, d, tau_f, fn);
        const SnrResult s = fn(ts);
        r.manifest = base_manifest("tau_star", p, info);
        r.manifest["grid"] = {{"f_target", tau_f}, {"sigma", d.sigma},
                              {"drive", d.is_beta ? "beta" : "nbar0"}, {"value", d.value}};
        r.columns = {"f_target", "snr_target", "tau_star", "snr", "rate_longtime"};
        r.rows.push_back({tau_f, snr_from_fidelity(tau_f), ts, s.snr, s.rate_longtime});
        r.status.push_back("ok");
        emit(r, o, {}, "", "", "");
      }
      return 0;
    }

    if (*c_spec) {
      SystemParams p = make_params(o);
      if (!o.lambda && p.lambda == 0.0) p.lambda = p.kappa / 4.0;
      SystemParams pv = p;
      if (!pv.chi) pv.chi = 0.0;  // every grid point carries its own chi
      check_params(pv);
      const SweepResult r = fig2_spectrum(p, spec_chi, spec_points, info, o.workers);
      emit(r, o, grouped_series(r, "chi", "omega", "s_out_db"), "output squeezing spectrum",
           "omega / kappa", "S_out (dB)");
      return 0;
    }

    if (*c_dos) {
      SystemParams p = make_params(o);
      if (!o.j && p.j == 0.0) p.j = 5.0 * p.kappa;
      check_params(p);
      const SweepResult r = fig4_dos(p, dos_points, info, o.workers);
      emit(r, o,
           {column_series(r, "omega", "dos_right", "right cavity"),
            column_series(r, "omega", "dos_left", "left cavity")},
           "cavity density of states", "omega / kappa", "DoS * kappa");
      return 0;
    }

    if (*c_jc) {
      SystemParams p = make_params(o);
      if (!o.j && p.j == 0.0) p.j = 10.0 * p.kappa;
      if (!o.g && p.g == 0.0) p.g = p.kappa;
      check_params(p);
      if (jc_nmax < 1) throw domain_error("--n-max must be at least 1");
      HilbertConfig h;
      h.n_max_even = jc_nmax;
      h.n_max_odd = jc_nmax;
      SteadyStateOptions s;
      s.direct_limit = jc_direct;
      s.check_uniqueness = jc_unique;
      const SweepResult r = fig6_jc(jc_lambda, p, h, s, info, o.workers);
      emit(r, o,
           {column_series(r, "lambda", "full_error", "full-state error"),
            column_series(r, "lambda", "qubit_error", "qubit error")},
           "dispersive-model error", "lambda / kappa", "error");
      return 0;
    }

    if (*c_loss) {
      SystemParams p = make_params(o);
      check_params(p);
      const double chi = o.chi ? *o.chi : 0.05 * p.kappa;
      std::vector<LossSetting> list;
      for (double v : loss_eta) list.push_back({"external", v});
      for (double v : loss_eps) list.push_back({"internal", v});
      const SweepResult r = fig5_loss(chi, list, loss_nbar, p, loss_f, info, o.workers);
      std::vector<SvgSeries> series;
      for (auto& s : grouped_series(r, "eta", "nbar_total", "tau_star")) series.push_back(s);
      emit(r, o, series, "measurement time under loss", "total nbar", "kappa tau*");
      return 0;
    }

    if (*c_fig3) {
      SystemParams p = make_params(o);
      check_params(p);
      const double chi = o.chi ? *o.chi : 0.01 * p.kappa;
      const LambdaMode mode = fig3_mode == "zero" ? LambdaMode::zero : LambdaMode::threshold;
      const SweepResult r = fig3_tau_star(chi, mode, fig3_nbar, p, fig3_f, info, o.workers);
      emit(r, o,
           {column_series(r, "nbar_total", "tau_star_istms", "with squeezing"),
            column_series(r, "nbar_total", "tau_star_standard", "standard, same chi"),
            column_series(r, "nbar_total", "tau_star_strong", "standard, chi=kappa/2")},
           "measurement time", "total nbar", "kappa tau*");
      return 0;
    }

    throw domain_error("no subcommand selected");
  } catch (const convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
