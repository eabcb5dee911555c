#pragma once

#include <cmath>
#include <functional>

#include "errors.hpp"
#include "params.hpp"
#include "special.hpp"

namespace istms {

// coherent drive, parameterized by either the intracavity photon number
// nbar0 or the input amplitude |beta|; sigma is the qubit eigenvalue
struct DriveConfig {
  double value = 0.0;
  bool is_beta = false;
  int sigma = +1;
  double t0 = 0.0;

  static DriveConfig from_nbar0(double n, int sigma = +1) {
    if (n < 0.0) throw domain_error("DriveConfig: nbar0 must be non-negative");
    if (sigma != 1 && sigma != -1) throw domain_error("DriveConfig: sigma must be +1 or -1");
    return {n, false, sigma, 0.0};
  }
  static DriveConfig from_beta(double b, int sigma = +1) {
    if (b < 0.0) throw domain_error("DriveConfig: beta must be non-negative");
    if (sigma != 1 && sigma != -1) throw domain_error("DriveConfig: sigma must be +1 or -1");
    return {b, true, sigma, 0.0};
  }
};

inline double beta_to_n0(const SystemParams& p, double beta_flux) {
  if (p.lambda >= p.kappa / 2.0) throw instability_error("beta_to_n0: lambda >= kappa/2");
  const double chi = effective_chi(p);
  const double nu = p.lambda + p.kappa / 2.0;
  return p.kappa * beta_flux * beta_flux / (nu * nu + chi * chi);
}

inline double n0_to_beta(const SystemParams& p, double nbar0) {
  if (p.lambda >= p.kappa / 2.0) throw instability_error("n0_to_beta: lambda >= kappa/2");
  const double chi = effective_chi(p);
  const double nu = p.lambda + p.kappa / 2.0;
  return std::sqrt(nbar0 * (nu * nu + chi * chi) / p.kappa);
}

inline double drive_n0(const SystemParams& p, const DriveConfig& d) {
  return d.is_beta ? beta_to_n0(p, d.value) : d.value;
}

namespace detail {

inline double sinc(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

}  // namespace detail

// mean output quadrature <X-_out(t)>; smooth through chi -> 0 via sinc
inline double signal_mean(double t, const SystemParams& p, const DriveConfig& d) {
  if (t < 0.0) throw domain_error("signal_mean: t must be non-negative");
  const double kap = p.kappa;
  const double chi = effective_chi(p);
  const double nu = p.lambda + kap / 2.0;
  const double d2 = nu * nu + chi * chi;
  const double n0 = drive_n0(p, d);
  const double x = chi * t;
  const double bracket = 1.0 - (std::cos(x) + nu * t * detail::sinc(x)) * std::exp(-nu * t);
  return -std::sqrt(2.0) * chi * d.sigma * std::sqrt(n0 * kap / d2) * bracket;
}

// M_S(tau) = sqrt(kappa) * Int_0^tau 2 <X-_out(t)> dt, in closed form
inline double integrated_signal(double tau, const SystemParams& p, const DriveConfig& d) {
  if (tau < 0.0) throw domain_error("integrated_signal: tau must be non-negative");
  const double kap = p.kappa;
  const double chi = effective_chi(p);
  const double nu = p.lambda + kap / 2.0;
  const double d2 = nu * nu + chi * chi;
  const double n0 = drive_n0(p, d);
  const double x = chi * tau;
  const double transient =
      (2.0 * nu +
       std::exp(-nu * tau) * ((chi * chi - nu * nu) * tau * detail::sinc(x) - 2.0 * nu * std::cos(x))) /
      d2;
  return -d.sigma * (2.0 * std::sqrt(2.0 * n0) * chi * kap / std::sqrt(d2)) * (tau - transient);
}

// two-time output noise: explicit delta weight plus the smooth part
struct NoiseKernel {
  double delta_weight;  // coefficient of delta(t - t')
  double smooth;
};

inline NoiseKernel noise_kernel(double t, double t_prime, const SystemParams& p) {
  const double kap = p.kappa;
  const double chi = effective_chi(p);
  const double nu = p.lambda + kap / 2.0;
  const double dt = t - t_prime;
  const double smooth =
      -(kap * p.lambda / (2.0 * nu)) * std::exp(-nu * std::abs(dt)) * std::cos(chi * dt);
  return {0.5, smooth};
}

// M_N(tau) = kappa * Int Int [delta(t-t')/2 + smooth(t,t')] dt dt'
inline double integrated_noise(double tau, const SystemParams& p) {
  if (tau < 0.0) throw domain_error("integrated_noise: tau must be non-negative");
  const double kap = p.kappa;
  const double chi = effective_chi(p);
  const double lam = p.lambda;
  const double nu = lam + kap / 2.0;
  const double d2 = nu * nu + chi * chi;
  const double x = chi * tau;
  const double e = std::exp(-nu * tau);
  const double secular = 0.5 * kap * tau * (1.0 - 2.0 * kap * lam / d2);
  const double transient = -(kap * kap * lam / (nu * d2 * d2)) *
                           ((chi * chi - nu * nu) * (1.0 - std::cos(x) * e) -
                            2.0 * chi * nu * std::sin(x) * e);
  return secular + transient;
}

struct SnrResult {
  double tau = 0.0;
  double signal = 0.0;         // M_S(tau), loss-scaled where applicable
  double noise = 0.0;          // M_N(tau), loss-corrected where applicable
  double snr = 0.0;            // |signal| / sqrt(2 noise)
  double rate_longtime = 0.0;  // asymptotic measurement rate
};

inline double gamma_istms(const SystemParams& p, const DriveConfig& d) {
  if (p.lambda >= p.kappa / 2.0) throw instability_error("gamma_istms: lambda >= kappa/2");
  const double chi = effective_chi(p);
  const double n0 = drive_n0(p, d);
  const double hk = p.kappa / 2.0 - p.lambda;
  return 8.0 * n0 * chi * chi * p.kappa / (chi * chi + hk * hk);
}

inline double gamma_standard(double chi, double kappa, double nbar) {
  if (!(kappa > 0.0)) throw domain_error("gamma_standard: kappa must be positive");
  if (chi > kappa / 2.0 + 1e-12 * kappa)
    throw domain_error("gamma_standard: chi > kappa/2 is outside the stated regimes");
  if (std::abs(chi - kappa / 2.0) <= 1e-12 * kappa) return 4.0 * nbar * kappa;
  return 2.0 * nbar * (chi / kappa) * (chi / kappa) * kappa;
}

inline double rate_ratio_weak(const SystemParams& p, const DriveConfig& d) {
  const double chi = effective_chi(p);
  if (chi <= 0.0) throw domain_error("rate_ratio_weak: chi must be positive");
  const double n0 = drive_n0(p, d);
  return n0 / (n0 + p.kappa / (4.0 * chi));
}

inline SnrResult snr(double tau, const SystemParams& p, const DriveConfig& d) {
  if (!(tau > 0.0)) throw domain_error("snr: tau must be positive");
  SnrResult r;
  r.tau = tau;
  r.signal = integrated_signal(tau, p, d);
  r.noise = integrated_noise(tau, p);
  r.snr = r.noise > 0.0 ? std::abs(r.signal) / std::sqrt(2.0 * r.noise) : 0.0;
  if (p.lambda < p.kappa / 2.0)
    r.rate_longtime = gamma_istms(p, d);
  else
    r.rate_longtime = std::numeric_limits<double>::quiet_NaN();
  return r;
}

// external (detection) loss eta: a beam splitter admixing vacuum after the cavity
inline SnrResult snr_ext(double tau, const SystemParams& p, const DriveConfig& d, double eta) {
  if (eta < 0.0 || eta > 1.0) throw domain_error("snr_ext: eta outside [0,1]");
  if (eta == 0.0) return snr(tau, p, d);
  SnrResult r;
  r.tau = tau;
  const double s = integrated_signal(tau, p, d);
  const double n = integrated_noise(tau, p);
  r.signal = std::sqrt(1.0 - eta) * s;
  r.noise = (1.0 - eta) * n + eta * p.kappa * tau / 2.0;
  r.snr = r.noise > 0.0 ? std::abs(r.signal) / std::sqrt(2.0 * r.noise) : 0.0;
  const double chi = effective_chi(p);
  const double n0 = drive_n0(p, d);
  const double hk = p.kappa / 2.0 - p.lambda;
  const double nu = p.lambda + p.kappa / 2.0;
  if (p.lambda < p.kappa / 2.0)
    r.rate_longtime = (1.0 - eta) * 8.0 * n0 * chi * chi * p.kappa /
                      ((1.0 - eta) * (chi * chi + hk * hk) + eta * (nu * nu + chi * chi));
  else
    r.rate_longtime = std::numeric_limits<double>::quiet_NaN();
  return r;
}

// internal loss epsilon = kappa_int / kappa_tot; kappa -> kappa_tot inside M_S, M_N
inline SnrResult snr_int(double tau, const SystemParams& p, const DriveConfig& d, double epsilon) {
  if (epsilon < 0.0 || epsilon >= 1.0) throw domain_error("snr_int: epsilon outside [0,1)");
  if (epsilon == 0.0) return snr(tau, p, d);
  SystemParams pt = p;
  pt.kappa = p.kappa / (1.0 - epsilon);  // kappa_tot
  pt.kappa_int = 0.0;
  const double kt = pt.kappa;
  SnrResult r;
  r.tau = tau;
  const double s = integrated_signal(tau, pt, d);
  const double n = integrated_noise(tau, pt);
  r.signal = (1.0 - epsilon) * s;
  r.noise = (1.0 - epsilon) * n + epsilon * kt * tau / 2.0;
  r.snr = r.noise > 0.0 ? std::abs(r.signal) / std::sqrt(2.0 * r.noise) : 0.0;
  const double chi = effective_chi(pt);
  const double n0 = drive_n0(pt, d);
  const double hk = kt / 2.0 - pt.lambda;
  const double nu = pt.lambda + kt / 2.0;
  if (pt.lambda < kt / 2.0)
    r.rate_longtime = (1.0 - epsilon) * (1.0 - epsilon) * 8.0 * n0 * chi * chi * kt /
                      ((1.0 - epsilon) * (chi * chi + hk * hk) + epsilon * (nu * nu + chi * chi));
  else
    r.rate_longtime = std::numeric_limits<double>::quiet_NaN();
  return r;
}

inline double fidelity_from_snr(double snr_value) {
  if (snr_value < 0.0) throw domain_error("fidelity_from_snr: snr must be non-negative");
  return 1.0 - std::erfc(snr_value / 2.0) / 2.0;
}

inline double snr_from_fidelity(double f) {
  if (!(f > 0.0 && f < 1.0)) throw domain_error("snr_from_fidelity: F outside (0,1)");
  return 2.0 * erfc_inv(2.0 * (1.0 - f));
}

// smallest tau with fidelity_from_snr(snr(tau)) >= f_target; bracketing plus a
// left-to-right scan (the transient SNR can oscillate), then bisection
inline double tau_star(const SystemParams& p, const DriveConfig& d, double f_target = 0.9999,
                       const std::function<SnrResult(double)>& snr_fn = {}) {
  if (!(f_target > 0.5 && f_target < 1.0)) throw domain_error("tau_star: F target outside (0.5,1)");
  if (drive_n0(p, d) <= 0.0) throw domain_error("tau_star: drive must be nonzero");
  if (effective_chi(p) <= 0.0) throw domain_error("tau_star: chi must be positive");
  auto eval = snr_fn ? snr_fn : std::function<SnrResult(double)>(
                                    [&p, &d](double t) { return snr(t, p, d); });
  const double snr_star = snr_from_fidelity(f_target);
  const double tau_max = 1e4 / p.kappa;
  auto f = [&](double t) { return eval(t).snr - snr_star; };

  const double gamma = eval(1.0 / p.kappa).rate_longtime;
  double lo = (gamma > 0.0) ? snr_star * snr_star / (2.0 * gamma) : 1e-3 / p.kappa;
  double hi = (gamma > 0.0) ? 10.0 * snr_star * snr_star / gamma : 1.0 / p.kappa;
  lo = std::min(lo, tau_max);
  hi = std::min(hi, tau_max);
  while (f(hi) < 0.0) {
    if (hi >= tau_max) throw convergence_error("tau_star: fidelity target unreachable by tau_max");
    hi = std::min(hi * 2.0, tau_max);
  }
  while (lo > 1e-12 / p.kappa && f(lo) >= 0.0) lo *= 0.25;
  if (f(lo) >= 0.0) return lo;

  // first crossing from the left on a uniform scan
  const int scan = 1000;
  double a = lo, b = hi;
  double xa = lo, fa = f(lo);
  for (int i = 1; i <= scan; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / scan;
    const double fx = f(x);
    if (fa < 0.0 && fx >= 0.0) {
      a = xa;
      b = x;
      break;
    }
    xa = x;
    fa = fx;
  }
  while (b - a > 1e-6 * b) {
    const double mid = 0.5 * (a + b);
    if (f(mid) >= 0.0)
      b = mid;
    else
      a = mid;
  }
  return b;
}

// steady-state variance of the squeezed quadrature (vacuum = 1/2)
inline double intracavity_variance(const SystemParams& p) {
  if (p.lambda >= p.kappa / 2.0) throw instability_error("intracavity_variance: lambda >= kappa/2");
  return p.kappa / (4.0 * (p.lambda + p.kappa / 2.0));
}

}  // namespace istms
