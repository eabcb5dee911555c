#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "errors.hpp"
#include "params.hpp"

namespace istms {

struct Spectrum {
  std::vector<double> omega_grid;
  std::vector<double> values;
  std::string kind;  // squeezing | squeezing_db | dos_right | dos_left
};

// output squeezing spectrum, sum of two Lorentzians centered at +-chi
inline double squeezing_spectrum(double omega, const SystemParams& p) {
  if (p.lambda >= p.kappa / 2.0) throw instability_error("squeezing_spectrum: lambda >= kappa/2");
  const double chi = effective_chi(p);
  const double nu = p.lambda + p.kappa / 2.0;
  auto lorentz = [nu](double x) { return nu / (nu * nu + x * x); };
  return 0.5 * (1.0 - (p.kappa * p.lambda / nu) * (lorentz(omega + chi) + lorentz(omega - chi)));
}

inline double spectrum_db(double omega, const SystemParams& p) {
  const double s = squeezing_spectrum(omega, p);
  if (s <= 0.0) throw domain_error("spectrum_db: non-positive spectrum value");
  return 10.0 * std::log10(2.0 * s);
}

// 2x2 cavity susceptibility in the (R, L) basis, lambda set to zero
inline Eigen::Matrix2cd susceptibility(double omega, const SystemParams& p) {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> den = i * omega * (i * omega + p.kappa) + p.j * p.j;
  if (std::abs(den) < 1e-14) throw domain_error("susceptibility: singular denominator");
  Eigen::Matrix2cd m;
  m << i * omega, -i * p.j, -i * p.j, i * omega + p.kappa;
  return m / den;
}

inline double dos_right(double omega, const SystemParams& p) {
  const double w2 = omega * omega;
  const double jw = p.j * p.j - w2;
  return 2.0 * p.kappa * w2 / (p.kappa * p.kappa * w2 + jw * jw);
}

inline double dos_left(double omega, const SystemParams& p) {
  const double w2 = omega * omega;
  const double jw = p.j * p.j - w2;
  return 2.0 * p.kappa * p.j * p.j / (p.kappa * p.kappa * w2 + jw * jw);
}

// dressed-operator weights of the qubit in the normal and right/left modes
struct MixingCoefficients {
  double sigma_minus_even = 0.0;
  double sigma_minus_odd = 0.0;
  double sigma_plus = 0.0;
  double sigma_minus_right = 0.0;  // identically zero at leading order
  double sigma_plus_right = 0.0;
};

inline MixingCoefficients mixing_coefficients(const SystemParams& p) {
  if (p.j <= 0.0) throw domain_error("mixing_coefficients: j must be positive");
  const double r = p.lambda / p.j;
  const double ff = 1.0 / (1.0 + r * r);
  const double s2 = std::sqrt(2.0);
  MixingCoefficients m;
  m.sigma_minus_even = -p.g / (s2 * p.j) * ff;
  m.sigma_minus_odd = -m.sigma_minus_even;
  m.sigma_plus = (p.g / (s2 * p.j)) * (p.lambda / p.j) * ff;
  m.sigma_minus_right = 0.0;
  m.sigma_plus_right = (p.g * p.lambda / (p.j * p.j)) * ff;
  return m;
}

// residual heating of the qubit through the anomalous mixing term
inline double heating_rate(const SystemParams& p) {
  if (p.j <= 0.0) throw domain_error("heating_rate: j must be positive");
  const double x = p.g * p.lambda / (p.j * p.j);
  return p.kappa * x * x;
}

// Purcell decay through the left-cavity internal loss channel
inline double purcell_left_rate(const SystemParams& p) {
  if (p.j <= 0.0) throw domain_error("purcell_left_rate: j must be positive");
  if (p.kappa_left_int < 0.0) throw domain_error("purcell_left_rate: kappa' must be non-negative");
  const double x = p.g / p.j;
  return p.kappa_left_int * x * x;
}

enum class SpectrumKind { squeezing, squeezing_db, dos_right, dos_left };

inline Spectrum sample_spectrum(const SystemParams& p, SpectrumKind kind, double omega_min,
                                double omega_max, int points) {
  if (points < 2 || !(omega_max > omega_min))
    throw domain_error("sample_spectrum: bad grid");
  Spectrum s;
  s.omega_grid.resize(points);
  s.values.resize(points);
  for (int i = 0; i < points; ++i) {
    const double w = omega_min + (omega_max - omega_min) * i / (points - 1);
    s.omega_grid[i] = w;
    switch (kind) {
      case SpectrumKind::squeezing:
        s.values[i] = squeezing_spectrum(w, p);
        s.kind = "squeezing";
        break;
      case SpectrumKind::squeezing_db:
        s.values[i] = spectrum_db(w, p);
        s.kind = "squeezing_db";
        break;
      case SpectrumKind::dos_right:
        s.values[i] = dos_right(w, p);
        s.kind = "dos_right";
        break;
      case SpectrumKind::dos_left:
        s.values[i] = dos_left(w, p);
        s.kind = "dos_left";
        break;
    }
  }
  return s;
}

// default grids: [-10 kappa, 10 kappa] x 2001 for S_out, [-2J, 2J] x 4001 for DoS
inline Spectrum default_squeezing_spectrum(const SystemParams& p, bool db = true) {
  return sample_spectrum(p, db ? SpectrumKind::squeezing_db : SpectrumKind::squeezing,
                         -10.0 * p.kappa, 10.0 * p.kappa, 2001);
}

inline Spectrum default_dos(const SystemParams& p, bool right) {
  return sample_spectrum(p, right ? SpectrumKind::dos_right : SpectrumKind::dos_left, -2.0 * p.j,
                         2.0 * p.j, 4001);
}

}  // namespace istms
