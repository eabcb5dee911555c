#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "istms/spectra.hpp"

using namespace istms;
using Catch::Approx;

namespace {

SystemParams params_chi_lambda(double chi, double lambda) {
  SystemParams p;
  p.chi = chi;
  p.lambda = lambda;
  return p;
}

// indices of strict local minima on a sampled curve
std::vector<int> local_minima(const std::vector<double>& v) {
  std::vector<int> out;
  for (int i = 1; i + 1 < static_cast<int>(v.size()); ++i)
    if (v[i] < v[i - 1] && v[i] < v[i + 1]) out.push_back(i);
  return out;
}

}  // namespace

TEST_CASE("squeezing spectrum: single-Lorentzian limit at the carrier") {
  const SystemParams p = params_chi_lambda(0.0, 0.25);
  CHECK(squeezing_spectrum(0.0, p) == Approx(1.0 / 18.0).epsilon(1e-14));
  CHECK(spectrum_db(0.0, p) == Approx(-9.542425094393249).epsilon(1e-12));
  // far from the carrier the output returns to vacuum
  CHECK(squeezing_spectrum(1e6, p) == Approx(0.5).epsilon(1e-9));
}

TEST_CASE("squeezing spectrum stays below vacuum for all stable drives") {
  for (double lam : {0.05, 0.15, 0.25, 0.35, 0.45, 0.49}) {
    for (double chi : {0.0, 0.2, 1.0}) {
      const SystemParams p = params_chi_lambda(chi, lam);
      for (int i = 0; i < 1000; ++i) {
        const double w = -10.0 + 20.0 * i / 999.0;
        const double s = squeezing_spectrum(w, p);
        CHECK(s < 0.5);
        CHECK(s > 0.0);
      }
    }
  }
  CHECK_THROWS_AS(squeezing_spectrum(0.0, params_chi_lambda(0.0, 0.5)), instability_error);
}

TEST_CASE("squeezing spectrum develops two minima at large dispersive shift") {
  const Spectrum one = sample_spectrum(params_chi_lambda(0.2, 0.25),
                                       SpectrumKind::squeezing, -10.0, 10.0, 2001);
  const auto m1 = local_minima(one.values);
  REQUIRE(m1.size() == 1);
  CHECK(one.omega_grid[m1[0]] == Approx(0.0).margin(1e-12));

  const Spectrum two = sample_spectrum(params_chi_lambda(1.0, 0.25),
                                       SpectrumKind::squeezing, -10.0, 10.0, 2001);
  const auto m2 = local_minima(two.values);
  REQUIRE(m2.size() == 2);
  CHECK(two.omega_grid[m2[0]] == Approx(-1.0).margin(0.1));
  CHECK(two.omega_grid[m2[1]] == Approx(1.0).margin(0.1));
}

TEST_CASE("susceptibility diagonal encodes the densities of states") {
  SystemParams p;
  p.j = 5.0;
  for (double w : {-7.3, -1.0, 0.1, 2.7, 4.999, 9.0}) {
    const Eigen::Matrix2cd m = susceptibility(w, p);
    CHECK(m(0, 0).real() == Approx(dos_right(w, p) / 2.0).margin(1e-12));
    CHECK(m(1, 1).real() == Approx(dos_left(w, p) / 2.0).margin(1e-12));
    CHECK(m(0, 1) == m(1, 0));
  }
  // poles sit at the normal-mode frequencies, j and -j, broadened by kappa
  SystemParams lossless = p;
  lossless.kappa = 1e-9;
  CHECK(std::abs(susceptibility(5.0, lossless)(0, 0)) > 1e6);
}

TEST_CASE("densities of states: zero at the qubit frequency, peaks at the modes") {
  SystemParams p;
  p.j = 5.0;
  CHECK(dos_right(0.0, p) == 0.0);
  const Spectrum right = default_dos(p, true);
  const Spectrum left = default_dos(p, false);
  REQUIRE(right.values.size() == 4001);
  double max_right = 0.0;
  for (double v : right.values) {
    CHECK(v >= 0.0);
    max_right = std::max(max_right, v);
  }
  for (double v : left.values) CHECK(v >= 0.0);
  CHECK(dos_right(p.j, p) == Approx(2.0 / p.kappa).epsilon(1e-14));
  CHECK(dos_right(-p.j, p) == Approx(2.0 / p.kappa).epsilon(1e-14));
  CHECK(max_right <= 2.0 / p.kappa + 1e-14);
  // both cavities share the same response at the mode frequencies
  CHECK(dos_left(p.j, p) == Approx(dos_right(p.j, p)).epsilon(1e-14));
}

TEST_CASE("mixing coefficients and the right-cavity cancellation") {
  SystemParams p;
  p.g = 1.0;
  p.j = 10.0;
  SECTION("no parametric drive") {
    const MixingCoefficients m = mixing_coefficients(p);
    CHECK(m.sigma_plus == 0.0);
    CHECK(m.sigma_minus_even == Approx(-1.0 / (std::sqrt(2.0) * 10.0)).epsilon(1e-14));
    CHECK(m.sigma_minus_odd == -m.sigma_minus_even);
    CHECK(m.sigma_minus_right == 0.0);
    CHECK(m.sigma_plus_right == 0.0);
  }
  SECTION("with drive") {
    p.lambda = 0.45;
    const MixingCoefficients m = mixing_coefficients(p);
    const double ff = 1.0 / (1.0 + 0.45 * 0.45 / 100.0);
    CHECK(m.sigma_minus_right == 0.0);
    CHECK(m.sigma_plus_right == Approx(0.0045 * ff).epsilon(1e-14));
    CHECK(m.sigma_plus_right == Approx(4.49e-3).epsilon(2e-3));
    CHECK(m.sigma_plus == Approx((1.0 / (std::sqrt(2.0) * 10.0)) * 0.045 * ff).epsilon(1e-14));
  }
  p.j = 0.0;
  CHECK_THROWS_AS(mixing_coefficients(p), domain_error);
}

TEST_CASE("heating and Purcell rates") {
  SystemParams p;
  p.g = 1.0;
  p.j = 10.0;
  p.lambda = 0.45;
  CHECK(heating_rate(p) == Approx(2.025e-5).epsilon(1e-12));
  p.lambda = 0.0;
  CHECK(heating_rate(p) == 0.0);
  p.kappa_left_int = 0.01;
  CHECK(purcell_left_rate(p) == Approx(1e-4).epsilon(1e-14));
  p.kappa_left_int = 0.0;
  CHECK(purcell_left_rate(p) == 0.0);
  // suppression relative to the bare rate scales as (lambda/j)^2
  p.lambda = 0.3;
  const double suppression = heating_rate(p) / ((p.g / p.j) * (p.g / p.j) * p.kappa);
  CHECK(suppression == Approx((p.lambda / p.j) * (p.lambda / p.j)).epsilon(1e-12));
}

TEST_CASE("spectrum sampling validates its grid") {
  const SystemParams p = params_chi_lambda(0.0, 0.25);
  CHECK_THROWS_AS(sample_spectrum(p, SpectrumKind::squeezing, 0.0, 1.0, 1), domain_error);
  CHECK_THROWS_AS(sample_spectrum(p, SpectrumKind::squeezing, 1.0, -1.0, 100), domain_error);
  const Spectrum s = default_squeezing_spectrum(p);
  REQUIRE(s.omega_grid.size() == 2001);
  CHECK(s.omega_grid.front() == Approx(-10.0));
  CHECK(s.omega_grid.back() == Approx(10.0));
  CHECK(s.kind == "squeezing_db");
}
