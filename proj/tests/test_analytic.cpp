#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "istms/analytic.hpp"
#include "istms/special.hpp"

using namespace istms;
using Catch::Approx;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

SystemParams params_chi_lambda(double chi, double lambda) {
  SystemParams p;
  p.chi = chi;
  p.lambda = lambda;
  return p;
}

}  // namespace

TEST_CASE("inverse complementary error function round-trips") {
  for (double x : {0.05, 0.3, 1.0, 2.0, 3.5, 5.0}) {
    const double y = std::erfc(x);
    CHECK(erfc_inv(y) == Approx(x).epsilon(1e-11));
  }
  // reflection onto (1, 2)
  CHECK(erfc_inv(1.7) == Approx(-erfc_inv(0.3)).epsilon(1e-13));
  CHECK(erfc_inv(1.0) == Approx(0.0).margin(1e-13));
  CHECK(erfc_inv(2e-4) == Approx(2.6297417762102732).epsilon(1e-12));
  CHECK_THROWS_AS(erfc_inv(0.0), domain_error);
  CHECK_THROWS_AS(erfc_inv(2.0), domain_error);
}

TEST_CASE("drive configuration validates its inputs") {
  CHECK_THROWS_AS(DriveConfig::from_nbar0(-1.0), domain_error);
  CHECK_THROWS_AS(DriveConfig::from_nbar0(1.0, 2), domain_error);
  CHECK_THROWS_AS(DriveConfig::from_beta(-0.5), domain_error);
  const DriveConfig d = DriveConfig::from_beta(2.0, -1);
  CHECK(d.is_beta);
  CHECK(d.sigma == -1);
}

TEST_CASE("input amplitude and intracavity photon number are consistent") {
  const SystemParams p = params_chi_lambda(0.1, 0.3);
  const double nu = 0.3 + 0.5;
  const double d2 = nu * nu + 0.01;
  CHECK(beta_to_n0(p, 2.0) == Approx(4.0 / d2).epsilon(1e-14));
  CHECK(n0_to_beta(p, beta_to_n0(p, 2.0)) == Approx(2.0).epsilon(1e-13));
  // snr is identical whichever way the drive is given
  const double n0 = beta_to_n0(p, 2.0);
  const SnrResult a = snr(7.0, p, DriveConfig::from_beta(2.0));
  const SnrResult b = snr(7.0, p, DriveConfig::from_nbar0(n0));
  CHECK(a.signal == Approx(b.signal).epsilon(1e-14));
  CHECK(a.noise == b.noise);
}

TEST_CASE("mean signal starts at zero and saturates") {
  const SystemParams p = params_chi_lambda(0.05, 0.45);
  const DriveConfig d = DriveConfig::from_nbar0(1.0);
  CHECK(signal_mean(0.0, p, d) == 0.0);
  const double nu = 0.95;
  const double d2 = nu * nu + 0.05 * 0.05;
  const double plateau = -std::sqrt(2.0) * 0.05 * std::sqrt(1.0 / d2);
  CHECK(signal_mean(60.0, p, d) == Approx(plateau).epsilon(1e-12));
  // sigma flips the sign
  const DriveConfig dm = DriveConfig::from_nbar0(1.0, -1);
  CHECK(signal_mean(3.0, p, dm) == Approx(-signal_mean(3.0, p, d)).epsilon(1e-14));
  CHECK_THROWS_AS(signal_mean(-1.0, p, d), domain_error);
}

TEST_CASE("integrated signal matches direct quadrature of the mean") {
  for (auto [chi, lam, n0] : {std::tuple{0.1, 0.3, 4.0}, std::tuple{0.5, 0.05, 2.0},
                              std::tuple{0.02, 0.45, 30.0}}) {
    const SystemParams p = params_chi_lambda(chi, lam);
    const DriveConfig d = DriveConfig::from_nbar0(n0);
    for (double tau : {5.0, 20.0}) {
      const double quad =
          simpson([&](double t) { return 2.0 * signal_mean(t, p, d); }, 0.0, tau, 20000);
      CHECK(integrated_signal(tau, p, d) == Approx(quad).epsilon(1e-6));
    }
  }
}

TEST_CASE("integrated signal slope approaches the stationary value") {
  const SystemParams p = params_chi_lambda(0.05, 0.45);
  const DriveConfig d = DriveConfig::from_nbar0(1.0);
  const double slope = (integrated_signal(50.0, p, d) - integrated_signal(40.0, p, d)) / 10.0;
  CHECK(slope == Approx(-0.1486588292494333).epsilon(1e-12));
}

TEST_CASE("signal is smooth through chi -> 0") {
  const SystemParams a = params_chi_lambda(1e-8, 0.3);
  const SystemParams b = params_chi_lambda(2e-8, 0.3);
  const DriveConfig d = DriveConfig::from_nbar0(9.0);
  const double ra = integrated_signal(10.0, a, d) / 1e-8;
  const double rb = integrated_signal(10.0, b, d) / 2e-8;
  CHECK(ra == Approx(rb).epsilon(1e-9));
  const SystemParams z = params_chi_lambda(0.0, 0.3);
  CHECK(integrated_signal(10.0, z, d) == 0.0);
}

TEST_CASE("noise kernel carries the explicit delta weight") {
  const SystemParams p = params_chi_lambda(0.0, 0.25);
  const NoiseKernel k = noise_kernel(3.0, 3.0, p);
  CHECK(k.delta_weight == 0.5);
  CHECK(k.smooth == Approx(-1.0 / 6.0).epsilon(1e-14));
  // kernel decays and oscillates with the detuning
  const SystemParams q = params_chi_lambda(0.3, 0.25);
  const NoiseKernel far = noise_kernel(10.0, 0.0, q);
  CHECK(std::abs(far.smooth) < 1e-3);
}

TEST_CASE("integrated noise: vacuum limit is exact and squeezing reduces it") {
  SystemParams p = params_chi_lambda(0.2, 0.0);
  for (double tau : {0.5, 3.0, 100.0}) CHECK(integrated_noise(tau, p) == 0.5 * tau);
  for (double lam : {0.05, 0.15, 0.25, 0.35, 0.45}) {
    for (double chi : {0.0, 0.1, 0.5}) {
      const SystemParams q = params_chi_lambda(chi, lam);
      for (double tau : {1.0, 10.0, 100.0, 1000.0})
        CHECK(integrated_noise(tau, q) <= 0.5 * tau + 1e-12);
    }
  }
}

TEST_CASE("long-time noise slope at lambda = kappa/4, chi -> 0") {
  const SystemParams p = params_chi_lambda(0.0, 0.25);
  const double slope = (integrated_noise(500.0, p) - integrated_noise(400.0, p)) / 100.0;
  CHECK(slope == Approx(1.0 / 18.0).epsilon(1e-12));
}

TEST_CASE("snr obeys its defining identity") {
  const SystemParams p = params_chi_lambda(0.1, 0.3);
  const DriveConfig d = DriveConfig::from_nbar0(5.0);
  for (double tau : {0.3, 2.0, 37.0, 400.0}) {
    const SnrResult r = snr(tau, p, d);
    CHECK(r.snr * r.snr == Approx(r.signal * r.signal / (2.0 * r.noise)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(snr(0.0, p, d), domain_error);
}

TEST_CASE("measurement rates") {
  SystemParams p = params_chi_lambda(0.05, 0.45);
  const DriveConfig d = DriveConfig::from_nbar0(10.0);
  CHECK(gamma_istms(p, d) == Approx(4.0 * 10.0).epsilon(1e-13));  // threshold drive
  p.lambda = 0.3;
  const double hk = 0.2;
  CHECK(gamma_istms(p, d) ==
        Approx(8.0 * 10.0 * 0.0025 / (0.0025 + hk * hk)).epsilon(1e-13));
  p.lambda = 0.5;
  CHECK_THROWS_AS(gamma_istms(p, d), instability_error);

  CHECK(gamma_standard(0.5, 1.0, 10.0) == Approx(40.0).epsilon(1e-14));
  CHECK(gamma_standard(0.2, 1.0, 10.0) == Approx(2.0 * 10.0 * 0.04).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_standard(0.6, 1.0, 10.0), domain_error);

  SystemParams w = params_chi_lambda(0.05, 0.45);
  CHECK(rate_ratio_weak(w, d) == Approx(10.0 / (10.0 + 5.0)).epsilon(1e-14));
}

TEST_CASE("snr rate matches the finite-time estimate at long times") {
  const SystemParams p = params_chi_lambda(0.25, 0.05);
  const DriveConfig d = DriveConfig::from_nbar0(4.0);
  const SnrResult r = snr(1e4, p, d);
  CHECK(r.snr * r.snr / 1e4 == Approx(r.rate_longtime).epsilon(2e-3));
}

TEST_CASE("loss-free limits of the lossy variants are bit-identical") {
  const SystemParams p = params_chi_lambda(0.05, 0.45);
  const DriveConfig d = DriveConfig::from_nbar0(10.0);
  for (double tau : {0.7, 13.0, 250.0}) {
    const SnrResult base = snr(tau, p, d);
    const SnrResult e = snr_ext(tau, p, d, 0.0);
    const SnrResult i = snr_int(tau, p, d, 0.0);
    CHECK(e.signal == base.signal);
    CHECK(e.noise == base.noise);
    CHECK(e.snr == base.snr);
    CHECK(e.rate_longtime == base.rate_longtime);
    CHECK(i.signal == base.signal);
    CHECK(i.noise == base.noise);
    CHECK(i.snr == base.snr);
    CHECK(i.rate_longtime == base.rate_longtime);
  }
  CHECK_THROWS_AS(snr_ext(1.0, p, d, -0.1), domain_error);
  CHECK_THROWS_AS(snr_ext(1.0, p, d, 1.1), domain_error);
  CHECK_THROWS_AS(snr_int(1.0, p, d, 1.0), domain_error);
}

TEST_CASE("external loss mixes in vacuum noise") {
  const SystemParams p = params_chi_lambda(0.05, 0.45);
  const DriveConfig d = DriveConfig::from_nbar0(10.0);
  const double eta = 0.3;
  const double tau = 20.0;
  const SnrResult base = snr(tau, p, d);
  const SnrResult r = snr_ext(tau, p, d, eta);
  CHECK(r.signal == Approx(std::sqrt(1.0 - eta) * base.signal).epsilon(1e-14));
  CHECK(r.noise == Approx((1.0 - eta) * base.noise + eta * tau / 2.0).epsilon(1e-14));
  CHECK(r.snr < base.snr);
}

TEST_CASE("internal loss rescales the linewidth before the output coupler") {
  SystemParams p = params_chi_lambda(0.05, 0.5056);  // stable only against kappa_tot
  const DriveConfig d = DriveConfig::from_nbar0(10.0);
  const double eps = 0.1;
  CHECK_NOTHROW(snr_int(5.0, p, d, eps));  // kappa_tot = 1/(1-eps) > 2 lambda
  SystemParams q = params_chi_lambda(0.05, 0.45);
  const SnrResult lossy = snr_int(30.0, q, d, eps);
  const SnrResult clean = snr(30.0, q, d);
  CHECK(lossy.snr < clean.snr);
}

TEST_CASE("fidelity maps to snr and back") {
  CHECK(fidelity_from_snr(0.0) == Approx(0.5).epsilon(1e-14));
  const double s = snr_from_fidelity(0.9999);
  CHECK(s == Approx(5.259483552420546).epsilon(1e-12));
  CHECK(fidelity_from_snr(s) == Approx(0.9999).margin(1e-12));
  for (double f : {0.6, 0.99, 0.999999}) {
    CHECK(fidelity_from_snr(snr_from_fidelity(f)) == Approx(f).margin(1e-11));
  }
  CHECK_THROWS_AS(snr_from_fidelity(1.0), domain_error);
  CHECK_THROWS_AS(fidelity_from_snr(-0.1), domain_error);
}

TEST_CASE("tau_star finds the first crossing of the fidelity target") {
  const SystemParams p = params_chi_lambda(0.05, 0.45);
  const DriveConfig d = DriveConfig::from_nbar0(100.0);
  const double ts = tau_star(p, d);
  CHECK(ts == Approx(5.723271838286278).epsilon(5e-6));
  CHECK(fidelity_from_snr(snr(ts, p, d).snr) >= 0.9999 - 1e-12);
  CHECK(fidelity_from_snr(snr(ts * (1.0 - 5e-6), p, d).snr) < 0.9999);
}

TEST_CASE("tau_star decreases monotonically with drive at fixed total photons") {
  const double ntot = 30.0;
  double prev = 1e9;
  for (double lam : {0.0, 0.1125, 0.225, 0.3375, 0.45}) {
    SystemParams p = params_chi_lambda(0.05, lam);
    const double nsq = lam > 0.0 ? n_sqz(p) : 0.0;
    const double ts = tau_star(p, DriveConfig::from_nbar0(ntot - nsq));
    CHECK(ts < prev);
    prev = ts;
  }
  CHECK(prev == Approx(9.38823).epsilon(1e-3));
}

TEST_CASE("tau_star rejects unreachable targets and bad inputs") {
  SystemParams p = params_chi_lambda(1e-3, 0.0);
  CHECK_THROWS_AS(tau_star(p, DriveConfig::from_nbar0(1e-8)), convergence_error);
  CHECK_THROWS_AS(tau_star(p, DriveConfig::from_nbar0(0.0)), domain_error);
  CHECK_THROWS_AS(tau_star(p, DriveConfig::from_nbar0(10.0), 0.4), domain_error);
  SystemParams z = params_chi_lambda(0.0, 0.0);
  CHECK_THROWS_AS(tau_star(z, DriveConfig::from_nbar0(10.0)), domain_error);
}

TEST_CASE("tau_star accepts a custom snr functional") {
  const SystemParams p = params_chi_lambda(0.05, 0.45);
  const DriveConfig d = DriveConfig::from_nbar0(100.0);
  const double plain = tau_star(p, d);
  const double hooked =
      tau_star(p, d, 0.9999, [&](double t) { return snr_ext(t, p, d, 0.0); });
  CHECK(hooked == Approx(plain).epsilon(1e-9));
  const double lossy =
      tau_star(p, d, 0.9999, [&](double t) { return snr_ext(t, p, d, 0.2); });
  CHECK(lossy > plain);
}

TEST_CASE("intracavity squeezing saturates at half the vacuum variance") {
  SystemParams p = params_chi_lambda(0.0, 0.0);
  CHECK(intracavity_variance(p) == Approx(0.5).epsilon(1e-14));
  p.lambda = 0.25;
  CHECK(intracavity_variance(p) == Approx(1.0 / 3.0).epsilon(1e-14));
  p.lambda = 0.5 - 1e-12;
  CHECK(intracavity_variance(p) == Approx(0.25).epsilon(1e-9));
  p.lambda = 0.5;
  CHECK_THROWS_AS(intracavity_variance(p), instability_error);
}
