#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "chronolens/dispersion.hpp"
#include "chronolens/envelope.hpp"
#include "chronolens/imaging.hpp"
#include "chronolens/sfg.hpp"
#include "golden_bbo.hpp"

using namespace chronolens;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SellmeierSpec bbo_spec() {
  SellmeierSpec spec;
  spec.ordinary = {2.7405, 0.0184, 0.0179, -0.0155};
  spec.extraordinary = {2.3730, 0.0128, 0.0156, -0.0044};
  spec.cut_angle_deg = 28.1;
  spec.lambda_s = 830e-9;
  spec.lambda_p = 830e-9;
  spec.lambda_i = 415e-9;
  return spec;
}

CrystalDispersion golden_bbo_dispersion() {
  return make_crystal_dispersion(kGoldenKPrimeS, kGoldenKPrimeP, kGoldenKPrimeI,
                                 kGoldenKDoublePrimeS, 500e-6);
}

// Flat unit pump across the whole grid, so the ODE sees a constant coupling
// and the two-level conversion formula applies pointwise.
PumpProfile flat_pump(const TimeGrid& grid) {
  PumpProfile pump;
  pump.envelope.grid = grid;
  pump.envelope.samples = Arraycd::Ones(grid.n_samples);
  pump.aperture_lo = grid.t0;
  pump.aperture_hi = grid.t0 + grid.span();
  return pump;
}

}  // namespace

TEST_CASE("phase mismatch linear and quadratic forms") {
  const CrystalDispersion deg = make_crystal_dispersion(2.0, 2.0, 5.0, 0.25, 2.0);
  CHECK(phase_mismatch(deg, 0.0, 0.0) == 0.0);
  // degenerate: signal detuning drops out
  CHECK(phase_mismatch(deg, 7.0, 1.5) == phase_mismatch(deg, -3.0, 1.5));
  CHECK(phase_mismatch(deg, 0.0, 1.0) == doctest::Approx(-3.0));
  CHECK(phase_mismatch(deg, 4.0, 2.0) == doctest::Approx(2 * phase_mismatch(deg, 2.0, 1.0)));

  CHECK(phase_mismatch_quadratic(deg, 0.0, 2.0) == doctest::Approx(phase_mismatch(deg, 0.0, 2.0)));
  CHECK(phase_mismatch_quadratic(deg, 3.0, 2.0) == phase_mismatch_quadratic(deg, -3.0, 2.0));

  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double ws = uni(rng), wi = uni(rng);
    const double quad = phase_mismatch_quadratic(deg, ws, wi);
    const double lin = phase_mismatch(deg, ws, wi);
    CHECK(quad - lin == doctest::Approx(deg.k_double_prime_s * ws * ws).epsilon(1e-12));
  }

  const CrystalDispersion split = make_crystal_dispersion(2.0, 2.5, 5.0, 0.25, 2.0);
  CHECK(phase_mismatch(split, 2.0, 0.0) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(phase_mismatch_quadratic(split, 1.0, 1.0), std::invalid_argument);

  CHECK_THROWS_AS(make_crystal_dispersion(1.0, 1.0, 1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_crystal_dispersion(1.0, 1.0, 1.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("idler delay and spreading time") {
  const CrystalDispersion d1 = make_crystal_dispersion(1.0, 1.0, 1.0, 0.0, 3.0);
  CHECK(idler_delay(d1) == 0.0);
  CHECK(spreading_time(d1) == 0.0);

  const CrystalDispersion d2 = make_crystal_dispersion(0.0, 0.0, -0.5, 0.04, 1.0);
  const CrystalDispersion d2l = make_crystal_dispersion(0.0, 0.0, -0.5, 0.04, 2.0);
  const CrystalDispersion d2q = make_crystal_dispersion(0.0, 0.0, -0.5, 0.04, 4.0);
  CHECK(idler_delay(d2) == doctest::Approx(0.5));
  CHECK(idler_delay(d2l) == doctest::Approx(1.0));
  CHECK(spreading_time(d2q) == doctest::Approx(2 * spreading_time(d2)));

  // anomalous media spread just the same
  const CrystalDispersion anom = make_crystal_dispersion(0.0, 0.0, -0.5, -0.04, 1.0);
  CHECK(spreading_time(anom) == spreading_time(d2));
}

TEST_CASE("bandwidth relations and the lossless identity") {
  const double dws = kTwoPi / 1e-11;
  CHECK(idler_bandwidth(dws, -3.0, 1, 1e-11, 1e-22) == doctest::Approx(dws / 3).epsilon(1e-15));
  CHECK(active_pump_bandwidth(dws, -3.0, 1, 1e-11, 1e-22) ==
        doctest::Approx(dws * (1 + 1.0 / 3)).epsilon(1e-15));
  CHECK(active_pump_bandwidth(dws, 1e9, 1, 1e-11, 1e-22) == doctest::Approx(dws).epsilon(1e-8));

  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> ubw(1e9, 1e13);
  std::uniform_real_distribution<double> umag(1.1, 50.0);
  std::uniform_real_distribution<double> utau(1e-13, 1e-10);
  std::uniform_real_distribution<double> ugdd(1e-26, 1e-22);
  std::uniform_int_distribution<int> upix(1, 64);
  std::bernoulli_distribution flip(0.5);
  for (int i = 0; i < 1000; ++i) {
    const double s = ubw(rng);
    const double m = flip(rng) ? umag(rng) : -umag(rng);
    const int n = upix(rng);
    const double tau0 = utau(rng);
    const double df = ugdd(rng);
    // bitwise, not approximate: the active bandwidth is composed as the sum
    CHECK(active_pump_bandwidth(s, m, n, tau0, df) == s + idler_bandwidth(s, m, n, tau0, df));
  }

  CHECK_THROWS_AS(idler_bandwidth(dws, 0.0, 1, 1e-11, 1e-22), std::invalid_argument);
  CHECK_THROWS_AS(idler_bandwidth(dws, -3.0, 0, 1e-11, 1e-22), std::invalid_argument);
  CHECK_THROWS_AS(idler_bandwidth(dws, -3.0, 1, 0.0, 1e-22), std::invalid_argument);
  CHECK_THROWS_AS(idler_bandwidth(dws, -3.0, 1, 1e-11, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(idler_bandwidth(-1.0, -3.0, 1, 1e-11, 1e-22), std::invalid_argument);
}

TEST_CASE("pixel budget inversion and feasibility") {
  const double dws = kTwoPi / 1e-11;

  // cap exactly one compressed pixel
  const PixelBudget one = pixel_budget(1e-22, 1e-11, dws / 3.0, dws, -3.0);
  CHECK(one.pixels == 1.0);
  CHECK_FALSE(one.high_magnification);

  std::mt19937 rng(777);
  std::uniform_real_distribution<double> umag(1.1, 50.0);
  std::uniform_real_distribution<double> utau(1e-13, 1e-10);
  std::uniform_real_distribution<double> ugdd(1e-24, 1e-22);
  std::uniform_int_distribution<int> upix(1, 100);
  for (int i = 0; i < 300; ++i) {
    const double m = -umag(rng);
    const double tau0 = utau(rng);
    const double df = ugdd(rng);
    const int n = upix(rng);
    const double s = kTwoPi / tau0;
    const double cap = idler_bandwidth(s, m, n, tau0, df);
    const PixelBudget back = pixel_budget(df, tau0, cap, s, m);
    CHECK(back.pixels == doctest::Approx(n).epsilon(1e-9));
  }

  CHECK_THROWS_AS(pixel_budget(1e-22, 1e-11, dws / 3.0001, dws, -3.0), FeasibilityError);

  CHECK(pixel_budget(1e-22, 1e-11, 11.0 * dws / 3.0, dws, -3.0).high_magnification);
  CHECK_FALSE(pixel_budget(1e-22, 1e-11, 5.0 * dws / 3.0, dws, -3.0).high_magnification);
  // an unbounded cap is allowed and flags the simplified regime
  const PixelBudget open = pixel_budget(1e-22, 1e-11, kInf, dws, -3.0);
  CHECK(open.pixels == kInf);
  CHECK(open.high_magnification);
}

TEST_CASE("field of view bounds") {
  const QuantumFov eq = fov_quantum(1e-22, 2e-13, 2e-13, 10.0);
  CHECK(eq.bound_crystal == eq.bound_pump);
  CHECK(eq.minimum == eq.bound_crystal);
  CHECK(eq.margined() == doctest::Approx(eq.minimum / 10));

  const QuantumFov base = fov_quantum(1e-22, 1e-13, 4e-13, 10.0);
  const QuantumFov twice = fov_quantum(2e-22, 1e-13, 4e-13, 10.0);
  CHECK(twice.bound_crystal == doctest::Approx(2 * base.bound_crystal));
  CHECK(twice.bound_pump == doctest::Approx(2 * base.bound_pump));
  CHECK(base.minimum == base.bound_pump);

  const QuantumFov solo = fov_quantum_crystal_only(1e-22, 1e-13, 10.0);
  CHECK(solo.bound_crystal == doctest::Approx(kTwoPi * 1e-22 / 1e-13));
  CHECK(std::isnan(solo.bound_pump));
  CHECK(solo.minimum == solo.bound_crystal);

  CHECK(fov_classical(1e-22, 3e-13, 0.0) == doctest::Approx(kTwoPi * 1e-22 / 3e-13));
  CHECK(fov_classical(1e-22, 2e-13, 2e-13) ==
        doctest::Approx(kTwoPi * 1e-22 / (2e-13 * std::sqrt(2.0))));
  CHECK_THROWS_AS(fov_classical(1e-22, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fov_quantum(0.0, 1e-13, 1e-13, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(fov_quantum(1e-22, 0.0, 1e-13, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(fov_quantum(1e-22, 1e-13, 1e-13, 0.5), std::invalid_argument);

  // the margined quantum view is always narrower than the classical one
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> utau(1e-14, 1e-11);
  for (int i = 0; i < 200; ++i) {
    const double ti = utau(rng), tp = utau(rng);
    for (const double margin : {2.0, 10.0}) {
      const QuantumFov q = fov_quantum(1e-22, ti, tp, margin);
      CHECK(q.margined() < fov_classical(1e-22, ti, tp));
    }
  }
}

TEST_CASE("constraint flags and margin ratios") {
  // crystal chosen so tau_i = 0.1 and tau_s = 0.1 exactly
  const CrystalDispersion d = make_crystal_dispersion(0.0, 0.0, -0.1, 0.01, 1.0);
  CHECK(idler_delay(d) == 0.1);
  CHECK(spreading_time(d) == 0.1);

  // boundary: timescale * margin lands exactly on the inverse bandwidth
  const ConstraintFlags edge = check_constraints(d, kTwoPi, kTwoPi, 10.0);
  CHECK(edge.idler_ok);
  CHECK(edge.spreading_ok);
  CHECK(edge.idler_ratio == doctest::Approx(10.0));
  CHECK(edge.spreading_ratio == doctest::Approx(10.0));
  CHECK(edge.margin == 10.0);

  const ConstraintFlags tight = check_constraints(d, kTwoPi, 1.01 * kTwoPi, 10.0);
  CHECK_FALSE(tight.idler_ok);
  CHECK(tight.spreading_ok);
  CHECK(tight.idler_ratio < 10.0);

  const CrystalDispersion clean = make_crystal_dispersion(1.0, 1.0, 1.0, 0.0, 1.0);
  const ConstraintFlags free_run = check_constraints(clean, 1e15, 1e15, 10.0);
  CHECK(free_run.idler_ok);
  CHECK(free_run.spreading_ok);
  CHECK(free_run.idler_ratio == kInf);
  CHECK(free_run.spreading_ratio == kInf);

  // zero bandwidth means no budget pressure at all
  const ConstraintFlags idle = check_constraints(d, 0.0, 0.0, 10.0);
  CHECK(idle.idler_ok);
  CHECK(idle.spreading_ok);

  CHECK_THROWS_AS(check_constraints(d, 1.0, 1.0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(check_constraints(d, -1.0, 1.0, 10.0), std::invalid_argument);
}

TEST_CASE("adaptive wavevector derivatives") {
  // analytic check: k(w) = sin(w) at w = 1
  const std::function<long double(long double)> ksin = [](long double w) { return sinl(w); };
  const DerivativePair ds = wavevector_derivatives(ksin, 1.0);
  CHECK(ds.first == doctest::Approx(std::cos(1.0)).epsilon(1e-10));
  CHECK(ds.second == doctest::Approx(-std::sin(1.0)).epsilon(1e-9));

  // stability: explicit halving around the same point settles on the same
  // numbers the adaptive routine reports
  long double h = 1e-3L;
  long double d1 = (sinl(1 + h) - sinl(1 - h)) / (2 * h);
  long double d2 = (sinl(1 + h) - 2 * sinl(1.0L) + sinl(1 - h)) / (h * h);
  for (int i = 0; i < 20; ++i) {
    h /= 2;
    const long double n1 = (sinl(1 + h) - sinl(1 - h)) / (2 * h);
    const long double n2 = (sinl(1 + h) - 2 * sinl(1.0L) + sinl(1 - h)) / (h * h);
    const bool done = fabsl(n1 - d1) <= 1e-8L * fabsl(n1) && fabsl(n2 - d2) <= 1e-8L * fabsl(n2);
    d1 = n1;
    d2 = n2;
    if (done) break;
  }
  CHECK(ds.first == doctest::Approx(static_cast<double>(d1)).epsilon(1e-6));
  CHECK(ds.second == doctest::Approx(static_cast<double>(d2)).epsilon(1e-6));

  CHECK_THROWS_AS(wavevector_derivatives(ksin, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(wavevector_derivatives(ksin, -1.0), std::invalid_argument);
}

TEST_CASE("sellmeier indices and dispersion extraction") {
  SellmeierSpec vac;
  vac.ordinary = {1.0, 0.0, 0.0, 0.0};
  vac.extraordinary = {1.0, 0.0, 0.0, 0.0};
  vac.cut_angle_deg = 28.1;
  vac.lambda_s = 830e-9;
  vac.lambda_p = 830e-9;
  vac.lambda_i = 415e-9;
  const CrystalDispersion v = dispersion_from_sellmeier(vac, 1e-3);
  CHECK(v.k_prime_s == doctest::Approx(1.0 / kSpeedOfLight).epsilon(1e-12));
  CHECK(v.k_prime_p == doctest::Approx(1.0 / kSpeedOfLight).epsilon(1e-12));
  CHECK(v.k_prime_i == doctest::Approx(1.0 / kSpeedOfLight).epsilon(1e-12));
  CHECK(std::abs(v.k_double_prime_s) < 1e-30);
  CHECK(v.length == 1e-3);

  const SellmeierSpec spec = bbo_spec();
  CHECK(sellmeier_index(spec.ordinary, 830e-9) == doctest::Approx(1.6605).epsilon(1e-3));
  // at zero cut angle the extraordinary wave sees the ordinary index
  SellmeierSpec flat = spec;
  flat.cut_angle_deg = 0.0;
  CHECK(wave_index(flat, WavePolarization::extraordinary, 415e-9) ==
        doctest::Approx(wave_index(flat, WavePolarization::ordinary, 415e-9)).epsilon(1e-14));
  SellmeierSpec steep = spec;
  steep.cut_angle_deg = 90.0;
  CHECK(wave_index(steep, WavePolarization::extraordinary, 415e-9) ==
        doctest::Approx(sellmeier_index(spec.extraordinary, 415e-9)).epsilon(1e-14));

  // same ordinary formula at the same wavelength: bitwise equal group delays
  const CrystalDispersion bbo = dispersion_from_sellmeier(spec, 500e-6);
  CHECK(bbo.k_prime_s == bbo.k_prime_p);

  CHECK_THROWS_AS(sellmeier_index(spec.ordinary, 100e-9), ValidityError);
  CHECK_THROWS_AS(sellmeier_index(SellmeierCoefficients{0.5, 0.0, 0.0, 0.0}, 830e-9),
                  ValidityError);
  SellmeierSpec bad = spec;
  bad.lambda_i = 100e-9;
  CHECK_THROWS_AS(dispersion_from_sellmeier(bad, 500e-6), ValidityError);
  CHECK_THROWS_AS(dispersion_from_sellmeier(SellmeierSpec{}, 500e-6), std::invalid_argument);
}

TEST_CASE("bbo dispersion matches the committed goldens") {
  const CrystalDispersion bbo = dispersion_from_sellmeier(bbo_spec(), 500e-6);
  CHECK(bbo.k_prime_s == doctest::Approx(kGoldenKPrimeS).epsilon(1e-9));
  CHECK(bbo.k_prime_p == doctest::Approx(kGoldenKPrimeP).epsilon(1e-9));
  CHECK(bbo.k_prime_i == doctest::Approx(kGoldenKPrimeI).epsilon(1e-9));
  CHECK(bbo.k_double_prime_s == doctest::Approx(kGoldenKDoublePrimeS).epsilon(1e-9));
  CHECK(idler_delay(bbo) == doctest::Approx(kGoldenIdlerDelay).epsilon(1e-9));
  CHECK(spreading_time(bbo) == doctest::Approx(kGoldenSpreadingTime).epsilon(1e-9));
}

TEST_CASE("mismatch map bands and mask") {
  const CrystalDispersion deg = make_crystal_dispersion(2.0, 2.0, 5.0, 0.0, 2.0);
  const Arrayd ws = Arrayd::LinSpaced(41, -2.0, 2.0);
  const Arrayd wi = Arrayd::LinSpaced(81, -2.0, 2.0);
  const MismatchMap map = mismatch_map(deg, ws, wi, std::numbers::pi / 2, 4.0);

  CHECK(map.magnitude.rows() == 81);
  CHECK(map.magnitude.cols() == 41);
  CHECK(map.pump_line_offset == 2.0);
  CHECK(map.threshold == doctest::Approx(std::numbers::pi / 2));
  // |Delta| = 3 |Omega_i|; the origin row is exactly zero
  CHECK(map.magnitude(40, 0) == 0.0);
  CHECK(map.magnitude(40, 40) == 0.0);
  CHECK(map.magnitude(0, 7) == doctest::Approx(6.0));
  // degenerate: every column identical, the negligible band horizontal
  for (Eigen::Index r = 0; r < 81; r += 8) {
    CHECK((map.magnitude.row(r) == map.magnitude(r, 0)).all());
    CHECK((map.negligible.row(r) == map.negligible(r, 0)).all());
  }
  // band edge at |Omega_i| = pi/6 ~ 0.524: rows bracket it
  CHECK(map.band_half_width_i == doctest::Approx(std::numbers::pi / 6));
  CHECK(map.negligible(50, 3));        // Omega_i = 0.50
  CHECK_FALSE(map.negligible(51, 3));  // Omega_i = 0.55

  const MismatchMap open = mismatch_map(deg, ws, wi, kInf);
  CHECK(open.negligible.all());
  CHECK(open.pump_line_offset == 0.0);

  // tilted band for distinct group delays: per-column true set stays contiguous
  const CrystalDispersion split = make_crystal_dispersion(3.0, 2.0, 5.0, 0.0, 2.0);
  const Arrayd ws2 = Arrayd::LinSpaced(300, -2.0, 2.0);
  const Arrayd wi2 = Arrayd::LinSpaced(300, -2.0, 2.0);
  const MismatchMap tilted = mismatch_map(split, ws2, wi2);
  for (Eigen::Index c = 0; c < 300; c += 13) {
    int transitions = 0;
    for (Eigen::Index r = 1; r < 300; ++r)
      if (tilted.negligible(r, c) != tilted.negligible(r - 1, c)) ++transitions;
    CHECK(transitions <= 2);
  }
  for (Eigen::Index c : {Eigen::Index(17), Eigen::Index(203)}) {
    for (Eigen::Index r : {Eigen::Index(3), Eigen::Index(150), Eigen::Index(271)}) {
      const double expect = std::abs(1.0 * ws2(c) - 3.0 * wi2(r));
      CHECK(tilted.magnitude(r, c) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(mismatch_map(deg, Arrayd(), wi), std::invalid_argument);
  CHECK_THROWS_AS(mismatch_map(deg, ws, wi, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mismatch_map(deg, ws, wi, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("design report for the bbo fixture") {
  DesignRequest req;
  req.crystal = golden_bbo_dispersion();
  req.focal_gdd = 1e-22;
  req.magnification = -10.0;
  req.n_pixels = 4;
  req.pixel_duration = 1e-11;
  req.pump = PumpPreparation::chirped;
  req.pump_duration = 1e-12;
  req.margin = 10.0;

  const DesignReport rep = build_design_report(req);
  const double dws = kTwoPi / 1e-11;
  CHECK(rep.signal_bandwidth == doctest::Approx(dws).epsilon(1e-15));
  CHECK(rep.idler_bandwidth ==
        doctest::Approx(dws / 10 + 3 * 1e-11 / 1e-22).epsilon(1e-12));
  // the lossless relation is an identity, not an approximation
  CHECK(rep.active_pump_bandwidth == rep.signal_bandwidth + rep.idler_bandwidth);
  CHECK(rep.idler_delay == doctest::Approx(kGoldenIdlerDelay).epsilon(1e-12));
  CHECK(rep.spreading_time == doctest::Approx(kGoldenSpreadingTime).epsilon(1e-12));
  CHECK(rep.idler_bandwidth_limit == doctest::Approx(kGoldenIdlerBandwidthLimit).epsilon(1e-9));
  CHECK(rep.budget_feasible);
  CHECK(rep.pixel_budget ==
        doctest::Approx(1 + (1e-22 / 1e-11) * (rep.idler_bandwidth_limit - dws / 10))
            .epsilon(1e-12));
  CHECK(rep.pixel_budget > req.n_pixels);
  CHECK(rep.high_magnification);
  CHECK(rep.constraints.idler_ok);
  CHECK(rep.constraints.spreading_ok);
  CHECK(rep.feasible());

  CHECK(rep.fov_quantum.bound_crystal == doctest::Approx(kTwoPi * 1e-22 / kGoldenIdlerDelay));
  CHECK(rep.fov_quantum.bound_pump == doctest::Approx(kTwoPi * 1e-22 / 1e-12));
  CHECK(rep.fov_quantum.margined() < rep.fov_classical);
  CHECK(rep.pump_bandwidth == doctest::Approx(kTwoPi / 1e-12));
  CHECK(rep.pump_stretched == doctest::Approx(1e-22 * kTwoPi / 1e-12));
  CHECK(rep.pump_uniformity_ratio > 1.0);

  // over-stuffed train: budgets report infeasible without throwing
  DesignRequest greedy = req;
  greedy.n_pixels = 100;
  const DesignReport grep = build_design_report(greedy);
  CHECK(grep.budget_feasible);
  CHECK_FALSE(grep.constraints.idler_ok);
  CHECK_FALSE(grep.feasible());
  CHECK(grep.active_pump_bandwidth == grep.signal_bandwidth + grep.idler_bandwidth);

  // margin so strict even one pixel cannot pass
  DesignRequest never = req;
  never.margin = 1e6;
  const DesignReport nrep = build_design_report(never);
  CHECK_FALSE(nrep.budget_feasible);
  CHECK(std::isnan(nrep.pixel_budget));
  CHECK_FALSE(nrep.feasible());

  // shaped pump: no pump bound, no pre-chirp pulse numbers
  DesignRequest shaped = req;
  shaped.pump = PumpPreparation::shaped;
  shaped.pump_aperture = 1e-10;
  const DesignReport srep = build_design_report(shaped);
  CHECK(std::isnan(srep.fov_quantum.bound_pump));
  CHECK(srep.fov_quantum.minimum == srep.fov_quantum.bound_crystal);
  CHECK(std::isnan(srep.pump_duration));
  CHECK(std::isnan(srep.pump_bandwidth));
  CHECK(srep.pump_aperture == 1e-10);
  CHECK(srep.fov_classical == doctest::Approx(kTwoPi * 1e-22 / kGoldenIdlerDelay));

  DesignRequest bad = req;
  bad.pump_duration = 0.0;
  CHECK_THROWS_AS(build_design_report(bad), std::invalid_argument);
  bad = req;
  bad.magnification = 0.0;
  CHECK_THROWS_AS(build_design_report(bad), std::invalid_argument);
  bad = req;
  bad.margin = 0.0;
  CHECK_THROWS_AS(build_design_report(bad), std::invalid_argument);
  bad = req;
  bad.pump = PumpPreparation::shaped;
  bad.pump_aperture = 0.0;
  CHECK_THROWS_AS(build_design_report(bad), std::invalid_argument);
}

TEST_CASE("chain spectral width follows the idler bandwidth rule") {
  const double tau0 = 1.0;
  const double df = 10.0 / kTwoPi;
  const TimeGrid grid = make_time_grid(2048, 64.0);
  const ImagingConfig config = solve_imaging_config(df, -3.0);

  const ChainResult four = simulate_chain(grid, make_pixel_train(4, tau0), config, IdealLens{});
  const auto& pix = four.report.pixels;
  const double comb_span = pix.back().spectral_centroid - pix.front().spectral_centroid;

  const ChainResult one = simulate_chain(grid, make_pixel_train(1, tau0), config, IdealLens{});
  const double pixel_width = amplitude_fwhm(to_spectrum(one.output));

  const double measured = std::abs(comb_span) + pixel_width;
  const double predicted = idler_bandwidth(kTwoPi / tau0, -3.0, 4, tau0, df);
  CHECK(measured == doctest::Approx(predicted).epsilon(0.10));
}

TEST_CASE("failing idler budget shows up as conversion loss") {
  const TimeGrid grid = make_time_grid(256, 20.0);
  const PumpProfile pump = flat_pump(grid);
  const ComplexEnvelope sig = gaussian_pulse(grid, 0.0, 2.0);
  ComplexEnvelope idl = sig;
  idl.samples.setZero();
  const double coupling = std::numbers::pi / 2;
  const double delta_omega_i = 1.0;

  const auto efficiency = [&](const CrystalDispersion& d) {
    const double mismatch = (d.k_prime_p - d.k_prime_i) * delta_omega_i;
    auto [sig_out, idl_out] = integrate_sfg_ode(sig, idl, pump, coupling, mismatch, d.length, 400);
    return energy(idl_out) / energy(sig);
  };

  // walk-off right at the margin-10 budget edge: still near-unit conversion
  const CrystalDispersion good =
      make_crystal_dispersion(0.0, 0.0, -kTwoPi / 10, 0.0, 1.0);
  CHECK(check_constraints(good, 1.0, delta_omega_i, 10.0).idler_ok);
  const double eta_good = efficiency(good);
  CHECK(eta_good == doctest::Approx(0.960608).epsilon(1e-3));
  CHECK(eta_good >= 0.95);

  // five margins over budget: conversion collapses well below unity
  const CrystalDispersion bad =
      make_crystal_dispersion(0.0, 0.0, -std::numbers::pi, 0.0, 1.0);
  CHECK_FALSE(check_constraints(bad, 1.0, delta_omega_i, 10.0).idler_ok);
  const double eta_bad = efficiency(bad);
  CHECK(eta_bad == doctest::Approx(0.316564).epsilon(1e-3));
  CHECK(eta_bad < 0.5);
  CHECK(eta_bad < eta_good);
}
