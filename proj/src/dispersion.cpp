#include "chronolens/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "chronolens/threads.hpp"

namespace chronolens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Sellmeier evaluation in long double; the finite differences downstream eat
// most of the double mantissa, so the index itself must come in cleaner.
long double index_squared(const SellmeierCoefficients& coef, long double lambda) {
  if (!(lambda > 0) || !std::isfinite(static_cast<double>(lambda)))
    throw std::invalid_argument("sellmeier_index: wavelength must be positive");
  const long double lu = lambda * 1e6L;  // micrometers
  const long double l2 = lu * lu;
  const long double denom = l2 - static_cast<long double>(coef.c);
  if (!(denom > 0))
    throw ValidityError("sellmeier_index: wavelength at or below the resonance pole");
  const long double n2 = static_cast<long double>(coef.a) + static_cast<long double>(coef.b) / denom +
                         static_cast<long double>(coef.d) * l2;
  if (!(n2 >= 1))
    throw ValidityError("sellmeier_index: index fell below one, outside the fit validity range");
  return n2;
}

long double wave_index_ld(const SellmeierSpec& spec, WavePolarization pol, long double lambda) {
  if (pol == WavePolarization::ordinary) return sqrtl(index_squared(spec.ordinary, lambda));
  const long double theta =
      static_cast<long double>(spec.cut_angle_deg) * std::numbers::pi_v<long double> / 180.0L;
  const long double c = cosl(theta), s = sinl(theta);
  const long double inv =
      c * c / index_squared(spec.ordinary, lambda) + s * s / index_squared(spec.extraordinary, lambda);
  return 1.0L / sqrtl(inv);
}

}  // namespace

CrystalDispersion make_crystal_dispersion(double k_prime_s, double k_prime_p, double k_prime_i,
                                          double k_double_prime_s, double length) {
  require(std::isfinite(k_prime_s) && std::isfinite(k_prime_p) && std::isfinite(k_prime_i),
          "make_crystal_dispersion: group delays must be finite");
  require(std::isfinite(k_double_prime_s), "make_crystal_dispersion: GVD must be finite");
  require(length > 0 && std::isfinite(length),
          "make_crystal_dispersion: crystal length must be positive");
  return {k_prime_s, k_prime_p, k_prime_i, k_double_prime_s, length};
}

double sellmeier_index(const SellmeierCoefficients& coef, double lambda) {
  return static_cast<double>(sqrtl(index_squared(coef, lambda)));
}

double wave_index(const SellmeierSpec& spec, WavePolarization pol, double lambda) {
  return static_cast<double>(wave_index_ld(spec, pol, lambda));
}

DerivativePair wavevector_derivatives(const std::function<long double(long double)>& k_of_omega,
                                      double omega) {
  require(omega > 0 && std::isfinite(omega),
          "wavevector_derivatives: carrier frequency must be positive");
  const long double w0 = omega;
  const long double f0 = k_of_omega(w0);

  const auto sample = [&](long double h, long double& d1, long double& d2) {
    const long double fp = k_of_omega(w0 + h);
    const long double fm = k_of_omega(w0 - h);
    d1 = (fp - fm) / (2 * h);
    d2 = (fp - 2 * f0 + fm) / (h * h);
  };
  // A derivative that is genuinely zero never stabilizes in relative terms;
  // below these floors (k varying by < 1e-9 of itself per carrier octave)
  // two estimates count as agreeing.
  const long double floor1 = 1e-9L * fabsl(f0) / w0;
  const long double floor2 = floor1 / w0;
  const auto agrees = [](long double a, long double b, long double floor_abs) {
    const long double scale = std::max(fabsl(a), fabsl(b));
    if (scale <= floor_abs) return true;
    return fabsl(a - b) <= 1e-6L * scale;
  };

  long double h = w0 * 1e-3L;
  long double d1h = 0, d2h = 0;
  sample(h, d1h, d2h);
  bool ok1 = false, ok2 = false;
  long double r1 = 0, r2 = 0;
  for (int it = 0; it < 25 && !(ok1 && ok2); ++it) {
    const long double hh = h / 2;
    long double d1n = 0, d2n = 0;
    sample(hh, d1n, d2n);
    if (!ok1 && agrees(d1h, d1n, floor1)) {
      ok1 = true;
      r1 = (4 * d1n - d1h) / 3;
    }
    if (!ok2 && agrees(d2h, d2n, floor2)) {
      ok2 = true;
      r2 = (4 * d2n - d2h) / 3;
    }
    h = hh;
    d1h = d1n;
    d2h = d2n;
  }
  if (!(ok1 && ok2))
    throw ValidityError("wavevector_derivatives: finite differences did not stabilize");
  return {static_cast<double>(r1), static_cast<double>(r2)};
}

CrystalDispersion dispersion_from_sellmeier(const SellmeierSpec& spec, double length) {
  require(spec.lambda_s > 0 && spec.lambda_p > 0 && spec.lambda_i > 0,
          "dispersion_from_sellmeier: wavelengths must be positive");
  require(std::isfinite(spec.cut_angle_deg), "dispersion_from_sellmeier: cut angle must be finite");

  const auto derivs = [&spec](WavePolarization pol, double lambda) {
    const std::function<long double(long double)> k = [&spec, pol](long double w) {
      const long double lam = 2.0L * std::numbers::pi_v<long double> *
                              static_cast<long double>(kSpeedOfLight) / w;
      return wave_index_ld(spec, pol, lam) * w / static_cast<long double>(kSpeedOfLight);
    };
    const double omega = kTwoPi * kSpeedOfLight / lambda;
    return wavevector_derivatives(k, omega);
  };

  const DerivativePair s = derivs(spec.pol_s, spec.lambda_s);
  const DerivativePair p = derivs(spec.pol_p, spec.lambda_p);
  const DerivativePair i = derivs(spec.pol_i, spec.lambda_i);
  return make_crystal_dispersion(s.first, p.first, i.first, s.second, length);
}

PixelBudget pixel_budget(double focal_gdd, double pixel_duration, double idler_bandwidth_max,
                         double delta_omega_s, double magnification) {
  require(focal_gdd != 0 && std::isfinite(focal_gdd), "pixel_budget: focal GDD must be nonzero");
  require(pixel_duration > 0, "pixel_budget: pixel duration must be positive");
  require(delta_omega_s >= 0 && std::isfinite(delta_omega_s),
          "pixel_budget: signal bandwidth must be >= 0");
  require(magnification != 0 && std::isfinite(magnification),
          "pixel_budget: magnification must be nonzero");
  require(idler_bandwidth_max >= 0, "pixel_budget: idler bandwidth cap must be >= 0");

  const double compressed = delta_omega_s / std::abs(magnification);
  if (idler_bandwidth_max < compressed)
    throw FeasibilityError(
        "pixel_budget: idler bandwidth cap cannot pass even one compressed pixel");
  PixelBudget out;
  out.pixels = 1 + (focal_gdd / pixel_duration) * (idler_bandwidth_max - compressed);
  out.high_magnification = compressed <= 0.1 * idler_bandwidth_max;
  return out;
}

QuantumFov fov_quantum(double focal_gdd, double idler_delay_time, double pump_duration,
                       double margin) {
  require(focal_gdd != 0 && std::isfinite(focal_gdd), "fov_quantum: focal GDD must be nonzero");
  require(idler_delay_time > 0, "fov_quantum: idler delay must be positive");
  require(pump_duration > 0, "fov_quantum: pump duration must be positive");
  require(margin >= 1, "fov_quantum: margin must be >= 1");
  QuantumFov out;
  out.bound_crystal = kTwoPi * std::abs(focal_gdd) / idler_delay_time;
  out.bound_pump = kTwoPi * std::abs(focal_gdd) / pump_duration;
  out.minimum = std::min(out.bound_crystal, out.bound_pump);
  out.margin = margin;
  return out;
}

QuantumFov fov_quantum_crystal_only(double focal_gdd, double idler_delay_time, double margin) {
  require(focal_gdd != 0 && std::isfinite(focal_gdd), "fov_quantum: focal GDD must be nonzero");
  require(idler_delay_time > 0, "fov_quantum: idler delay must be positive");
  require(margin >= 1, "fov_quantum: margin must be >= 1");
  QuantumFov out;
  out.bound_crystal = kTwoPi * std::abs(focal_gdd) / idler_delay_time;
  out.bound_pump = kNan;
  out.minimum = out.bound_crystal;
  out.margin = margin;
  return out;
}

double fov_classical(double focal_gdd, double idler_delay_time, double pump_duration) {
  require(focal_gdd != 0 && std::isfinite(focal_gdd), "fov_classical: focal GDD must be nonzero");
  require(idler_delay_time >= 0 && pump_duration >= 0,
          "fov_classical: durations must be >= 0");
  if (idler_delay_time == 0 && pump_duration == 0)
    throw std::invalid_argument("fov_classical: idler delay and pump duration both zero");
  return kTwoPi * std::abs(focal_gdd) / std::hypot(idler_delay_time, pump_duration);
}

ConstraintFlags check_constraints(const CrystalDispersion& d, double delta_omega_s,
                                  double delta_omega_i, double margin) {
  require(margin >= 1, "check_constraints: margin must be >= 1");
  require(delta_omega_s >= 0 && delta_omega_i >= 0,
          "check_constraints: bandwidths must be >= 0");
  const double tau_i = idler_delay(d);
  const double tau_s = spreading_time(d);
  const double rhs_i = delta_omega_i > 0 ? kTwoPi / delta_omega_i : kInf;
  const double rhs_s = delta_omega_s > 0 ? kTwoPi / delta_omega_s : kInf;
  ConstraintFlags out;
  out.idler_ok = tau_i * margin <= rhs_i;
  out.spreading_ok = tau_s * margin <= rhs_s;
  out.idler_ratio = tau_i > 0 ? rhs_i / tau_i : kInf;
  out.spreading_ratio = tau_s > 0 ? rhs_s / tau_s : kInf;
  out.margin = margin;
  return out;
}

MismatchMap mismatch_map(const CrystalDispersion& d, const Arrayd& omega_s_grid,
                         const Arrayd& omega_i_grid, double threshold,
                         double pump_active_bandwidth) {
  require(omega_s_grid.size() > 0 && omega_i_grid.size() > 0, "mismatch_map: empty grid");
  require(omega_s_grid.isFinite().all() && omega_i_grid.isFinite().all(),
          "mismatch_map: grids must be finite");
  require(threshold > 0, "mismatch_map: threshold must be positive");
  require(pump_active_bandwidth >= 0 && std::isfinite(pump_active_bandwidth),
          "mismatch_map: pump bandwidth must be finite and >= 0");
  require(d.length > 0 && std::isfinite(d.length), "mismatch_map: crystal length must be positive");

  MismatchMap map;
  map.omega_s = omega_s_grid;
  map.omega_i = omega_i_grid;
  map.threshold = threshold;
  map.pump_line_offset = pump_active_bandwidth / 2;
  const double slope_s = d.k_prime_s - d.k_prime_p;
  const double slope_i = d.k_prime_p - d.k_prime_i;
  map.band_half_width_i = slope_i != 0 ? 2 * threshold / (d.length * std::abs(slope_i)) : kInf;

  const Eigen::Index ni = omega_i_grid.size();
  const Eigen::Index ns = omega_s_grid.size();
  map.magnitude.resize(ni, ns);
  map.negligible.resize(ni, ns);
  const double half_length = d.length / 2;

  const auto fill_rows = [&](Eigen::Index lo, Eigen::Index len) {
    for (Eigen::Index r = lo; r < lo + len; ++r) {
      const Arrayd row = (slope_s * omega_s_grid + slope_i * omega_i_grid(r)).abs();
      map.magnitude.row(r) = row.transpose();
      map.negligible.row(r) = (row * half_length <= threshold).transpose();
    }
  };
  const int workers = std::min<int>(thread_budget(), static_cast<int>((ni + 63) / 64));
  if (workers <= 1) {
    fill_rows(0, ni);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const Eigen::Index chunk = (ni + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const Eigen::Index lo = chunk * w;
      const Eigen::Index len = std::min<Eigen::Index>(chunk, ni - lo);
      if (len > 0) pool.emplace_back(fill_rows, lo, len);
    }
    for (auto& th : pool) th.join();
  }
  return map;
}

DesignReport build_design_report(const DesignRequest& req) {
  // Re-running the factory validates the aggregate's fields in one place.
  (void)make_crystal_dispersion(req.crystal.k_prime_s, req.crystal.k_prime_p,
                                req.crystal.k_prime_i, req.crystal.k_double_prime_s,
                                req.crystal.length);
  require(req.focal_gdd != 0 && std::isfinite(req.focal_gdd),
          "build_design_report: focal GDD must be nonzero");
  require(req.magnification != 0 && std::isfinite(req.magnification),
          "build_design_report: magnification must be nonzero");
  require(req.n_pixels >= 1, "build_design_report: need at least one pixel");
  require(req.pixel_duration > 0, "build_design_report: pixel duration must be positive");
  require(req.margin >= 1, "build_design_report: margin must be >= 1");
  const bool chirped = req.pump == PumpPreparation::chirped;
  if (chirped)
    require(req.pump_duration > 0, "build_design_report: chirped pump needs a pulse duration");
  if (req.pump == PumpPreparation::shaped)
    require(req.pump_aperture > 0, "build_design_report: shaped pump needs an aperture length");

  DesignReport r;
  r.magnification = req.magnification;
  r.n_pixels = req.n_pixels;
  r.pixel_duration = req.pixel_duration;
  r.focal_gdd = req.focal_gdd;
  r.crystal_length = req.crystal.length;
  r.margin = req.margin;
  r.pump = req.pump;

  r.signal_bandwidth = kTwoPi / req.pixel_duration;
  r.idler_bandwidth = idler_bandwidth(r.signal_bandwidth, req.magnification, req.n_pixels,
                                      req.pixel_duration, req.focal_gdd);
  r.active_pump_bandwidth = active_pump_bandwidth(r.signal_bandwidth, req.magnification,
                                                  req.n_pixels, req.pixel_duration, req.focal_gdd);

  r.idler_delay = idler_delay(req.crystal);
  r.spreading_time = spreading_time(req.crystal);
  r.signal_gvd = req.crystal.k_double_prime_s;

  r.idler_bandwidth_limit = r.idler_delay > 0 ? kTwoPi / (req.margin * r.idler_delay) : kInf;
  try {
    const PixelBudget budget = pixel_budget(req.focal_gdd, req.pixel_duration,
                                            r.idler_bandwidth_limit, r.signal_bandwidth,
                                            req.magnification);
    r.pixel_budget = budget.pixels;
    r.high_magnification = budget.high_magnification;
  } catch (const FeasibilityError&) {
    r.budget_feasible = false;
    r.pixel_budget = kNan;
  }

  if (r.idler_delay > 0) {
    r.fov_quantum = chirped
                        ? fov_quantum(req.focal_gdd, r.idler_delay, req.pump_duration, req.margin)
                        : fov_quantum_crystal_only(req.focal_gdd, r.idler_delay, req.margin);
  } else {
    // A walk-off-free crystal does not limit the view; only a chirped pump
    // can, so assemble the degenerate bounds by hand.
    r.fov_quantum.bound_crystal = kInf;
    r.fov_quantum.bound_pump = chirped ? kTwoPi * std::abs(req.focal_gdd) / req.pump_duration : kNan;
    r.fov_quantum.minimum = chirped ? r.fov_quantum.bound_pump : kInf;
    r.fov_quantum.margin = req.margin;
  }
  const double pump_tail = chirped ? req.pump_duration : 0.0;
  r.fov_classical = (r.idler_delay == 0 && pump_tail == 0)
                        ? kInf
                        : fov_classical(req.focal_gdd, r.idler_delay, pump_tail);

  r.pump_duration = chirped ? req.pump_duration : kNan;
  r.pump_bandwidth = chirped ? kTwoPi / req.pump_duration : kNan;
  r.pump_stretched = chirped ? std::abs(req.focal_gdd) * r.pump_bandwidth : kNan;
  r.pump_aperture = req.pump == PumpPreparation::shaped ? req.pump_aperture : kNan;
  r.pump_uniformity_ratio = chirped ? r.pump_bandwidth / r.active_pump_bandwidth : kNan;

  r.constraints = check_constraints(req.crystal, r.signal_bandwidth, r.idler_bandwidth, req.margin);
  return r;
}

}  // namespace chronolens
