#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Core>

#include "chronolens/errors.hpp"
#include "chronolens/types.hpp"

namespace chronolens {

inline constexpr double kSpeedOfLight = 299792458.0;  // [m/s]

// Group-delay data of the SFG crystal. Only the signal/pump second derivative
// enters the budgets: in the type-I degenerate configuration signal and pump
// share the ordinary index, so k''_s serves both.
struct CrystalDispersion {
  double k_prime_s = 0;         // [s/m]
  double k_prime_p = 0;         // [s/m]
  double k_prime_i = 0;         // [s/m]
  double k_double_prime_s = 0;  // [s^2/m]
  double length = 0;            // [m]
};

CrystalDispersion make_crystal_dispersion(double k_prime_s, double k_prime_p, double k_prime_i,
                                          double k_double_prime_s, double length);

// n^2 = a + b/(l^2 - c) + d*l^2 with l the wavelength in micrometers. The
// sign of each term is carried by the coefficient itself (d < 0 for BBO).
struct SellmeierCoefficients {
  double a = 1;
  double b = 0;
  double c = 0;
  double d = 0;
};

enum class WavePolarization { ordinary, extraordinary };

struct SellmeierSpec {
  SellmeierCoefficients ordinary{};
  SellmeierCoefficients extraordinary{};
  double cut_angle_deg = 0;
  double lambda_s = 0;  // [m]
  double lambda_p = 0;  // [m]
  double lambda_i = 0;  // [m]
  WavePolarization pol_s = WavePolarization::ordinary;
  WavePolarization pol_p = WavePolarization::ordinary;
  WavePolarization pol_i = WavePolarization::extraordinary;
};

// Index at a wavelength [m]. ValidityError outside the coefficient validity
// range (pole crossed, or index falling below one).
double sellmeier_index(const SellmeierCoefficients& coef, double lambda);

// Index seen by a wave of the given polarization; the extraordinary wave uses
// the cut-angle mixing 1/n^2(theta) = cos^2/n_o^2 + sin^2/n_e^2.
double wave_index(const SellmeierSpec& spec, WavePolarization pol, double lambda);

struct DerivativePair {
  double first = 0;
  double second = 0;
};

// First and second derivative of k(omega) by adaptive central differences:
// the step starts at omega*1e-3 and is halved until successive estimates
// agree to 1e-6 relative; the returned value is the Richardson extrapolation
// of the last pair, which removes the leading quadratic truncation term.
// Works on arbitrary index formulas, not just Sellmeier fits. The callable
// runs in long double because the second difference loses ~12 digits to
// cancellation; double-precision evaluations would cap k'' near 1e-8
// relative, short of what the committed goldens require.
DerivativePair wavevector_derivatives(const std::function<long double(long double)>& k_of_omega,
                                      double omega);

CrystalDispersion dispersion_from_sellmeier(const SellmeierSpec& spec, double length);

// Linearized mismatch (k'_s - k'_p) Omega_s + (k'_p - k'_i) Omega_i, zero at
// the carriers by construction.
inline double phase_mismatch(const CrystalDispersion& d, double omega_s, double omega_i) {
  return (d.k_prime_s - d.k_prime_p) * omega_s + (d.k_prime_p - d.k_prime_i) * omega_i;
}

namespace detail {

inline bool group_degenerate(const CrystalDispersion& d) {
  const double scale = std::max(std::abs(d.k_prime_s), std::abs(d.k_prime_p));
  return std::abs(d.k_prime_s - d.k_prime_p) <= 1e-9 * scale;
}

}  // namespace detail

// Degenerate-case refinement: k''_s Omega_s^2 + (k'_p - k'_i) Omega_i. Only
// meaningful when signal and pump share the group velocity.
inline double phase_mismatch_quadratic(const CrystalDispersion& d, double omega_s,
                                       double omega_i) {
  if (!detail::group_degenerate(d))
    throw std::invalid_argument(
        "phase_mismatch_quadratic: signal and pump group velocities differ");
  return d.k_double_prime_s * omega_s * omega_s + (d.k_prime_p - d.k_prime_i) * omega_i;
}

inline double idler_delay(const CrystalDispersion& d) {
  return std::abs(d.k_prime_p - d.k_prime_i) * d.length;
}

// sqrt(|k''_s| L). A negative k''_s (anomalous dispersion) spreads the pixel
// just the same; the sign is reported separately where it matters.
inline double spreading_time(const CrystalDispersion& d) {
  return std::sqrt(std::abs(d.k_double_prime_s) * d.length);
}

namespace detail {

inline void check_bandwidth_args(double delta_omega_s, double magnification, int n_pixels,
                                 double pixel_duration, double focal_gdd, const char* who) {
  if (!(delta_omega_s >= 0) || !std::isfinite(delta_omega_s))
    throw std::invalid_argument(std::string(who) + ": signal bandwidth must be >= 0");
  if (magnification == 0 || !std::isfinite(magnification))
    throw std::invalid_argument(std::string(who) + ": magnification must be nonzero");
  if (n_pixels < 1) throw std::invalid_argument(std::string(who) + ": need at least one pixel");
  if (!(pixel_duration > 0))
    throw std::invalid_argument(std::string(who) + ": pixel duration must be positive");
  if (focal_gdd == 0 || !std::isfinite(focal_gdd))
    throw std::invalid_argument(std::string(who) + ": focal GDD must be nonzero");
}

}  // namespace detail

// Spectral width of the idler train: one compressed pixel plus the carrier
// comb laid down by the pump chirp.
inline double idler_bandwidth(double delta_omega_s, double magnification, int n_pixels,
                              double pixel_duration, double focal_gdd) {
  detail::check_bandwidth_args(delta_omega_s, magnification, n_pixels, pixel_duration, focal_gdd,
                               "idler_bandwidth");
  return delta_omega_s / std::abs(magnification) +
         (n_pixels - 1) * pixel_duration / focal_gdd;
}

// Pump bandwidth engaged by the interaction. Composed as signal plus idler
// bandwidth so the lossless relation holds to the last bit; expanding the
// sum gives delta_omega_s (1 + 1/|M|) + (N-1) tau0 / D_f.
inline double active_pump_bandwidth(double delta_omega_s, double magnification, int n_pixels,
                                    double pixel_duration, double focal_gdd) {
  return delta_omega_s +
         idler_bandwidth(delta_omega_s, magnification, n_pixels, pixel_duration, focal_gdd);
}

struct PixelBudget {
  double pixels = 0;
  // Set when the compressed-pixel term delta_omega_s/|M| is at most a tenth
  // of the idler bandwidth cap, i.e. |M| well above the ratio of the idler
  // walk-off to the pixel duration; the budget is then carrier-comb limited.
  bool high_magnification = false;
};

// Inverts the idler-bandwidth relation for the pixel count a given idler
// bandwidth cap allows. FeasibilityError when the cap cannot even pass one
// pixel's compressed spectrum.
PixelBudget pixel_budget(double focal_gdd, double pixel_duration, double idler_bandwidth_max,
                         double delta_omega_s, double magnification);

struct QuantumFov {
  double bound_crystal = 0;  // 2 pi D_f / tau_i
  double bound_pump = 0;     // 2 pi D_f / tau_p; NaN when no pump bound applies
  double minimum = 0;
  double margin = 10;

  // The bounds are strict "much less than" limits; this is the view width
  // after backing off by the margin factor.
  double margined() const { return minimum / margin; }
};

QuantumFov fov_quantum(double focal_gdd, double idler_delay_time, double pump_duration,
                       double margin = 10);

// Shaped pumps have no pre-chirp pulse, so only the crystal bound applies.
QuantumFov fov_quantum_crystal_only(double focal_gdd, double idler_delay_time,
                                    double margin = 10);

double fov_classical(double focal_gdd, double idler_delay_time, double pump_duration);

struct ConstraintFlags {
  bool idler_ok = false;
  bool spreading_ok = false;
  double idler_ratio = 0;      // (2 pi / delta_omega_i) / tau_i
  double spreading_ratio = 0;  // (2 pi / delta_omega_s) / tau_s
  double margin = 10;
};

// Checks the idler-delay and pixel-spreading budgets: each flag passes when
// the timescale times the margin stays within the inverse bandwidth.
ConstraintFlags check_constraints(const CrystalDispersion& d, double delta_omega_s,
                                  double delta_omega_i, double margin = 10);

struct MismatchMap {
  Arrayd omega_s;  // [rad/s]
  Arrayd omega_i;
  // magnitude(i, j) = |Delta(omega_s(j), omega_i(i))| [1/m]; rows follow the
  // idler axis so each row is a constant-Omega_i scanline.
  Eigen::ArrayXXd magnitude;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> negligible;
  double threshold = std::numbers::pi / 2;  // level on |Delta| L / 2
  // Half-width in Omega_i of the negligible interval at fixed Omega_s; the
  // band's center moves with Omega_s but its idler width does not.
  double band_half_width_i = 0;
  // Pump-constancy lines Omega_i = Omega_s +/- offset (the perpendicular
  // distance between them is then delta_omega_pa / sqrt(2)); zero when no
  // pump bandwidth was given.
  double pump_line_offset = 0;
};

MismatchMap mismatch_map(const CrystalDispersion& d, const Arrayd& omega_s_grid,
                         const Arrayd& omega_i_grid, double threshold = std::numbers::pi / 2,
                         double pump_active_bandwidth = 0);

enum class PumpPreparation { chirped, shaped, ideal };

struct DesignRequest {
  CrystalDispersion crystal{};
  double focal_gdd = 0;
  double magnification = 0;
  int n_pixels = 1;
  double pixel_duration = 0;  // tau0; the signal bandwidth is 2 pi / tau0
  PumpPreparation pump = PumpPreparation::chirped;
  double pump_duration = 0;   // pre-chirp pulse duration, chirped pumps only
  double pump_aperture = 0;   // rect window length, shaped pumps only
  double margin = 10;
};

struct DesignReport {
  // geometry echo
  double magnification = 0;
  int n_pixels = 0;
  double pixel_duration = 0;
  double focal_gdd = 0;
  double crystal_length = 0;
  double margin = 10;
  // bandwidths for the requested train
  double signal_bandwidth = 0;
  double idler_bandwidth = 0;
  double active_pump_bandwidth = 0;
  // crystal timescales
  double idler_delay = 0;
  double spreading_time = 0;
  double signal_gvd = 0;  // k''_s with its sign, so anomalous media are visible
  // largest pixel count the crystal admits at this margin
  double idler_bandwidth_limit = 0;  // 2 pi / (margin tau_i)
  double pixel_budget = 0;           // NaN when infeasible
  bool budget_feasible = true;
  bool high_magnification = false;
  // field of view
  QuantumFov fov_quantum{};
  double fov_classical = 0;
  // pump preparation bookkeeping (NaN where the mode has no such number)
  PumpPreparation pump = PumpPreparation::chirped;
  double pump_duration = 0;
  double pump_bandwidth = 0;         // 2 pi / tau_p
  double pump_stretched = 0;         // D_f * pump_bandwidth
  double pump_aperture = 0;
  double pump_uniformity_ratio = 0;  // pump_bandwidth / active_pump_bandwidth
  // budgets for the requested train
  ConstraintFlags constraints{};

  bool feasible() const {
    return budget_feasible && constraints.idler_ok && constraints.spreading_ok;
  }
};

DesignReport build_design_report(const DesignRequest& req);

}  // namespace chronolens
