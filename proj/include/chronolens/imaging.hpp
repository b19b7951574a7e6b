#pragma once

#include <limits>
#include <variant>
#include <vector>

#include "chronolens/envelope.hpp"
#include "chronolens/sfg.hpp"
#include "chronolens/time_grid.hpp"
#include "chronolens/types.hpp"

namespace chronolens {

// Dispersion triple of a single-lens system. The members obey
// 1/output_gdd + 1/input_gdd = 1/focal_gdd and magnification = -output_gdd/input_gdd.
struct ImagingConfig {
  double focal_gdd = 0;
  double magnification = 0;
  double input_gdd = 0;
  double output_gdd = 0;
};

// Solves the imaging condition for the outer dispersions:
// input_gdd = focal_gdd (M - 1)/M, output_gdd = focal_gdd (1 - M).
// Unit magnification collapses the input dispersion to zero and is rejected.
ImagingConfig solve_imaging_config(double focal_gdd, double magnification);

// Train of equally spaced Gaussian pixels centered on t = 0. The model ties
// the spacing to the pixel duration, so field_of_view = n_pixels * duration.
struct PixelTrain {
  int n_pixels = 0;
  double pixel_duration = 0;
  double spacing = 0;
  Arraycd amplitudes;  // complex weight per pixel
  double field_of_view = 0;
};

PixelTrain make_pixel_train(int n_pixels, double pixel_duration);
PixelTrain make_pixel_train(int n_pixels, double pixel_duration, const Arraycd& amplitudes);

// One measured pixel. duration follows the amplitude-FWHM convention of
// measured_duration; lossy marks pixels whose stretched support misses the
// pump aperture (pumped chains only).
struct PixelMeasurement {
  double centroid = 0;
  double duration = 0;
  double spectral_centroid = 0;
  double energy = 0;
  bool lossy = false;
};

struct PixelReport {
  std::vector<PixelMeasurement> pixels;
  // Output-to-input spacing ratio with the sign taken from the ordering.
  // Filled by simulate_chain; NaN from measure_pixels alone (no input
  // reference) and for single-pixel trains.
  double measured_magnification = std::numeric_limits<double>::quiet_NaN();
  // Mean spectral-centroid step between adjacent pixels; NaN below 2 pixels.
  double frequency_step = std::numeric_limits<double>::quiet_NaN();
};

struct IdealLens {};
struct PumpedLens {
  PumpProfile pump;
  double coupling = 0;
};
using LensMode = std::variant<IdealLens, PumpedLens>;

// Sum of the train's weighted Gaussian pixels on the grid.
ComplexEnvelope synthesize_train(const TimeGrid& grid, const PixelTrain& train);

// One-step magnifier: band-limited evaluation of the input at t / M with the
// 1/sqrt(M) amplitude factor and the residual quadratic phase t^2/(2 M D_f).
// The magnified image must still fit the grid, else WindowError.
ComplexEnvelope ideal_image(const ComplexEnvelope& env_in, const ImagingConfig& config);

// Windowed diagnostics around the expected centers (strictly increasing).
// Windows split at the midpoints between neighbors; the field must have
// decayed to 1e-3 of the weaker neighboring peak at every split, else
// MeasurementError.
PixelReport measure_pixels(const ComplexEnvelope& env,
                           const std::vector<double>& expected_centers);

struct ChainResult {
  ComplexEnvelope output;
  PixelReport report;
};

// Full cascade: synthesize, stretch by input_gdd, lens (ideal phase or SFG
// conversion with the given pump), compress by output_gdd, measure. The grid
// must cover the stretched intermediate. The cascade is linear, so the report
// rows are measured from single-pixel responses, which keeps the measurement
// windows honestly separated even when the imaged pixels overlap.
ChainResult simulate_chain(const TimeGrid& grid, const PixelTrain& train,
                           const ImagingConfig& config, const LensMode& lens);

// Relative L2 distance between two envelopes modulo one global phase, with
// the phase aligned at the first envelope's energy centroid.
double phase_aligned_l2_error(const ComplexEnvelope& a, const ComplexEnvelope& b);

}  // namespace chronolens
