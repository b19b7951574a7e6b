#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "chronolens/errors.hpp"
#include "chronolens/time_grid.hpp"
#include "chronolens/types.hpp"

namespace chronolens {

// Slowly-varying field amplitude sampled on a uniform time grid.
// carrier_detuning is bookkeeping only: the offset of this envelope's carrier
// from the nominal carrier. Operations carry it through unchanged.
template <typename Scalar>
struct BasicComplexEnvelope {
  BasicTimeGrid<Scalar> grid;
  CArray1<Scalar> samples;
  Scalar carrier_detuning = 0;
};

// Spectral amplitudes on the grid's implied centered frequency axis,
// carrying the continuous-transform measure: A(Omega) = integral a(t) e^{-i Omega t} dt.
template <typename Scalar>
struct BasicSpectrum {
  BasicTimeGrid<Scalar> grid;
  CArray1<Scalar> samples;
  Scalar carrier_detuning = 0;
};

using ComplexEnvelope = BasicComplexEnvelope<double>;
using Spectrum = BasicSpectrum<double>;

namespace detail {

// (-1)^n factors translating between DFT index order and the centered axis.
template <typename Scalar>
Array1<Scalar> alternating_signs(Eigen::Index n) {
  Array1<Scalar> s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = (i & 1) ? Scalar(-1) : Scalar(1);
  return s;
}

}  // namespace detail

template <typename Scalar>
Scalar energy(const BasicComplexEnvelope<Scalar>& env) {
  return env.samples.abs2().sum() * env.grid.dt;
}

template <typename Scalar>
Scalar energy(const BasicSpectrum<Scalar>& spec) {
  return spec.samples.abs2().sum() * spec.grid.d_omega() / static_cast<Scalar>(kTwoPi);
}

// FWHM of |y| by linear interpolation around the half-maximum crossings.
template <typename Scalar>
Scalar amplitude_fwhm(const Array1<Scalar>& x, const Array1<Scalar>& y_abs) {
  Eigen::Index imax = 0;
  y_abs.maxCoeff(&imax);
  const Scalar half = y_abs(imax) / 2;
  Eigen::Index il = imax;
  while (il > 0 && y_abs(il) > half) --il;
  Eigen::Index ir = imax;
  while (ir < y_abs.size() - 1 && y_abs(ir) > half) ++ir;
  auto cross = [&](Eigen::Index a, Eigen::Index b) {
    if (y_abs(b) == y_abs(a)) return x(a);
    return x(a) + (x(b) - x(a)) * (half - y_abs(a)) / (y_abs(b) - y_abs(a));
  };
  const Scalar xl = cross(il, il + 1);
  const Scalar xr = cross(ir, ir - 1);
  return xr - xl;
}

template <typename Scalar>
Scalar amplitude_fwhm(const BasicComplexEnvelope<Scalar>& env) {
  const Array1<Scalar> mag = env.samples.abs();
  const Array1<Scalar> t = env.grid.times();
  return amplitude_fwhm(t, mag);
}

template <typename Scalar>
Scalar amplitude_fwhm(const BasicSpectrum<Scalar>& spec) {
  const Array1<Scalar> mag = spec.samples.abs();
  const Array1<Scalar> w = spec.grid.omegas();
  return amplitude_fwhm(w, mag);
}

// Amplitude-FWHM duration in the 2pi/(8 ln 2) convention.
template <typename Scalar>
Scalar measured_duration(const BasicComplexEnvelope<Scalar>& env) {
  return amplitude_fwhm(env) * static_cast<Scalar>(kDurationPerFwhm);
}

template <typename Scalar>
Scalar temporal_centroid(const BasicComplexEnvelope<Scalar>& env) {
  const Array1<Scalar> weight = env.samples.abs2();
  return (env.grid.times() * weight).sum() / weight.sum();
}

template <typename Scalar>
Scalar spectral_centroid(const BasicSpectrum<Scalar>& spec) {
  const Array1<Scalar> weight = spec.samples.abs2();
  return (spec.grid.omegas() * weight).sum() / weight.sum();
}

// Gaussian pixel. sigma is chosen so that the duration convention holds:
// duration = FWHM_amplitude * 2pi/(8 ln 2), FWHM_amplitude = 2 sigma sqrt(2 ln 2).
template <typename Scalar>
BasicComplexEnvelope<Scalar> gaussian_pulse(const BasicTimeGrid<Scalar>& grid, Scalar center,
                                            Scalar duration, Scalar carrier_shift = 0) {
  if (!(duration > 3 * grid.dt))
    throw ResolutionError("gaussian_pulse: duration not resolvable on this grid");
  const Scalar fwhm = duration / static_cast<Scalar>(kDurationPerFwhm);
  const Scalar sigma = fwhm / static_cast<Scalar>(kFwhmPerSigma);
  const Scalar t_first = grid.t0;
  const Scalar t_last = grid.t0 + grid.dt * static_cast<Scalar>(grid.n_samples - 1);
  // Tails folding over the grid edge alias under the circular transforms, so
  // the pulse amplitude at the nearer edge must be negligible.
  const Scalar near_edge = std::min(std::abs(t_first - center), std::abs(t_last - center));
  const Scalar tail = std::exp(-near_edge * near_edge / (2 * sigma * sigma));
  if (center < t_first || center > t_last || tail > Scalar(1e-6))
    throw WindowError("gaussian_pulse: pulse support clipped at the grid edge");

  BasicComplexEnvelope<Scalar> env;
  env.grid = grid;
  const Array1<Scalar> t = grid.times() - center;
  const Array1<Scalar> envelope = (-t.square() / (2 * sigma * sigma)).exp();
  const Array1<Scalar> phase = carrier_shift * t;
  env.samples = envelope.template cast<std::complex<Scalar>>() *
                (std::complex<Scalar>(0, 1) * phase.template cast<std::complex<Scalar>>()).exp();
  return env;
}

// Forward transform, A(Omega) = integral a(t) e^{-i Omega t} dt, discretized with
// the dt measure on the centered frequency axis.
template <typename Scalar>
BasicSpectrum<Scalar> to_spectrum(const BasicComplexEnvelope<Scalar>& env) {
  const Eigen::Index n = env.grid.n_samples;
  Eigen::FFT<Scalar> fft;
  const Array1<Scalar> alt = detail::alternating_signs<Scalar>(n);
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> in =
      (env.samples * alt.template cast<std::complex<Scalar>>()).matrix();
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> out;
  fft.fwd(out, in);
  BasicSpectrum<Scalar> spec;
  spec.grid = env.grid;
  spec.carrier_detuning = env.carrier_detuning;
  const Array1<Scalar> w = env.grid.omegas();
  const std::complex<Scalar> i1(0, 1);
  spec.samples = out.array() * env.grid.dt *
                 (-i1 * (w * env.grid.t0).template cast<std::complex<Scalar>>()).exp();
  return spec;
}

template <typename Scalar>
BasicComplexEnvelope<Scalar> to_time(const BasicSpectrum<Scalar>& spec) {
  const Eigen::Index n = spec.grid.n_samples;
  Eigen::FFT<Scalar> fft;
  const Array1<Scalar> w = spec.grid.omegas();
  const std::complex<Scalar> i1(0, 1);
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> in =
      (spec.samples * (i1 * (w * spec.grid.t0).template cast<std::complex<Scalar>>()).exp() /
       spec.grid.dt)
          .matrix();
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> out;
  fft.inv(out, in);
  BasicComplexEnvelope<Scalar> env;
  env.grid = spec.grid;
  env.carrier_detuning = spec.carrier_detuning;
  const Array1<Scalar> alt = detail::alternating_signs<Scalar>(n);
  env.samples = out.array() * alt.template cast<std::complex<Scalar>>();
  return env;
}

// Dispersive propagation: multiply the spectrum by exp(+i D Omega^2 / 2).
// The + sign is the module-wide convention; together with the e^{+i tau^2/(2 D_f)}
// lens it makes the D_s -> lens -> D_i cascade reproduce the imaging equation
// (pinned by the end-to-end test).
namespace detail {

// Pure quadratic spectral phase, no fit check. Callers that can tolerate a
// known far-field floor (hard-aperture diffraction) guard the edges themselves.
template <typename Scalar>
BasicComplexEnvelope<Scalar> quadratic_spectral_phase(const BasicComplexEnvelope<Scalar>& env,
                                                      Scalar gdd) {
  BasicSpectrum<Scalar> spec = to_spectrum(env);
  const Array1<Scalar> w = spec.grid.omegas();
  const std::complex<Scalar> i1(0, 1);
  spec.samples *= (i1 * (gdd / 2 * w.square()).template cast<std::complex<Scalar>>()).exp();
  return to_time(spec);
}

// Fraction of the energy sitting in the outer 1/32 of the grid on each side.
template <typename Scalar>
Scalar edge_energy_fraction(const BasicComplexEnvelope<Scalar>& env) {
  const Eigen::Index n = env.grid.n_samples;
  const Eigen::Index edge = std::max<Eigen::Index>(Eigen::Index{1}, n / 32);
  const Scalar total = env.samples.abs2().sum();
  if (!(total > 0)) return Scalar(0);
  return (env.samples.head(edge).abs2().sum() + env.samples.tail(edge).abs2().sum()) / total;
}

}  // namespace detail

template <typename Scalar>
BasicComplexEnvelope<Scalar> apply_gdd(const BasicComplexEnvelope<Scalar>& env, Scalar gdd) {
  BasicComplexEnvelope<Scalar> out = detail::quadratic_spectral_phase(env, gdd);
  // Wraparound guard: the outer 1/32 of the grid on each side must stay empty.
  if (detail::edge_energy_fraction(out) > Scalar(1e-6))
    throw WindowError("apply_gdd: stretched field reaches the grid edge, enlarge the span");
  return out;
}

}  // namespace chronolens
