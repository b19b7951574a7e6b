#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <utility>

#include "chronolens/types.hpp"

namespace chronolens {

// Squeezed-light source described by the squeezing parameter r(Omega) and the
// squeezing angle psi(Omega); both are even functions of Omega so the two-mode
// spectra below are exact. omega_c is the characteristic frequency; when the
// model is built from a crystal it equals 1/sqrt(gvd * length).
template <typename Scalar>
struct BasicOpaModel {
  std::function<Scalar(Scalar)> r_of;
  std::function<Scalar(Scalar)> psi_of;
  Scalar omega_c = 0;
  Scalar gvd = 0;
  Scalar length = 0;
};

using OpaModel = BasicOpaModel<double>;

// Reference model: constant r, quadratic angle psi0 + Omega^2/(2 omega_c^2).
template <typename Scalar>
BasicOpaModel<Scalar> reference_opa_model(Scalar r0, Scalar psi0, Scalar omega_c) {
  if (!(omega_c > 0)) throw std::invalid_argument("reference_opa_model: omega_c must be positive");
  if (r0 < 0) throw std::invalid_argument("reference_opa_model: r must be non-negative");
  BasicOpaModel<Scalar> model;
  model.omega_c = omega_c;
  model.r_of = [r0](Scalar) { return r0; };
  model.psi_of = [psi0, omega_c](Scalar w) { return psi0 + w * w / (2 * omega_c * omega_c); };
  return model;
}

template <typename Scalar>
BasicOpaModel<Scalar> reference_opa_model_physical(Scalar r0, Scalar psi0, Scalar gvd,
                                                   Scalar length) {
  if (!(gvd > 0) || !(length > 0))
    throw std::invalid_argument("reference_opa_model_physical: gvd and length must be positive");
  auto model = reference_opa_model(r0, psi0, Scalar(1) / std::sqrt(gvd * length));
  model.gvd = gvd;
  model.length = length;
  return model;
}

struct HomodyneSetting {
  double lo_phase = 0;  // local-oscillator phase, periodic mod 2pi
};

struct SqueezingSpectrum {
  Arrayd frequencies;
  Arrayd values;  // normalized to shot noise = 1
};

// Bogoliubov pair in the gauge arg U = 0:
// |U| = cosh r, |V| = sinh r, arg(V/U) = 2 psi.
template <typename Scalar>
std::pair<std::complex<Scalar>, std::complex<Scalar>> bogoliubov_from_rpsi(
    const BasicOpaModel<Scalar>& model, Scalar omega) {
  const Scalar r = model.r_of(omega);
  const Scalar psi = model.psi_of(omega);
  const std::complex<Scalar> u(std::cosh(r), 0);
  const std::complex<Scalar> v = std::sinh(r) * std::exp(std::complex<Scalar>(0, 2 * psi));
  return {u, v};
}

// Homodyne squeezing spectrum of the source:
// S(Omega) = cos^2 theta e^{2r} + sin^2 theta e^{-2r}, theta = psi(Omega) - phi.
template <typename Scalar>
Scalar squeezing_value(const BasicOpaModel<Scalar>& model, const HomodyneSetting& lo,
                       Scalar omega) {
  const Scalar r = model.r_of(omega);
  const Scalar theta = model.psi_of(omega) - static_cast<Scalar>(lo.lo_phase);
  const Scalar c = std::cos(theta);
  const Scalar s = std::sin(theta);
  return c * c * std::exp(2 * r) + s * s * std::exp(-2 * r);
}

inline SqueezingSpectrum squeezing_spectrum(const OpaModel& model, const HomodyneSetting& lo,
                                            const Arrayd& omega_grid) {
  SqueezingSpectrum out;
  out.frequencies = omega_grid;
  out.values.resize(omega_grid.size());
  for (Eigen::Index i = 0; i < omega_grid.size(); ++i)
    out.values(i) = squeezing_value(model, lo, omega_grid(i));
  return out;
}

// Spectrum after the imaging system: compressed in frequency by |M| and mixed
// with vacuum by the lens conversion efficiency eta.
inline SqueezingSpectrum imaged_squeezing_spectrum(const OpaModel& model, const HomodyneSetting& lo,
                                                   double magnification, double efficiency,
                                                   const Arrayd& omega_grid) {
  if (magnification == 0)
    throw std::invalid_argument("imaged_squeezing_spectrum: magnification must be nonzero");
  if (efficiency < 0 || efficiency > 1)
    throw std::invalid_argument("imaged_squeezing_spectrum: efficiency outside [0, 1]");
  const double mag = std::abs(magnification);
  SqueezingSpectrum out;
  out.frequencies = omega_grid;
  out.values.resize(omega_grid.size());
  for (Eigen::Index i = 0; i < omega_grid.size(); ++i)
    out.values(i) = 1 - efficiency + efficiency * squeezing_value(model, lo, mag * omega_grid(i));
  return out;
}

// Input and output spectra on a shared plotting grid over [0, 4 omega_c].
inline std::pair<SqueezingSpectrum, SqueezingSpectrum> fig_dataset(const OpaModel& model,
                                                                   const HomodyneSetting& lo,
                                                                   double magnification,
                                                                   double efficiency,
                                                                   Eigen::Index n_points = 401) {
  if (n_points < 2) throw std::invalid_argument("fig_dataset: need at least 2 points");
  const Arrayd grid = Arrayd::LinSpaced(n_points, 0.0, 4 * model.omega_c);
  return {squeezing_spectrum(model, lo, grid),
          imaged_squeezing_spectrum(model, lo, magnification, efficiency, grid)};
}

}  // namespace chronolens
