#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "chronolens/envelope.hpp"
#include "chronolens/errors.hpp"
#include "chronolens/threads.hpp"
#include "chronolens/types.hpp"

namespace chronolens {

// Pump field a_p(tau) = A_p(tau) exp(i phi_p(tau)) driving the SFG time lens.
// The aperture [t0, t1] is the interval where the conversion coefficient is
// declared close to one (modulus within 0.1% of peak for chirped pumps, the
// exact rectangle for shaped pumps).
template <typename Scalar>
struct BasicPumpProfile {
  BasicComplexEnvelope<Scalar> envelope;
  Scalar focal_gdd = 0;
  Scalar aperture_lo = 0;
  Scalar aperture_hi = 0;

  Scalar aperture() const { return aperture_hi - aperture_lo; }
};

using PumpProfile = BasicPumpProfile<double>;

// Time-lens working point: coupling = g A_p0 L at the pump peak.
struct LensConfig {
  double coupling = 0;
  double focal_gdd = 0;

  double efficiency() const {
    const double s = std::sin(coupling);
    return s * s;
  }
};

// Pointwise c(tau) = cos[g A_p(tau) L], s(tau) = sin[g A_p(tau) L].
template <typename Scalar>
std::pair<Array1<Scalar>, Array1<Scalar>> lens_coefficients(const Array1<Scalar>& coupling_profile) {
  return {coupling_profile.cos(), coupling_profile.sin()};
}

namespace detail {

// Per-point coupling g A_p(tau) L and unit pump phasor e^{i phi_p(tau)}.
template <typename Scalar>
void pump_decompose(const BasicPumpProfile<Scalar>& pump, Scalar coupling,
                    Array1<Scalar>& coupling_profile, CArray1<Scalar>& phasor) {
  const Array1<Scalar> mod = pump.envelope.samples.abs();
  const Scalar peak = mod.maxCoeff();
  const Eigen::Index n = mod.size();
  coupling_profile = peak > 0 ? Array1<Scalar>(coupling * mod / peak)
                              : Array1<Scalar>(Array1<Scalar>::Zero(n));
  phasor.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    phasor(i) = mod(i) > 0 ? pump.envelope.samples(i) / mod(i) : std::complex<Scalar>(1, 0);
}

}  // namespace detail

// Beam-splitter solution of the SFG interaction at perfect phase matching:
//   sig_out = c sig_in + s e^{-i phi_p} idl_in
//   idl_out = -s e^{i phi_p} sig_in + c idl_in
template <typename Scalar>
std::pair<BasicComplexEnvelope<Scalar>, BasicComplexEnvelope<Scalar>> apply_sfg_analytic(
    const BasicComplexEnvelope<Scalar>& sig_in, const BasicComplexEnvelope<Scalar>& idl_in,
    const BasicPumpProfile<Scalar>& pump, Scalar coupling) {
  if (!(sig_in.grid == idl_in.grid) || !(sig_in.grid == pump.envelope.grid))
    throw std::invalid_argument("apply_sfg_analytic: envelopes on different grids");

  Array1<Scalar> profile;
  CArray1<Scalar> phasor;
  detail::pump_decompose(pump, coupling, profile, phasor);
  auto [c, s] = lens_coefficients(profile);
  const auto cc = c.template cast<std::complex<Scalar>>();
  const auto sc = s.template cast<std::complex<Scalar>>();

  BasicComplexEnvelope<Scalar> sig_out = sig_in;
  BasicComplexEnvelope<Scalar> idl_out = idl_in;
  sig_out.samples = cc * sig_in.samples + sc * phasor.conjugate() * idl_in.samples;
  idl_out.samples = -sc * phasor * sig_in.samples + cc * idl_in.samples;
  return {std::move(sig_out), std::move(idl_out)};
}

// Infinite-aperture lens limit: idl_out = -exp(i tau^2/(2 D_f)) sig_in.
template <typename Scalar>
BasicComplexEnvelope<Scalar> apply_ideal_lens(const BasicComplexEnvelope<Scalar>& sig_in,
                                              Scalar focal_gdd) {
  if (focal_gdd == 0) throw std::invalid_argument("apply_ideal_lens: focal GDD must be nonzero");
  const Array1<Scalar> t = sig_in.grid.times();
  const std::complex<Scalar> i1(0, 1);
  BasicComplexEnvelope<Scalar> out = sig_in;
  out.samples =
      -sig_in.samples *
      (i1 * (t.square() / (2 * focal_gdd)).template cast<std::complex<Scalar>>()).exp();
  return out;
}

// Fixed-step RK4 for the coupled propagation equations
//   d a_s/dz =  g a_p^* a_i e^{-i Delta z}
//   d a_i/dz = -g a_p a_s e^{+i Delta z}
// independently at each grid point, z in [0, L]. The pump is static data
// (undepleted) and the tau axis is split across threads.
template <typename Scalar>
std::pair<BasicComplexEnvelope<Scalar>, BasicComplexEnvelope<Scalar>> integrate_sfg_ode(
    const BasicComplexEnvelope<Scalar>& sig_in, const BasicComplexEnvelope<Scalar>& idl_in,
    const BasicPumpProfile<Scalar>& pump, Scalar coupling, Scalar mismatch,
    Scalar crystal_length, int n_steps) {
  if (!(sig_in.grid == idl_in.grid) || !(sig_in.grid == pump.envelope.grid))
    throw std::invalid_argument("integrate_sfg_ode: envelopes on different grids");
  if (n_steps < 100) throw StepError("integrate_sfg_ode: need at least 100 steps");
  const Scalar phase_per_step = std::abs(mismatch * crystal_length) / static_cast<Scalar>(n_steps);
  if (!(phase_per_step < Scalar(0.1)))
    throw StepError("integrate_sfg_ode: mismatch phase per step must stay below 0.1 rad");

  // Normalized coordinate zeta = z/L; per-point complex coupling g a_p(tau) L.
  Array1<Scalar> profile;
  CArray1<Scalar> phasor;
  detail::pump_decompose(pump, coupling, profile, phasor);
  const CArray1<Scalar> glp = profile.template cast<std::complex<Scalar>>() * phasor;
  const CArray1<Scalar> glp_conj = glp.conjugate();
  const Scalar dl = mismatch * crystal_length;

  BasicComplexEnvelope<Scalar> sig_out = sig_in;
  BasicComplexEnvelope<Scalar> idl_out = idl_in;

  const Eigen::Index n = sig_in.grid.n_samples;
  auto integrate_range = [&](Eigen::Index lo, Eigen::Index len) {
    CArray1<Scalar> as = sig_in.samples.segment(lo, len);
    CArray1<Scalar> ai = idl_in.samples.segment(lo, len);
    const CArray1<Scalar> g = glp.segment(lo, len);
    const CArray1<Scalar> gc = glp_conj.segment(lo, len);
    const Scalar h = Scalar(1) / static_cast<Scalar>(n_steps);
    const std::complex<Scalar> i1(0, 1);
    CArray1<Scalar> k1s(len), k1i(len), k2s(len), k2i(len), k3s(len), k3i(len), k4s(len), k4i(len);
    for (int step = 0; step < n_steps; ++step) {
      const Scalar z0 = h * static_cast<Scalar>(step);
      const std::complex<Scalar> e0 = std::exp(-i1 * (dl * z0));
      const std::complex<Scalar> em = std::exp(-i1 * (dl * (z0 + h / 2)));
      const std::complex<Scalar> e1 = std::exp(-i1 * (dl * (z0 + h)));
      k1s = gc * ai * e0;
      k1i = -g * as * std::conj(e0);
      k2s = gc * (ai + h / 2 * k1i) * em;
      k2i = -g * (as + h / 2 * k1s) * std::conj(em);
      k3s = gc * (ai + h / 2 * k2i) * em;
      k3i = -g * (as + h / 2 * k2s) * std::conj(em);
      k4s = gc * (ai + h * k3i) * e1;
      k4i = -g * (as + h * k3s) * std::conj(e1);
      as += h / 6 * (k1s + 2 * k2s + 2 * k3s + k4s);
      ai += h / 6 * (k1i + 2 * k2i + 2 * k3i + k4i);
    }
    sig_out.samples.segment(lo, len) = as;
    idl_out.samples.segment(lo, len) = ai;
  };

  const int workers = std::min<int>(thread_budget(), static_cast<int>((n + 255) / 256));
  if (workers <= 1) {
    integrate_range(0, n);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const Eigen::Index chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const Eigen::Index lo = chunk * w;
      const Eigen::Index len = std::min<Eigen::Index>(chunk, n - lo);
      if (len > 0) pool.emplace_back(integrate_range, lo, len);
    }
    for (auto& th : pool) th.join();
  }
  return {std::move(sig_out), std::move(idl_out)};
}

// Pump prepared by sending a Gaussian pulse of duration tau_p through a
// dispersive element with GDD -D_f. The global phase is normalized to zero at
// tau = 0 so that the declared aperture carries phase tau^2/(2 D_f) directly.
template <typename Scalar>
BasicPumpProfile<Scalar> chirped_pump(const BasicTimeGrid<Scalar>& grid, Scalar pulse_duration,
                                      Scalar focal_gdd, Scalar peak) {
  if (focal_gdd == 0) throw std::invalid_argument("chirped_pump: focal GDD must be nonzero");
  BasicComplexEnvelope<Scalar> seed = gaussian_pulse(grid, Scalar(0), pulse_duration);
  BasicPumpProfile<Scalar> pump;
  pump.envelope = apply_gdd(seed, -focal_gdd);
  pump.focal_gdd = focal_gdd;

  const Array1<Scalar> mod = pump.envelope.samples.abs();
  Eigen::Index imax = 0;
  const Scalar top = mod.maxCoeff(&imax);
  pump.envelope.samples *= peak / top;

  // phase gauge: zero at the modulus peak (tau = 0 for this symmetric pump)
  const std::complex<Scalar> at_peak = pump.envelope.samples(imax);
  pump.envelope.samples *= std::conj(at_peak) / std::abs(at_peak);

  const Scalar floor = (1 - Scalar(1e-3)) * peak;
  Eigen::Index lo = imax;
  while (lo > 0 && mod(lo - 1) * peak / top >= floor) --lo;
  Eigen::Index hi = imax;
  while (hi < mod.size() - 1 && mod(hi + 1) * peak / top >= floor) ++hi;
  const Array1<Scalar> t = grid.times();
  pump.aperture_lo = t(lo);
  pump.aperture_hi = t(hi);
  return pump;
}

// Shaped pump: exact constant modulus on [-T/2, T/2], quadratic lens phase.
template <typename Scalar>
BasicPumpProfile<Scalar> shaped_pump(const BasicTimeGrid<Scalar>& grid, Scalar aperture,
                                     Scalar focal_gdd, Scalar peak) {
  if (focal_gdd == 0) throw std::invalid_argument("shaped_pump: focal GDD must be nonzero");
  if (aperture < 0) throw std::invalid_argument("shaped_pump: negative aperture");
  const Array1<Scalar> t = grid.times();
  const std::complex<Scalar> i1(0, 1);
  BasicPumpProfile<Scalar> pump;
  pump.envelope.grid = grid;
  if (aperture == 0) {
    pump.envelope.samples = CArray1<Scalar>::Zero(grid.n_samples);
  } else {
    pump.envelope.samples =
        (t.abs() <= aperture / 2)
            .select(
                peak * (i1 * (t.square() / (2 * focal_gdd)).template cast<std::complex<Scalar>>())
                           .exp(),
                CArray1<Scalar>::Zero(grid.n_samples));
  }
  pump.focal_gdd = focal_gdd;
  pump.aperture_lo = -aperture / 2;
  pump.aperture_hi = aperture / 2;
  return pump;
}

}  // namespace chronolens
