#pragma once

#include <stdexcept>

#include "chronolens/types.hpp"

namespace chronolens {

// Uniform time grid centered on zero. The implied frequency grid is also
// centered: Omega_k = d_omega * (k - n/2), d_omega = 2pi/(n*dt).
template <typename Scalar>
struct BasicTimeGrid {
  Eigen::Index n_samples = 0;
  Scalar dt = 0;
  Scalar t0 = 0;

  Scalar span() const { return dt * static_cast<Scalar>(n_samples); }
  Scalar d_omega() const { return static_cast<Scalar>(kTwoPi) / span(); }

  Array1<Scalar> times() const {
    return t0 + dt * Array1<Scalar>::LinSpaced(n_samples, 0, static_cast<Scalar>(n_samples - 1));
  }

  Array1<Scalar> omegas() const {
    const Scalar dw = d_omega();
    const Scalar half = static_cast<Scalar>(n_samples / 2);
    return dw * (Array1<Scalar>::LinSpaced(n_samples, 0, static_cast<Scalar>(n_samples - 1)) - half);
  }

  bool operator==(const BasicTimeGrid& other) const {
    return n_samples == other.n_samples && dt == other.dt && t0 == other.t0;
  }
};

using TimeGrid = BasicTimeGrid<double>;

template <typename Scalar>
BasicTimeGrid<Scalar> make_basic_time_grid(Eigen::Index n_samples, Scalar span) {
  if (n_samples < 2) throw std::invalid_argument("time grid needs at least 2 samples");
  if (!(span > 0)) throw std::invalid_argument("time grid span must be positive");
  BasicTimeGrid<Scalar> grid;
  grid.n_samples = n_samples;
  grid.dt = span / static_cast<Scalar>(n_samples);
  grid.t0 = -span / 2;
  return grid;
}

inline TimeGrid make_time_grid(Eigen::Index n_samples, double span) {
  return make_basic_time_grid<double>(n_samples, span);
}

}  // namespace chronolens
