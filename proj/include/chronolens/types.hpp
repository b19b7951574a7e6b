#pragma once

#include <Eigen/Core>
#include <complex>

namespace chronolens {

template <typename Scalar>
using Array1 = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using CArray1 = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>;

using Arrayd = Array1<double>;
using Arraycd = CArray1<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Duration convention: duration = FWHM of the amplitude * 2pi/(8 ln 2).
// The same convention makes a pulse of duration tau0 have spectral
// amplitude FWHM exactly 2pi/tau0.
inline constexpr double kDurationPerFwhm = 1.1330900354567984524069207364291;

// FWHM of a Gaussian amplitude exp(-t^2/(2 sigma^2)) is 2 sigma sqrt(2 ln 2).
inline constexpr double kFwhmPerSigma = 2.3548200450309493820231386529194;

}  // namespace chronolens
