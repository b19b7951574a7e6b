#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "chronolens/errors.hpp"
#include "chronolens/imaging.hpp"

using namespace chronolens;

namespace {
constexpr double kPi = 3.141592653589793;
using cxd = std::complex<double>;
}  // namespace

TEST_CASE("imaging condition solves for the outer dispersions") {
  const double df = 3.7e-25;
  ImagingConfig c = solve_imaging_config(df, -3.0);
  CHECK(c.input_gdd == doctest::Approx(4.0 / 3.0 * df).epsilon(1e-14));
  CHECK(c.output_gdd == doctest::Approx(4.0 * df).epsilon(1e-14));
  CHECK(1 / c.output_gdd + 1 / c.input_gdd == doctest::Approx(1 / df).epsilon(1e-12));
  CHECK(-c.output_gdd / c.input_gdd == doctest::Approx(-3.0).epsilon(1e-12));

  ImagingConfig sym = solve_imaging_config(df, -1.0);
  CHECK(sym.input_gdd == doctest::Approx(2 * df).epsilon(1e-14));
  CHECK(sym.output_gdd == doctest::Approx(2 * df).epsilon(1e-14));

  // large magnification pushes the object toward the focal plane
  ImagingConfig tele = solve_imaging_config(df, -1000.0);
  CHECK(tele.input_gdd == doctest::Approx(df).epsilon(2e-3));

  std::mt19937 rng(7070);
  std::uniform_real_distribution<double> md(-8.0, 8.0);
  for (int i = 0; i < 200; ++i) {
    const double m = md(rng);
    if (std::abs(m) < 0.05 || std::abs(m - 1) < 0.05) continue;
    ImagingConfig r = solve_imaging_config(df, m);
    CHECK(1 / r.output_gdd + 1 / r.input_gdd == doctest::Approx(1 / df).epsilon(1e-12));
    CHECK(-r.output_gdd / r.input_gdd == doctest::Approx(m).epsilon(1e-12));
  }

  CHECK_THROWS_AS(solve_imaging_config(df, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_imaging_config(df, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_imaging_config(0.0, -3.0), std::invalid_argument);
}

TEST_CASE("pixel train bookkeeping and validation") {
  PixelTrain tr = make_pixel_train(4, 2.5e-12);
  CHECK(tr.spacing == 2.5e-12);
  CHECK(tr.field_of_view == doctest::Approx(1e-11).epsilon(1e-14));
  CHECK(tr.amplitudes.size() == 4);
  CHECK(std::abs(tr.amplitudes(2) - cxd(1, 0)) == 0.0);

  Arraycd w(2);
  w << cxd(0.5, 0.1), cxd(-0.3, 0.9);
  PixelTrain enc = make_pixel_train(2, 1.0, w);
  CHECK(enc.n_pixels == 2);
  CHECK(enc.field_of_view == doctest::Approx(2.0));

  CHECK_THROWS_AS(make_pixel_train(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_pixel_train(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_pixel_train(3, 1.0, w), std::invalid_argument);
}

TEST_CASE("one-step magnifier: inversion, scaling, residual chirp") {
  TimeGrid grid = make_time_grid(2048, 64.0);
  const double df = 10.0 / kTwoPi;
  ImagingConfig c3 = solve_imaging_config(df, -3.0);

  ComplexEnvelope in = gaussian_pulse(grid, 1.5, 1.0);
  ComplexEnvelope out = ideal_image(in, c3);
  CHECK(temporal_centroid(out) == doctest::Approx(-4.5).epsilon(1e-6));
  CHECK(measured_duration(out) == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(out.samples.abs().maxCoeff() ==
        doctest::Approx(in.samples.abs().maxCoeff() / std::sqrt(3.0)).epsilon(1e-9));
  CHECK(energy(out) == doctest::Approx(energy(in)).epsilon(1e-6));

  // mirror image at unit magnification keeps the amplitude and flips time;
  // the residual chirp t^2/(2 M D_f) is kept, so the local frequency slope
  // across the flipped pixel is 1/(M D_f)
  ImagingConfig c1 = solve_imaging_config(df, -1.0);
  ComplexEnvelope flipped = ideal_image(in, c1);
  CHECK(temporal_centroid(flipped) == doctest::Approx(-1.5).epsilon(1e-6));
  CHECK(measured_duration(flipped) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(flipped.samples.abs().maxCoeff() ==
        doctest::Approx(in.samples.abs().maxCoeff()).epsilon(1e-9));
  const auto i0 = static_cast<Eigen::Index>(std::llround((-1.5 - grid.t0) / grid.dt));
  const double local_freq =
      std::arg(flipped.samples(i0 + 1) * std::conj(flipped.samples(i0 - 1))) / (2 * grid.dt);
  CHECK(local_freq == doctest::Approx(-1.5 / (-1.0 * df)).epsilon(1e-3));

  // positive magnification gives an erect image
  ComplexEnvelope erect = ideal_image(in, solve_imaging_config(df, 2.0));
  CHECK(temporal_centroid(erect) == doctest::Approx(3.0).epsilon(1e-6));

  // magnified support past the grid edge is rejected
  ComplexEnvelope wide = gaussian_pulse(grid, 0.0, 4.0);
  CHECK_THROWS_AS(ideal_image(wide, solve_imaging_config(df, -12.0)), WindowError);
  CHECK_THROWS_AS(ideal_image(in, ImagingConfig{}), std::invalid_argument);
}

TEST_CASE("magnifier conserves energy for random inputs") {
  TimeGrid grid = make_time_grid(2048, 64.0);
  std::mt19937 rng(555);
  std::uniform_real_distribution<double> cd(-2.0, 2.0), dd(0.8, 1.6), wd(-1.0, 1.0);
  for (double m : {-3.0, -1.5, 2.5}) {
    ImagingConfig c = solve_imaging_config(10.0 / kTwoPi, m);
    ComplexEnvelope in;
    in.grid = grid;
    in.samples = Arraycd::Zero(grid.n_samples);
    for (int p = 0; p < 3; ++p)
      in.samples += cxd(wd(rng), wd(rng)) * gaussian_pulse(grid, cd(rng), dd(rng)).samples;
    ComplexEnvelope out = ideal_image(in, c);
    CHECK(energy(out) == doctest::Approx(energy(in)).epsilon(1e-6));
  }
}

TEST_CASE("pixel diagnostics on synthetic fields") {
  TimeGrid grid = make_time_grid(4096, 64.0);
  ComplexEnvelope one = gaussian_pulse(grid, 0.0, 1.0);
  PixelReport rep = measure_pixels(one, {0.0});
  REQUIRE(rep.pixels.size() == 1);
  CHECK(std::abs(rep.pixels[0].centroid) < 1e-9);
  CHECK(std::abs(rep.pixels[0].spectral_centroid) < 1e-9);
  CHECK(rep.pixels[0].duration == doctest::Approx(1.0).epsilon(1e-4));
  const double sigma = 1.0 / kDurationPerFwhm / kFwhmPerSigma;
  CHECK(rep.pixels[0].energy == doctest::Approx(sigma * std::sqrt(kPi)).epsilon(1e-6));
  CHECK(std::isnan(rep.measured_magnification));
  CHECK(std::isnan(rep.frequency_step));

  // carrier offset lands in the spectral centroid
  PixelReport rep2 = measure_pixels(gaussian_pulse(grid, 2.0, 1.0, 5.0), {2.0});
  CHECK(std::abs(rep2.pixels[0].spectral_centroid - 5.0) < grid.d_omega());

  // two clean pixels with opposite carriers
  ComplexEnvelope pair;
  pair.grid = grid;
  pair.samples = gaussian_pulse(grid, -4.0, 1.0, -2.0).samples +
                 gaussian_pulse(grid, 4.0, 1.0, 3.0).samples;
  PixelReport rep3 = measure_pixels(pair, {-4.0, 4.0});
  CHECK(rep3.pixels[0].centroid == doctest::Approx(-4.0).epsilon(1e-6));
  CHECK(rep3.pixels[1].centroid == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(std::abs(rep3.pixels[0].spectral_centroid + 2.0) < grid.d_omega());
  CHECK(std::abs(rep3.pixels[1].spectral_centroid - 3.0) < grid.d_omega());
  CHECK(rep3.frequency_step == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(std::isnan(rep3.measured_magnification));

  // overlapping windows are rejected rather than measured badly
  ComplexEnvelope crowd;
  crowd.grid = grid;
  crowd.samples =
      gaussian_pulse(grid, -0.75, 1.0).samples + gaussian_pulse(grid, 0.75, 1.0).samples;
  CHECK_THROWS_AS(measure_pixels(crowd, {-0.75, 0.75}), MeasurementError);
  CHECK_THROWS_AS(measure_pixels(pair, {4.0, -4.0}), std::invalid_argument);
  CHECK_THROWS_AS(measure_pixels(pair, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(measure_pixels(one, {0.0, 20.0}), MeasurementError);
}

TEST_CASE("cascade images a four-pixel train at threefold magnification") {
  TimeGrid grid = make_time_grid(2048, 64.0);
  const double df = 10.0 / kTwoPi;
  ImagingConfig config = solve_imaging_config(df, -3.0);
  PixelTrain train = make_pixel_train(4, 1.0);
  ChainResult res = simulate_chain(grid, train, config, IdealLens{});
  REQUIRE(res.report.pixels.size() == 4);

  CHECK(res.report.measured_magnification == doctest::Approx(-3.0).epsilon(1e-3));
  const auto& px = res.report.pixels;
  for (int k = 0; k < 4; ++k) {
    CHECK(px[k].centroid == doctest::Approx(-3.0 * (k - 1.5)).epsilon(1e-4));
    CHECK(px[k].duration == doctest::Approx(3.0).epsilon(0.01));
    CHECK(!px[k].lossy);
  }
  // inverted order, spacing three pixel durations, after the output dispersion
  for (int k = 0; k + 1 < 4; ++k)
    CHECK(px[k].centroid - px[k + 1].centroid == doctest::Approx(3.0).epsilon(1e-3));
  // carrier staircase between adjacent pixels: spacing / focal gdd
  CHECK(res.report.frequency_step == doctest::Approx(kTwoPi / 10.0).epsilon(1e-6));
  // a lossless lens treats every pixel alike
  for (int k = 1; k < 4; ++k)
    CHECK(px[k].energy == doctest::Approx(px[0].energy).epsilon(1e-6));
}

TEST_CASE("cascade agrees with the one-step magnifier") {
  TimeGrid grid = make_time_grid(2048, 64.0);
  const double df = 10.0 / kTwoPi;

  ImagingConfig c3 = solve_imaging_config(df, -3.0);
  PixelTrain one = make_pixel_train(1, 1.0);
  ChainResult single = simulate_chain(grid, one, c3, IdealLens{});
  CHECK(std::isnan(single.report.measured_magnification));
  ComplexEnvelope direct = ideal_image(synthesize_train(grid, one), c3);
  CHECK(phase_aligned_l2_error(single.output, direct) < 1e-3);

  // same identity for an encoded train, and the stretched durations with it
  ImagingConfig c2 = solve_imaging_config(df, -2.0);
  std::mt19937 rng(808);
  std::uniform_real_distribution<double> mag(0.5, 1.5), ph(-kPi, kPi);
  Arraycd w(3);
  for (int k = 0; k < 3; ++k) w(k) = std::polar(mag(rng), ph(rng));
  PixelTrain train = make_pixel_train(3, 1.0, w);
  ChainResult res = simulate_chain(grid, train, c2, IdealLens{});
  CHECK(phase_aligned_l2_error(res.output, ideal_image(synthesize_train(grid, train), c2)) < 1e-3);
  for (const auto& m : res.report.pixels) CHECK(m.duration == doctest::Approx(2.0).epsilon(0.05));
  CHECK(res.report.measured_magnification == doctest::Approx(-2.0).epsilon(1e-3));
}

TEST_CASE("cascade is linear in the pixel weights") {
  TimeGrid grid = make_time_grid(1024, 64.0);
  ImagingConfig config = solve_imaging_config(10.0 / kTwoPi, -2.0);
  Arraycd w1(3), w2(3);
  w1 << cxd(1.0, 0.2), cxd(-0.6, 0.4), cxd(0.3, -0.8);
  w2 << cxd(0.2, -0.5), cxd(0.9, 0.1), cxd(-0.4, -0.7);
  const cxd a(0.7, -0.3), b(-0.5, 0.6);
  ChainResult r1 = simulate_chain(grid, make_pixel_train(3, 1.0, w1), config, IdealLens{});
  ChainResult r2 = simulate_chain(grid, make_pixel_train(3, 1.0, w2), config, IdealLens{});
  ChainResult r12 =
      simulate_chain(grid, make_pixel_train(3, 1.0, Arraycd(a * w1 + b * w2)), config, IdealLens{});
  const Arraycd combo = a * r1.output.samples + b * r2.output.samples;
  CHECK((r12.output.samples - combo).abs().maxCoeff() < 1e-10 * combo.abs().maxCoeff());
}

TEST_CASE("shaped pump covering the stretch images all pixels alike") {
  TimeGrid grid = make_time_grid(8192, 512.0);
  const double df = 45.0 / kTwoPi;
  ImagingConfig config = solve_imaging_config(df, -3.0);
  PixelTrain train = make_pixel_train(3, 1.0);
  const double stretch = config.input_gdd * kTwoPi;  // 60 pixel durations
  PumpProfile pump = shaped_pump(grid, stretch + 2.0, df, 1.0);
  ChainResult res = simulate_chain(grid, train, config, LensMode{PumpedLens{pump, kPi / 2}});
  REQUIRE(res.report.pixels.size() == 3);
  double lo = res.report.pixels[0].energy, hi = lo;
  for (const auto& m : res.report.pixels) {
    CHECK(!m.lossy);
    lo = std::min(lo, m.energy);
    hi = std::max(hi, m.energy);
  }
  CHECK(hi / lo - 1 < 0.01);
  CHECK(res.report.measured_magnification == doctest::Approx(-3.0).epsilon(0.01));
}

TEST_CASE("pump covering only the central pixel attenuates the others") {
  TimeGrid grid = make_time_grid(2048, 64.0);
  const double df = 1.5 / kTwoPi;
  ImagingConfig config = solve_imaging_config(df, -3.0);  // stretch factor 2
  PixelTrain train = make_pixel_train(3, 1.0);
  PumpProfile pump = shaped_pump(grid, 2.0, df, 1.0);
  ChainResult res = simulate_chain(grid, train, config, LensMode{PumpedLens{pump, kPi / 2}});
  REQUIRE(res.report.pixels.size() == 3);
  CHECK(!res.report.pixels[1].lossy);
  CHECK(res.report.pixels[0].lossy);
  CHECK(res.report.pixels[2].lossy);
  CHECK(res.report.pixels[0].energy < 0.8 * res.report.pixels[1].energy);
  CHECK(res.report.pixels[2].energy < 0.8 * res.report.pixels[1].energy);
}

TEST_CASE("grid must cover the stretched intermediate") {
  TimeGrid grid = make_time_grid(512, 16.0);
  ImagingConfig config = solve_imaging_config(10.0 / kTwoPi, -3.0);
  PixelTrain train = make_pixel_train(4, 1.0);
  CHECK_THROWS_AS(simulate_chain(grid, train, config, IdealLens{}), WindowError);
}
