#include "chronolens/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <utility>

#include "CLI11.hpp"
#include "chronolens/dispersion.hpp"
#include "chronolens/emit.hpp"
#include "chronolens/errors.hpp"
#include "chronolens/imaging.hpp"
#include "chronolens/scenario.hpp"
#include "chronolens/sfg.hpp"
#include "chronolens/squeezing.hpp"

namespace chronolens {

namespace {

template <typename T>
const T& need(const std::optional<T>& field, const char* section, const char* cmd) {
  if (!field)
    throw ConfigError(std::string("scenario is missing the [") + section +
                      "] section required by the " + cmd + " command");
  return *field;
}

OpaModel build_opa_model(const OpaParams& p) {
  return p.physical ? reference_opa_model_physical(p.r0, p.psi0, p.gvd, p.length)
                    : reference_opa_model(p.r0, p.psi0, p.omega_c);
}

LensMode build_lens_mode(const LensParams& lens, const TimeGrid& grid, double focal_gdd) {
  switch (lens.mode) {
    case LensModeKind::ideal:
      return IdealLens{};
    case LensModeKind::chirped:
      return PumpedLens{chirped_pump(grid, lens.pump_duration, focal_gdd, 1.0), lens.coupling};
    case LensModeKind::shaped:
      return PumpedLens{shaped_pump(grid, lens.pump_aperture, focal_gdd, 1.0), lens.coupling};
  }
  throw std::logic_error("unknown lens mode");
}

PumpProfile build_pump(const LensParams& lens, const TimeGrid& grid, double focal_gdd) {
  const LensMode mode = build_lens_mode(lens, grid, focal_gdd);
  if (const auto* pumped = std::get_if<PumpedLens>(&mode)) return pumped->pump;
  throw ConfigError("this command needs a pumped lens mode (chirped or shaped)");
}

CsvTable spectrum_table(const SqueezingSpectrum& spec, double omega_c) {
  CsvTable t;
  t.columns = {"omega_over_omega_c", "S"};
  for (Eigen::Index i = 0; i < spec.frequencies.size(); ++i)
    t.add_row({spec.frequencies(i) / omega_c, spec.values(i)});
  return t;
}

CsvTable envelope_table(const ComplexEnvelope& env) {
  CsvTable t;
  t.columns = {"t", "re", "im", "abs"};
  const Arrayd times = env.grid.times();
  for (Eigen::Index i = 0; i < env.grid.n_samples; ++i)
    t.add_row({times(i), env.samples(i).real(), env.samples(i).imag(),
               std::abs(env.samples(i))});
  return t;
}

OutputBundle run_spectrum(const Scenario& sc, std::optional<int> grid_n) {
  const OpaParams& opa = need(sc.opa, "opa", "spectrum");
  const ImagingParams& im = need(sc.imaging, "imaging", "spectrum");
  const OpaModel model = build_opa_model(opa);
  const HomodyneSetting lo{opa.lo_phase};
  const auto [input, output] =
      fig_dataset(model, lo, im.magnification, sc.efficiency, grid_n.value_or(401));

  OutputBundle bundle;
  bundle.add("spectrum_input.csv", render_csv(spectrum_table(input, model.omega_c)));
  bundle.add("spectrum_output.csv", render_csv(spectrum_table(output, model.omega_c)));
  return bundle;
}

OutputBundle run_pixels(const Scenario& sc, std::optional<int> grid_n) {
  const GridSpec& gs = need(sc.grid, "grid", "pixels");
  const ImagingParams& im = need(sc.imaging, "imaging", "pixels");
  const PixelParams& px = need(sc.pixels, "pixels", "pixels");

  const TimeGrid grid = make_time_grid(grid_n.value_or(gs.n_samples), gs.span);
  const ImagingConfig config = solve_imaging_config(im.focal_gdd, im.magnification);
  PixelTrain train;
  if (px.weights.empty()) {
    train = make_pixel_train(px.n_pixels, px.duration);
  } else {
    Arraycd amps(px.n_pixels);
    for (int k = 0; k < px.n_pixels; ++k) amps(k) = px.weights[static_cast<size_t>(k)];
    train = make_pixel_train(px.n_pixels, px.duration, amps);
  }

  try {
    const ComplexEnvelope input = synthesize_train(grid, train);
    const ComplexEnvelope intermediate = apply_gdd(input, config.input_gdd);
    const LensMode lens = build_lens_mode(sc.lens, grid, im.focal_gdd);
    const ChainResult res = simulate_chain(grid, train, config, lens);

    // Stretched per-pixel diagnostics: dispersion leaves each pixel's temporal
    // centroid at its original position, so the centroid spacing must stay at
    // the input spacing even though the durations grow far beyond it.
    std::vector<double> centroids;
    double mean_duration = 0;
    for (int k = 0; k < train.n_pixels; ++k) {
      Arraycd one = Arraycd::Zero(train.n_pixels);
      one(k) = train.amplitudes(k);
      const PixelTrain solo = make_pixel_train(train.n_pixels, train.pixel_duration, one);
      const ComplexEnvelope stretched = apply_gdd(synthesize_train(grid, solo), config.input_gdd);
      centroids.push_back(temporal_centroid(stretched));
      mean_duration += measured_duration(stretched) / train.n_pixels;
    }
    double peak_spacing = std::numeric_limits<double>::quiet_NaN();
    if (train.n_pixels > 1) {
      peak_spacing = 0;
      for (size_t k = 1; k < centroids.size(); ++k)
        peak_spacing += (centroids[k] - centroids[k - 1]) / (train.n_pixels - 1);
    }
    const double total_duration =
        centroids.back() - centroids.front() + mean_duration;

    double output_spacing = std::numeric_limits<double>::quiet_NaN();
    const auto& pixels = res.report.pixels;
    if (pixels.size() > 1) {
      output_spacing = 0;
      for (size_t k = 1; k < pixels.size(); ++k)
        output_spacing +=
            std::abs(pixels[k].centroid - pixels[k - 1].centroid) / (pixels.size() - 1);
    }

    JsonValue rows = JsonValue::array();
    for (const PixelMeasurement& m : pixels) {
      JsonValue row = JsonValue::object();
      row.set("centroid", m.centroid)
          .set("duration", m.duration)
          .set("spectral_centroid", m.spectral_centroid)
          .set("energy", m.energy)
          .set("lossy", m.lossy);
      rows.push(std::move(row));
    }
    JsonValue stretched = JsonValue::object();
    stretched.set("stretched_duration", mean_duration)
        .set("peak_spacing", peak_spacing)
        .set("total_duration", total_duration);
    JsonValue report = JsonValue::object();
    report.set("n_pixels", train.n_pixels)
        .set("input_spacing", train.spacing)
        .set("measured_magnification", res.report.measured_magnification)
        .set("output_spacing", output_spacing)
        .set("frequency_step", res.report.frequency_step)
        .set("intermediate", std::move(stretched))
        .set("pixels", std::move(rows));

    OutputBundle bundle;
    bundle.add("envelope_input.csv", render_csv(envelope_table(input)));
    bundle.add("envelope_intermediate.csv", render_csv(envelope_table(intermediate)));
    bundle.add("envelope_output.csv", render_csv(envelope_table(res.output)));
    bundle.add("pixel_report.json", report.dump());
    return bundle;
  } catch (const WindowError& e) {
    throw WindowError(std::string(e.what()) + "; increase [grid] span or n in the scenario");
  } catch (const ResolutionError& e) {
    throw ResolutionError(std::string(e.what()) + "; increase [grid] n in the scenario");
  }
}

const char* pump_name(PumpPreparation p) {
  switch (p) {
    case PumpPreparation::chirped:
      return "chirped";
    case PumpPreparation::shaped:
      return "shaped";
    case PumpPreparation::ideal:
      return "ideal";
  }
  return "?";
}

PumpPreparation pump_preparation(LensModeKind mode) {
  switch (mode) {
    case LensModeKind::ideal:
      return PumpPreparation::ideal;
    case LensModeKind::chirped:
      return PumpPreparation::chirped;
    case LensModeKind::shaped:
      return PumpPreparation::shaped;
  }
  throw std::logic_error("unknown lens mode");
}

JsonValue design_json(const DesignReport& r) {
  JsonValue fov = JsonValue::object();
  fov.set("bound_crystal", r.fov_quantum.bound_crystal)
      .set("bound_pump", r.fov_quantum.bound_pump)
      .set("minimum", r.fov_quantum.minimum)
      .set("margin", r.fov_quantum.margin)
      .set("margined", r.fov_quantum.margined());

  JsonValue cons = JsonValue::object();
  cons.set("idler_ok", r.constraints.idler_ok)
      .set("spreading_ok", r.constraints.spreading_ok)
      .set("idler_ratio", r.constraints.idler_ratio)
      .set("spreading_ratio", r.constraints.spreading_ratio)
      .set("margin", r.constraints.margin);

  JsonValue j = JsonValue::object();
  j.set("magnification", r.magnification)
      .set("n_pixels", r.n_pixels)
      .set("pixel_duration", r.pixel_duration)
      .set("focal_gdd", r.focal_gdd)
      .set("crystal_length", r.crystal_length)
      .set("margin", r.margin)
      .set("signal_bandwidth", r.signal_bandwidth)
      .set("idler_bandwidth", r.idler_bandwidth)
      .set("active_pump_bandwidth", r.active_pump_bandwidth)
      .set("idler_delay", r.idler_delay)
      .set("spreading_time", r.spreading_time)
      .set("signal_gvd", r.signal_gvd)
      .set("idler_bandwidth_limit", r.idler_bandwidth_limit)
      .set("pixel_budget", r.pixel_budget)
      .set("budget_feasible", r.budget_feasible)
      .set("high_magnification", r.high_magnification)
      .set("fov_quantum", std::move(fov))
      .set("fov_classical", r.fov_classical)
      .set("pump", pump_name(r.pump))
      .set("pump_duration", r.pump_duration)
      .set("pump_bandwidth", r.pump_bandwidth)
      .set("pump_stretched", r.pump_stretched)
      .set("pump_aperture", r.pump_aperture)
      .set("pump_uniformity_ratio", r.pump_uniformity_ratio)
      .set("constraints", std::move(cons))
      .set("feasible", r.feasible());
  return j;
}

std::pair<OutputBundle, bool> run_design(const Scenario& sc, std::optional<double> margin_flag) {
  const ImagingParams& im = need(sc.imaging, "imaging", "design");
  const PixelParams& px = need(sc.pixels, "pixels", "design");
  const CrystalDispersion& crystal = need(sc.crystal, "crystal", "design");

  DesignRequest req;
  req.crystal = crystal;
  req.focal_gdd = im.focal_gdd;
  req.magnification = im.magnification;
  req.n_pixels = px.n_pixels;
  req.pixel_duration = px.duration;
  req.pump = pump_preparation(sc.lens.mode);
  req.pump_duration = sc.lens.pump_duration;
  req.pump_aperture = sc.lens.pump_aperture;
  req.margin = margin_flag.value_or(sc.margin);

  const DesignReport report = build_design_report(req);
  OutputBundle bundle;
  bundle.add("design_report.json", design_json(report).dump());
  return {std::move(bundle), report.feasible()};
}

OutputBundle run_mismatch(const Scenario& sc, std::optional<int> grid_n) {
  const CrystalDispersion& crystal = need(sc.crystal, "crystal", "mismatch-map");
  const MismatchWindow& win = need(sc.mismatch, "mismatch", "mismatch-map");
  const ImagingParams& im = need(sc.imaging, "imaging", "mismatch-map");
  const PixelParams& px = need(sc.pixels, "pixels", "mismatch-map");

  const int n = grid_n.value_or(201);
  const double dws = kTwoPi / px.duration;
  const double dwi =
      idler_bandwidth(dws, im.magnification, px.n_pixels, px.duration, im.focal_gdd);
  const double dwpa =
      active_pump_bandwidth(dws, im.magnification, px.n_pixels, px.duration, im.focal_gdd);
  const double threshold = win.threshold > 0 ? win.threshold : std::numbers::pi / 2;

  const Arrayd ws = Arrayd::LinSpaced(n, -win.omega_s_half_span, win.omega_s_half_span);
  const Arrayd wi = Arrayd::LinSpaced(n, -win.omega_i_half_span, win.omega_i_half_span);
  const MismatchMap map = mismatch_map(crystal, ws, wi, threshold, dwpa);

  CsvTable t;
  t.columns = {"Omega_s", "Omega_i", "abs_delta", "negligible_flag"};
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      t.add_row({ws(c), wi(r), map.magnitude(r, c), map.negligible(r, c) ? 1.0 : 0.0});

  const double slope_s = crystal.k_prime_s - crystal.k_prime_p;
  const double slope_i = crystal.k_prime_p - crystal.k_prime_i;
  JsonValue band = JsonValue::object();
  band.set("half_width_i", map.band_half_width_i)
      .set("center_slope",
           slope_i != 0 ? JsonValue(-slope_s / slope_i) : JsonValue());
  JsonValue lines = JsonValue::object();
  lines.set("slope", 1.0).set("offsets", JsonValue::array()
                                             .push(-map.pump_line_offset)
                                             .push(map.pump_line_offset));
  JsonValue ov = JsonValue::object();
  ov.set("threshold", map.threshold)
      .set("threshold_policy", "half-power default; override with [mismatch] threshold")
      .set("mismatch_band", std::move(band))
      .set("signal_band_half_width", dws / 2)
      .set("idler_band_half_width", dwi / 2)
      .set("pump_constancy_lines", std::move(lines));

  OutputBundle bundle;
  bundle.add("mismatch.csv", render_csv(t));
  bundle.add("overlays.json", ov.dump());
  return bundle;
}

OutputBundle run_sfg_verify(const Scenario& sc, double delta, int n_steps) {
  const GridSpec& gs = need(sc.grid, "grid", "sfg-verify");
  const ImagingParams& im = need(sc.imaging, "imaging", "sfg-verify");
  const PixelParams& px = need(sc.pixels, "pixels", "sfg-verify");
  const CrystalDispersion& crystal = need(sc.crystal, "crystal", "sfg-verify");
  if (!std::isfinite(delta)) throw ConfigError("--delta must be finite");

  const TimeGrid grid = make_time_grid(gs.n_samples, gs.span);
  const ComplexEnvelope probe = gaussian_pulse(grid, 0.0, px.duration);
  ComplexEnvelope idler_in;
  idler_in.grid = grid;
  idler_in.samples = Arraycd::Zero(grid.n_samples);
  const PumpProfile pump = build_pump(sc.lens, grid, im.focal_gdd);

  const auto [sig_ref, idl_ref] = apply_sfg_analytic(probe, idler_in, pump, sc.lens.coupling);
  const auto [sig_ode, idl_ode] = integrate_sfg_ode(probe, idler_in, pump, sc.lens.coupling,
                                                    delta, crystal.length, n_steps);

  const double max_error =
      std::max((sig_ref.samples - sig_ode.samples).abs().maxCoeff(),
               (idl_ref.samples - idl_ode.samples).abs().maxCoeff());
  const double efficiency = energy(idl_ode) / energy(probe);
  const double s = std::sin(sc.lens.coupling);

  JsonValue j = JsonValue::object();
  j.set("coupling", sc.lens.coupling)
      .set("delta", delta)
      .set("crystal_length", crystal.length)
      .set("delta_times_length", delta * crystal.length)
      .set("n_steps", n_steps)
      .set("max_field_error", max_error)
      .set("efficiency", efficiency)
      .set("peak_conversion", s * s);

  OutputBundle bundle;
  bundle.add("sfg_verify.json", j.dump());
  return bundle;
}

}  // namespace

int cli_main(std::vector<std::string> args) {
  CLI::App app{"temporal-imaging analysis tools for broadband squeezed light"};
  app.name("chronolens");
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = ".";
  double margin_flag = 0;
  int grid_n_flag = 0;
  double delta = 0;
  int n_steps = 2000;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "scenario file")->required();
    sub->add_option("--out-dir", out_dir, "output directory (default: current)");
    sub->add_option("--margin", margin_flag, "override the scenario margin");
    sub->add_option("--grid-n", grid_n_flag, "override the point count");
  };

  CLI::App* spectrum =
      app.add_subcommand("spectrum", "squeezing spectra before and after imaging");
  CLI::App* pixels = app.add_subcommand("pixels", "simulate a pixel train through the system");
  CLI::App* design = app.add_subcommand("design", "evaluate the design budgets for a crystal");
  CLI::App* mismatch = app.add_subcommand("mismatch-map", "phase-mismatch map over detunings");
  CLI::App* sfg = app.add_subcommand("sfg-verify", "analytic vs integrated SFG comparison");
  for (CLI::App* sub : {spectrum, pixels, design, mismatch, sfg}) add_common(sub);
  sfg->add_option("--delta", delta, "constant phase mismatch [1/m]");
  sfg->add_option("--steps", n_steps, "RK4 step count");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    std::optional<double> margin_override;
    if (active->count("--margin") > 0) {
      if (!(margin_flag >= 1) || !std::isfinite(margin_flag))
        throw ConfigError("--margin must be at least 1");
      margin_override = margin_flag;
    }
    std::optional<int> grid_n_override;
    if (active->count("--grid-n") > 0) {
      if (grid_n_flag < 2) throw ConfigError("--grid-n must be at least 2");
      grid_n_override = grid_n_flag;
    }

    const Scenario sc = load_scenario(scenario_path);
    OutputBundle bundle;
    int code = 0;
    if (active == spectrum) {
      bundle = run_spectrum(sc, grid_n_override);
    } else if (active == pixels) {
      bundle = run_pixels(sc, grid_n_override);
    } else if (active == design) {
      auto [files, feasible] = run_design(sc, margin_override);
      bundle = std::move(files);
      if (!feasible) code = 3;
    } else if (active == mismatch) {
      bundle = run_mismatch(sc, grid_n_override);
    } else {
      bundle = run_sfg_verify(sc, delta, n_steps);
    }
    bundle.write_to(out_dir);
    if (code == 3) std::cerr << "design infeasible; details in design_report.json\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidityError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FeasibilityError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const WindowError& e) {
    std::cerr << "numerical-window error: " << e.what() << "\n";
    return 4;
  } catch (const ResolutionError& e) {
    std::cerr << "numerical-window error: " << e.what() << "\n";
    return 4;
  } catch (const StepError& e) {
    std::cerr << "numerical-window error: " << e.what() << "\n";
    return 4;
  } catch (const MeasurementError& e) {
    std::cerr << "numerical-window error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace chronolens
