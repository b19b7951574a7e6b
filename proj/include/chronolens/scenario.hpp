#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chronolens/dispersion.hpp"
#include "chronolens/types.hpp"

namespace chronolens {

// Key-value configuration text: `key = value` lines grouped under [section]
// headers, '#' starts a comment, blank lines are skipped. Keys written before
// the first header belong to the top-level section "". Every diagnostic
// carries name:line so scenario mistakes point at the offending line.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text, const std::string& name);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  // Typed getters; the required forms throw ConfigError when the key is
  // missing or unparsable. Every successful read marks the key as consumed.
  std::string text(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key) const;
  long integer(const std::string& section, const std::string& key) const;
  std::vector<double> number_list(const std::string& section, const std::string& key) const;

  std::optional<std::string> maybe_text(const std::string& section, const std::string& key) const;
  std::optional<double> maybe_number(const std::string& section, const std::string& key) const;
  std::optional<long> maybe_integer(const std::string& section, const std::string& key) const;

  // name:line of a stored key, for semantic error messages.
  std::string where(const std::string& section, const std::string& key) const;

  // Rejects keys that no getter ever touched; catches typos and keys that do
  // not apply to the selected mode.
  void require_consumed() const;

  const std::string& name() const { return name_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };

  const Entry* find(const std::string& section, const std::string& key) const;
  const Entry& fetch(const std::string& section, const std::string& key) const;

  std::string name_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

enum class LensModeKind { ideal, chirped, shaped };

struct GridSpec {
  Eigen::Index n_samples = 0;
  double span = 0;
};

// Squeezed-light source parameters; omega_c is either given directly or left
// zero with (gvd, length) set, matching the two reference-model constructors.
struct OpaParams {
  double r0 = 0;
  double psi0 = 0;
  double lo_phase = 0;
  double omega_c = 0;
  double gvd = 0;
  double length = 0;
  bool physical = false;  // true when built from (gvd, length)
};

struct ImagingParams {
  double focal_gdd = 0;
  double magnification = 0;
};

struct LensParams {
  LensModeKind mode = LensModeKind::ideal;
  double coupling = 0;        // g A_p0 L; defaults to pi/2 at parse time
  double pump_duration = 0;   // chirped mode
  double pump_aperture = 0;   // shaped mode
};

struct PixelParams {
  int n_pixels = 0;
  double duration = 0;
  std::vector<double> weights;  // empty = uniform
};

// Plot window for the mismatch map; point counts come from the CLI.
struct MismatchWindow {
  double omega_s_half_span = 0;
  double omega_i_half_span = 0;
  double threshold = 0;  // 0 = use the half-power default
};

struct Scenario {
  std::optional<GridSpec> grid;
  std::optional<OpaParams> opa;
  std::optional<ImagingParams> imaging;
  std::optional<PixelParams> pixels;
  std::optional<CrystalDispersion> crystal;
  std::optional<MismatchWindow> mismatch;
  LensParams lens;
  double efficiency = 1.0;
  double margin = 10.0;
};

// Reads and validates a scenario file. A `units = SI` top-level key is
// mandatory; a [crystal] file reference is resolved relative to the scenario
// file's directory and loaded immediately.
Scenario load_scenario(const std::string& path);

// Same contract for a standalone crystal dispersion file: either the direct
// derivative keys or a [sellmeier] block, plus `length` and `units = SI`.
CrystalDispersion load_crystal_dispersion(const std::string& path);

}  // namespace chronolens
