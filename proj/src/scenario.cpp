#include "chronolens/scenario.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "chronolens/errors.hpp"

namespace chronolens {

namespace {

std::string trim(const std::string& s) {
  size_t lo = 0;
  size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

double parse_double(const std::string& value, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0')
    throw ConfigError(where + ": not a number: '" + value + "'");
  return v;
}

long parse_long(const std::string& value, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0')
    throw ConfigError(where + ": not an integer: '" + value + "'");
  return v;
}

std::string key_label(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& name) {
  ConfigFile cfg;
  cfg.name_ = name;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::string at = name + ":" + std::to_string(lineno);

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(at + ": empty section name");
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(at + ": missing key before '='");
    if (value.empty()) throw ConfigError(at + ": empty value for '" + key + "'");

    auto& entries = cfg.sections_[section];
    auto [it, inserted] = entries.try_emplace(key, Entry{value, lineno, false});
    if (!inserted)
      throw ConfigError(at + ": duplicate key '" + key_label(section, key) + "' (first at line " +
                        std::to_string(it->second.line) + ")");
  }
  return cfg;
}

bool ConfigFile::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
  const auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  const auto kit = sit->second.find(key);
  return kit == sit->second.end() ? nullptr : &kit->second;
}

const ConfigFile::Entry& ConfigFile::fetch(const std::string& section,
                                           const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e)
    throw ConfigError(name_ + ": missing required key '" + key_label(section, key) + "'");
  e->consumed = true;
  return *e;
}

std::string ConfigFile::text(const std::string& section, const std::string& key) const {
  return fetch(section, key).value;
}

double ConfigFile::number(const std::string& section, const std::string& key) const {
  const Entry& e = fetch(section, key);
  return parse_double(e.value, where(section, key));
}

long ConfigFile::integer(const std::string& section, const std::string& key) const {
  const Entry& e = fetch(section, key);
  return parse_long(e.value, where(section, key));
}

std::vector<double> ConfigFile::number_list(const std::string& section,
                                            const std::string& key) const {
  const Entry& e = fetch(section, key);
  std::istringstream in(e.value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, where(section, key)));
  return out;
}

std::optional<std::string> ConfigFile::maybe_text(const std::string& section,
                                                  const std::string& key) const {
  if (!has(section, key)) return std::nullopt;
  return text(section, key);
}

std::optional<double> ConfigFile::maybe_number(const std::string& section,
                                               const std::string& key) const {
  if (!has(section, key)) return std::nullopt;
  return number(section, key);
}

std::optional<long> ConfigFile::maybe_integer(const std::string& section,
                                              const std::string& key) const {
  if (!has(section, key)) return std::nullopt;
  return integer(section, key);
}

std::string ConfigFile::where(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  const std::string line = e ? std::to_string(e->line) : "?";
  return name_ + ":" + line + ": '" + key_label(section, key) + "'";
}

void ConfigFile::require_consumed() const {
  for (const auto& [section, entries] : sections_)
    for (const auto& [key, entry] : entries)
      if (!entry.consumed)
        throw ConfigError(name_ + ":" + std::to_string(entry.line) + ": unrecognized key '" +
                          key_label(section, key) + "'");
}

namespace {

void check_units(const ConfigFile& cfg) {
  if (!cfg.has("", "units"))
    throw ConfigError(cfg.name() + ": missing top-level 'units = SI' declaration");
  const std::string units = cfg.text("", "units");
  if (units != "SI")
    throw ConfigError(cfg.where("", "units") + ": only SI units are supported, got '" + units +
                      "'");
}

double positive_number(const ConfigFile& cfg, const std::string& section, const std::string& key) {
  const double v = cfg.number(section, key);
  if (!(v > 0) || !std::isfinite(v))
    throw ConfigError(cfg.where(section, key) + ": must be a positive finite number");
  return v;
}

double nonzero_number(const ConfigFile& cfg, const std::string& section, const std::string& key) {
  const double v = cfg.number(section, key);
  if (v == 0 || !std::isfinite(v))
    throw ConfigError(cfg.where(section, key) + ": must be a nonzero finite number");
  return v;
}

GridSpec read_grid(const ConfigFile& cfg) {
  GridSpec grid;
  const long n = cfg.integer("grid", "n");
  if (n < 2) throw ConfigError(cfg.where("grid", "n") + ": need at least 2 samples");
  grid.n_samples = static_cast<Eigen::Index>(n);
  grid.span = positive_number(cfg, "grid", "span");
  return grid;
}

OpaParams read_opa(const ConfigFile& cfg) {
  OpaParams p;
  p.r0 = cfg.number("opa", "r0");
  if (p.r0 < 0) throw ConfigError(cfg.where("opa", "r0") + ": must be non-negative");
  p.psi0 = cfg.maybe_number("opa", "psi0").value_or(0.0);
  p.lo_phase = cfg.maybe_number("opa", "lo_phase").value_or(0.0);

  const bool direct = cfg.has("opa", "omega_c");
  const bool physical = cfg.has("opa", "gvd") || cfg.has("opa", "length");
  if (direct == physical)
    throw ConfigError(cfg.name() +
                      ": [opa] needs either omega_c or the pair gvd + length, not both");
  if (direct) {
    p.omega_c = positive_number(cfg, "opa", "omega_c");
  } else {
    p.gvd = positive_number(cfg, "opa", "gvd");
    p.length = positive_number(cfg, "opa", "length");
    p.omega_c = 1.0 / std::sqrt(p.gvd * p.length);
    p.physical = true;
  }
  return p;
}

ImagingParams read_imaging(const ConfigFile& cfg) {
  ImagingParams p;
  p.focal_gdd = nonzero_number(cfg, "imaging", "focal_gdd");
  p.magnification = nonzero_number(cfg, "imaging", "magnification");
  return p;
}

LensParams read_lens(const ConfigFile& cfg) {
  LensParams p;
  p.coupling = std::numbers::pi / 2;
  if (!cfg.has_section("lens")) return p;

  const std::string mode = cfg.text("lens", "mode");
  if (mode == "ideal") {
    p.mode = LensModeKind::ideal;
  } else if (mode == "chirped") {
    p.mode = LensModeKind::chirped;
    p.pump_duration = positive_number(cfg, "lens", "pump_duration");
  } else if (mode == "shaped") {
    p.mode = LensModeKind::shaped;
    p.pump_aperture = positive_number(cfg, "lens", "aperture");
  } else {
    throw ConfigError(cfg.where("lens", "mode") + ": expected ideal, chirped, or shaped, got '" +
                      mode + "'");
  }
  if (cfg.has("lens", "coupling")) {
    p.coupling = positive_number(cfg, "lens", "coupling");
  }
  return p;
}

PixelParams read_pixels(const ConfigFile& cfg) {
  PixelParams p;
  const long n = cfg.integer("pixels", "n");
  if (n < 1) throw ConfigError(cfg.where("pixels", "n") + ": need at least one pixel");
  p.n_pixels = static_cast<int>(n);
  p.duration = positive_number(cfg, "pixels", "duration");
  if (cfg.has("pixels", "weights")) {
    p.weights = cfg.number_list("pixels", "weights");
    if (static_cast<long>(p.weights.size()) != n)
      throw ConfigError(cfg.where("pixels", "weights") + ": expected " + std::to_string(n) +
                        " weights, got " + std::to_string(p.weights.size()));
  }
  return p;
}

MismatchWindow read_mismatch(const ConfigFile& cfg) {
  MismatchWindow w;
  w.omega_s_half_span = positive_number(cfg, "mismatch", "omega_s_half_span");
  w.omega_i_half_span = positive_number(cfg, "mismatch", "omega_i_half_span");
  if (cfg.has("mismatch", "threshold")) w.threshold = positive_number(cfg, "mismatch", "threshold");
  return w;
}

SellmeierCoefficients read_coefficients(const ConfigFile& cfg, const std::string& key) {
  const std::vector<double> c = cfg.number_list("sellmeier", key);
  if (c.size() != 4)
    throw ConfigError(cfg.where("sellmeier", key) + ": expected 4 coefficients, got " +
                      std::to_string(c.size()));
  return SellmeierCoefficients{c[0], c[1], c[2], c[3]};
}

WavePolarization read_polarization(const ConfigFile& cfg, const std::string& key,
                                   WavePolarization fallback) {
  if (!cfg.has("sellmeier", key)) return fallback;
  const std::string v = cfg.text("sellmeier", key);
  if (v == "o" || v == "ordinary") return WavePolarization::ordinary;
  if (v == "e" || v == "extraordinary") return WavePolarization::extraordinary;
  throw ConfigError(cfg.where("sellmeier", key) + ": expected o or e, got '" + v + "'");
}

CrystalDispersion crystal_from_config(const ConfigFile& cfg, const std::string& section) {
  const double length = positive_number(cfg, section, "length");
  if (section.empty() && cfg.has_section("sellmeier")) {
    SellmeierSpec spec;
    spec.ordinary = read_coefficients(cfg, "ordinary");
    spec.extraordinary = read_coefficients(cfg, "extraordinary");
    spec.cut_angle_deg = cfg.number("sellmeier", "cut_angle_deg");
    spec.lambda_s = positive_number(cfg, "sellmeier", "lambda_s");
    spec.lambda_p = positive_number(cfg, "sellmeier", "lambda_p");
    spec.lambda_i = positive_number(cfg, "sellmeier", "lambda_i");
    spec.pol_s = read_polarization(cfg, "pol_s", WavePolarization::ordinary);
    spec.pol_p = read_polarization(cfg, "pol_p", WavePolarization::ordinary);
    spec.pol_i = read_polarization(cfg, "pol_i", WavePolarization::extraordinary);
    return dispersion_from_sellmeier(spec, length);
  }
  return make_crystal_dispersion(cfg.number(section, "k_prime_s"),
                                 cfg.number(section, "k_prime_p"),
                                 cfg.number(section, "k_prime_i"),
                                 cfg.number(section, "k_double_prime_s"), length);
}

}  // namespace

CrystalDispersion load_crystal_dispersion(const std::string& path) {
  const ConfigFile cfg = ConfigFile::parse_file(path);
  check_units(cfg);
  CrystalDispersion d;
  try {
    d = crystal_from_config(cfg, "");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  cfg.require_consumed();
  return d;
}

Scenario load_scenario(const std::string& path) {
  const ConfigFile cfg = ConfigFile::parse_file(path);
  check_units(cfg);

  Scenario s;
  if (cfg.has("", "efficiency")) {
    s.efficiency = cfg.number("", "efficiency");
    if (s.efficiency < 0 || s.efficiency > 1 || !std::isfinite(s.efficiency))
      throw ConfigError(cfg.where("", "efficiency") + ": must lie in [0, 1]");
  }
  if (cfg.has("", "margin")) {
    s.margin = cfg.number("", "margin");
    if (!(s.margin >= 1) || !std::isfinite(s.margin))
      throw ConfigError(cfg.where("", "margin") + ": must be at least 1");
  }

  if (cfg.has_section("grid")) s.grid = read_grid(cfg);
  if (cfg.has_section("opa")) s.opa = read_opa(cfg);
  if (cfg.has_section("imaging")) s.imaging = read_imaging(cfg);
  s.lens = read_lens(cfg);
  if (cfg.has_section("pixels")) s.pixels = read_pixels(cfg);
  if (cfg.has_section("mismatch")) s.mismatch = read_mismatch(cfg);

  if (cfg.has_section("crystal")) {
    if (cfg.has("crystal", "file")) {
      const std::filesystem::path ref = cfg.text("crystal", "file");
      const std::filesystem::path base = std::filesystem::path(path).parent_path();
      s.crystal = load_crystal_dispersion((ref.is_absolute() ? ref : base / ref).string());
    } else {
      try {
        s.crystal = crystal_from_config(cfg, "crystal");
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": [crystal] " + e.what());
      }
    }
  }

  cfg.require_consumed();
  return s;
}

}  // namespace chronolens
