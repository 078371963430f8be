#pragma once

// Run configuration as INI text:
//
//   [run]        mode = fine | multiscale | study
//   [domain]     extent_x, extent_y, coarse_n, fine_per_coarse
//   [media]      kind = builtin | layered | raster, model = model1 | model2,
//                raster = <path>, layers = y0:y1:c11:c13:c33:c55;..., rho
//   [dg]         gamma, penalty_scale = fine | coarse, mass = consistent | lumped
//   [multiscale] nbf, nol (integer or auto)
//   [time]       tau, final_time, snapshot_stride, cfl_safety
//   [source]     f0, center_x, center_y, spatial_decay, amplitude, components = xy | x | y | none
//   [output]     directory
//   [study]      fine_cells, levels = coarse_n:nol:nbf,...
//
// Unknown sections or keys are rejected.

#include "cemwave/analysis.hpp"
#include "cemwave/common.hpp"
#include "cemwave/media.hpp"
#include "cemwave/propagator.hpp"
#include "cemwave/simulation.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace cemwave {

enum class RunMode { fine, multiscale, study };
enum class MediaKind { builtin, layered, raster };

struct SimulationConfig {
  RunMode mode = RunMode::multiscale;

  double extent_x = 1.0;
  double extent_y = 1.0;
  int coarse_n = 8;
  int fine_per_coarse = 8;

  MediaKind media_kind = MediaKind::builtin;
  std::string model = "model1";  // builtin tag; model2 applies the stiffness scaling
  std::string raster;
  std::vector<Layer> layers;
  double rho = 1.0;

  double gamma = 2.0;
  PenaltyScale penalty_scale = PenaltyScale::fine;
  MassKind mass = MassKind::consistent;

  int nbf = 6;
  std::optional<int> nol;  // empty means ceil(2 ln coarse_n)

  double tau = 1e-4;
  double final_time = 0.4;
  int snapshot_stride = 0;
  double cfl_safety = 0.9;

  SourceSpec source;

  std::string output_directory = "output";

  int study_fine_cells = 0;
  std::vector<StudyLevel> study_levels;

  bool operator==(const SimulationConfig&) const = default;

  int oversampling() const { return nol ? *nol : default_oversampling(coarse_n); }
  DgOptions dg() const { return {gamma, penalty_scale}; }
  TimeConfig time() const { return {tau, final_time, snapshot_stride, cfl_safety}; }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw InputError(field + ": expected a number, got '" + text + "'");
  return v;
}

inline int parse_int(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InputError(field + ": expected an integer, got '" + text + "'");
  return v;
}

inline bool parse_bool_choice(const std::string& field, const std::string& text, const std::string& yes,
                              const std::string& no) {
  const std::string t = trim(text);
  if (t == yes) return true;
  if (t == no) return false;
  throw InputError(field + ": expected '" + yes + "' or '" + no + "', got '" + text + "'");
}

inline std::string mode_name(RunMode m) {
  switch (m) {
    case RunMode::fine: return "fine";
    case RunMode::multiscale: return "multiscale";
    case RunMode::study: return "study";
  }
  return "";
}

inline std::string media_kind_name(MediaKind k) {
  switch (k) {
    case MediaKind::builtin: return "builtin";
    case MediaKind::layered: return "layered";
    case MediaKind::raster: return "raster";
  }
  return "";
}

inline std::string components_name(const SourceSpec& s) {
  if (s.x_component && s.y_component) return "xy";
  if (s.x_component) return "x";
  if (s.y_component) return "y";
  return "none";
}

inline std::string layers_text(const std::vector<Layer>& layers) {
  std::string out;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (k) out += ';';
    out += fmt(l.y_begin) + ':' + fmt(l.y_end) + ':' + fmt(l.stiffness.c11) + ':' + fmt(l.stiffness.c13) + ':' +
           fmt(l.stiffness.c33) + ':' + fmt(l.stiffness.c55);
  }
  return out;
}

inline std::string levels_text(const std::vector<StudyLevel>& levels) {
  std::string out;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(levels[k].coarse_n) + ':' + std::to_string(levels[k].oversampling) + ':' +
           std::to_string(levels[k].nbf);
  }
  return out;
}

using Setter = std::function<void(SimulationConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    m["run.mode"] = [](SimulationConfig& c, const std::string& v) {
      const std::string t = trim(v);
      if (t == "fine") c.mode = RunMode::fine;
      else if (t == "multiscale") c.mode = RunMode::multiscale;
      else if (t == "study") c.mode = RunMode::study;
      else throw InputError("run.mode: expected fine, multiscale or study, got '" + v + "'");
    };
    m["domain.extent_x"] = [](SimulationConfig& c, const std::string& v) { c.extent_x = parse_double("domain.extent_x", v); };
    m["domain.extent_y"] = [](SimulationConfig& c, const std::string& v) { c.extent_y = parse_double("domain.extent_y", v); };
    m["domain.coarse_n"] = [](SimulationConfig& c, const std::string& v) { c.coarse_n = parse_int("domain.coarse_n", v); };
    m["domain.fine_per_coarse"] = [](SimulationConfig& c, const std::string& v) {
      c.fine_per_coarse = parse_int("domain.fine_per_coarse", v);
    };
    m["media.kind"] = [](SimulationConfig& c, const std::string& v) {
      const std::string t = trim(v);
      if (t == "builtin") c.media_kind = MediaKind::builtin;
      else if (t == "layered") c.media_kind = MediaKind::layered;
      else if (t == "raster") c.media_kind = MediaKind::raster;
      else throw InputError("media.kind: expected builtin, layered or raster, got '" + v + "'");
    };
    m["media.model"] = [](SimulationConfig& c, const std::string& v) {
      const std::string t = trim(v);
      if (t != "model1" && t != "model2") throw InputError("media.model: expected model1 or model2, got '" + v + "'");
      c.model = t;
    };
    m["media.raster"] = [](SimulationConfig& c, const std::string& v) { c.raster = trim(v); };
    m["media.layers"] = [](SimulationConfig& c, const std::string& v) {
      c.layers.clear();
      if (trim(v).empty()) return;
      for (const auto& item : split(v, ';')) {
        const auto f = split(item, ':');
        if (f.size() != 6) throw InputError("media.layers: each layer needs y0:y1:c11:c13:c33:c55, got '" + item + "'");
        c.layers.push_back({parse_double("media.layers", f[0]),
                            parse_double("media.layers", f[1]),
                            {parse_double("media.layers", f[2]), parse_double("media.layers", f[3]),
                             parse_double("media.layers", f[4]), parse_double("media.layers", f[5])}});
      }
    };
    m["media.rho"] = [](SimulationConfig& c, const std::string& v) { c.rho = parse_double("media.rho", v); };
    m["dg.gamma"] = [](SimulationConfig& c, const std::string& v) { c.gamma = parse_double("dg.gamma", v); };
    m["dg.penalty_scale"] = [](SimulationConfig& c, const std::string& v) {
      c.penalty_scale = parse_bool_choice("dg.penalty_scale", v, "fine", "coarse") ? PenaltyScale::fine
                                                                                   : PenaltyScale::coarse;
    };
    m["dg.mass"] = [](SimulationConfig& c, const std::string& v) {
      c.mass = parse_bool_choice("dg.mass", v, "consistent", "lumped") ? MassKind::consistent : MassKind::lumped;
    };
    m["multiscale.nbf"] = [](SimulationConfig& c, const std::string& v) { c.nbf = parse_int("multiscale.nbf", v); };
    m["multiscale.nol"] = [](SimulationConfig& c, const std::string& v) {
      if (trim(v) == "auto") c.nol.reset();
      else c.nol = parse_int("multiscale.nol", v);
    };
    m["time.tau"] = [](SimulationConfig& c, const std::string& v) { c.tau = parse_double("time.tau", v); };
    m["time.final_time"] = [](SimulationConfig& c, const std::string& v) { c.final_time = parse_double("time.final_time", v); };
    m["time.snapshot_stride"] = [](SimulationConfig& c, const std::string& v) {
      c.snapshot_stride = parse_int("time.snapshot_stride", v);
    };
    m["time.cfl_safety"] = [](SimulationConfig& c, const std::string& v) { c.cfl_safety = parse_double("time.cfl_safety", v); };
    m["source.f0"] = [](SimulationConfig& c, const std::string& v) { c.source.f0 = parse_double("source.f0", v); };
    m["source.center_x"] = [](SimulationConfig& c, const std::string& v) {
      c.source.center_x = parse_double("source.center_x", v);
    };
    m["source.center_y"] = [](SimulationConfig& c, const std::string& v) {
      c.source.center_y = parse_double("source.center_y", v);
    };
    m["source.spatial_decay"] = [](SimulationConfig& c, const std::string& v) {
      c.source.spatial_decay = parse_double("source.spatial_decay", v);
    };
    m["source.amplitude"] = [](SimulationConfig& c, const std::string& v) {
      c.source.amplitude = parse_double("source.amplitude", v);
    };
    m["source.components"] = [](SimulationConfig& c, const std::string& v) {
      const std::string t = trim(v);
      if (t != "xy" && t != "x" && t != "y" && t != "none")
        throw InputError("source.components: expected xy, x, y or none, got '" + v + "'");
      c.source.x_component = t == "xy" || t == "x";
      c.source.y_component = t == "xy" || t == "y";
    };
    m["output.directory"] = [](SimulationConfig& c, const std::string& v) { c.output_directory = trim(v); };
    m["study.fine_cells"] = [](SimulationConfig& c, const std::string& v) {
      c.study_fine_cells = parse_int("study.fine_cells", v);
    };
    m["study.levels"] = [](SimulationConfig& c, const std::string& v) {
      c.study_levels.clear();
      if (trim(v).empty()) return;
      for (const auto& item : split(v, ',')) {
        const auto f = split(item, ':');
        if (f.size() != 3) throw InputError("study.levels: each level needs coarse_n:nol:nbf, got '" + item + "'");
        c.study_levels.push_back(
            {parse_int("study.levels", f[0]), parse_int("study.levels", f[1]), parse_int("study.levels", f[2])});
      }
    };
    return m;
  }();
  return table;
}

}  // namespace detail

/// Set one dotted key, e.g. apply_setting(cfg, "time.tau", "5e-5").
inline void apply_setting(SimulationConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = detail::setters();
  const auto it = table.find(detail::trim(key));
  if (it == table.end()) throw InputError("unknown config key '" + key + "'");
  it->second(cfg, value);
}

/// Apply "section.key=value".
inline void apply_override(SimulationConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InputError("override must look like section.key=value, got '" + assignment + "'");
  apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

/// Every field as (dotted key, text) in a fixed order.
inline std::vector<std::pair<std::string, std::string>> config_entries(const SimulationConfig& c) {
  using detail::fmt;
  return {
      {"run.mode", detail::mode_name(c.mode)},
      {"domain.extent_x", fmt(c.extent_x)},
      {"domain.extent_y", fmt(c.extent_y)},
      {"domain.coarse_n", std::to_string(c.coarse_n)},
      {"domain.fine_per_coarse", std::to_string(c.fine_per_coarse)},
      {"media.kind", detail::media_kind_name(c.media_kind)},
      {"media.model", c.model},
      {"media.raster", c.raster},
      {"media.layers", detail::layers_text(c.layers)},
      {"media.rho", fmt(c.rho)},
      {"dg.gamma", fmt(c.gamma)},
      {"dg.penalty_scale", c.penalty_scale == PenaltyScale::fine ? "fine" : "coarse"},
      {"dg.mass", c.mass == MassKind::consistent ? "consistent" : "lumped"},
      {"multiscale.nbf", std::to_string(c.nbf)},
      {"multiscale.nol", c.nol ? std::to_string(*c.nol) : "auto"},
      {"time.tau", fmt(c.tau)},
      {"time.final_time", fmt(c.final_time)},
      {"time.snapshot_stride", std::to_string(c.snapshot_stride)},
      {"time.cfl_safety", fmt(c.cfl_safety)},
      {"source.f0", fmt(c.source.f0)},
      {"source.center_x", fmt(c.source.center_x)},
      {"source.center_y", fmt(c.source.center_y)},
      {"source.spatial_decay", fmt(c.source.spatial_decay)},
      {"source.amplitude", fmt(c.source.amplitude)},
      {"source.components", detail::components_name(c.source)},
      {"output.directory", c.output_directory},
      {"study.fine_cells", std::to_string(c.study_fine_cells)},
      {"study.levels", detail::levels_text(c.study_levels)},
  };
}

inline std::string serialize_config(const SimulationConfig& c) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : config_entries(c)) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

/// Mode-specific checks; messages name the offending field.
inline void validate(const SimulationConfig& c) {
  auto positive = [](bool ok, const std::string& field) {
    if (!ok) throw InputError(field + " must be positive");
  };
  positive(c.extent_x > 0.0, "domain.extent_x");
  positive(c.extent_y > 0.0, "domain.extent_y");
  if (c.extent_x != c.extent_y) throw InputError("domain.extent_y must equal domain.extent_x (square domains only)");
  positive(c.coarse_n > 0, "domain.coarse_n");
  positive(c.fine_per_coarse > 0, "domain.fine_per_coarse");
  positive(c.rho > 0.0, "media.rho");
  positive(c.gamma > 0.0, "dg.gamma");
  positive(c.nbf > 0, "multiscale.nbf");
  if (c.nol && *c.nol < 0) throw InputError("multiscale.nol must be >= 0 or auto");
  positive(c.tau > 0.0, "time.tau");
  positive(c.final_time > 0.0, "time.final_time");
  if (c.snapshot_stride < 0) throw InputError("time.snapshot_stride must be >= 0");
  positive(c.cfl_safety > 0.0, "time.cfl_safety");
  positive(c.source.f0 > 0.0, "source.f0");
  positive(c.source.spatial_decay > 0.0, "source.spatial_decay");
  if (c.output_directory.empty()) throw InputError("output.directory must not be empty");
  if (c.media_kind == MediaKind::raster && c.raster.empty()) throw InputError("media.raster is required for kind raster");
  if (c.media_kind == MediaKind::layered && c.layers.empty()) throw InputError("media.layers is required for kind layered");
  for (const auto& l : c.layers)
    if (!l.stiffness.positive_definite()) throw InputError("media.layers: stiffness is not positive definite");
  if (c.mode == RunMode::study) {
    if (c.study_levels.empty()) throw InputError("study.levels is required for mode study");
    if (c.study_fine_cells < 0) throw InputError("study.fine_cells must be >= 0");
    for (const auto& l : c.study_levels) {
      if (l.coarse_n <= 0 || l.nbf <= 0 || l.oversampling < 0)
        throw InputError("study.levels: coarse_n and nbf must be positive, nol >= 0");
      if (c.study_fine_cells > 0 && c.study_fine_cells % l.coarse_n != 0)
        throw InputError("study.fine_cells must be divisible by every study coarse_n");
    }
  }
}

/// Parse INI text starting from the defaults.
inline SimulationConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(std::string("config syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  SimulationConfig cfg;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw InputError("config key '" + section + "' must live in a section");
    for (const auto& [key, value] : body) apply_setting(cfg, section + "." + key, value.data());
  }
  return cfg;
}

inline SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

/// Media for a mesh as described by the configuration.
inline MediaField make_media(const SimulationConfig& c, const MeshHierarchy& mesh) {
  MediaField m = [&] {
    switch (c.media_kind) {
      case MediaKind::raster: return ingest_raster(c.raster, mesh, c.rho);
      case MediaKind::layered: return layered_model(c.layers, mesh, c.rho);
      case MediaKind::builtin: break;
    }
    return layered_model(builtin_model1_layers(), mesh, c.rho);
  }();
  return c.model == "model2" ? scale_transform(m) : m;
}

}  // namespace cemwave
