#pragma once

// JSON configuration parsing for the pipeline and the simulator.
//
// Parsing is strict: unknown keys and wrong types are configuration errors,
// so typos fail loudly instead of silently running on defaults. Every
// section is optional and falls back to the documented defaults.

#include <optional>
#include <string>

#include <json.hpp>

#include "rfiscrub/core.hpp"
#include "rfiscrub/estimator.hpp"
#include "rfiscrub/image_io.hpp"
#include "rfiscrub/simulator.hpp"
#include "rfiscrub/suppressor.hpp"

namespace rfiscrub {

struct BaselinesConfig {
  std::size_t pca_rank = 1;
  double rpca_lambda = 0.0; // 0: dimension-based default
  double rpca_tol = 1e-7;
  std::size_t rpca_max_iters = 500;
  bool rpca_scene_sparse = true;
};

struct PipelineConfig {
  EstimatorConfig estimator; // includes the solver settings
  NotchConfig notch;
  BlockSpec blocks;
  BaselinesConfig baselines;
};

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json &obj, const std::string &section,
                       std::initializer_list<const char *> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char *k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown key '" + it.key() + "' in " + section);
    }
  }
}

inline const json &need_object(const json &j, const std::string &name) {
  if (!j.is_object()) {
    throw ConfigError(name + " must be a JSON object");
  }
  return j;
}

inline double need_number(const json &j, const std::string &name) {
  if (!j.is_number()) {
    throw ConfigError(name + " must be a number");
  }
  return j.get<double>();
}

inline std::size_t need_count(const json &j, const std::string &name) {
  // documents built in code may carry signed integer values; accept any
  // integer that is not negative
  if (!j.is_number_unsigned() &&
      !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw ConfigError(name + " must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

inline bool need_bool(const json &j, const std::string &name) {
  if (!j.is_boolean()) {
    throw ConfigError(name + " must be a boolean");
  }
  return j.get<bool>();
}

inline std::string need_string(const json &j, const std::string &name) {
  if (!j.is_string()) {
    throw ConfigError(name + " must be a string");
  }
  return j.get<std::string>();
}

inline void check_version(const json &j, const std::string &what) {
  if (!j.contains("version")) {
    return;
  }
  const json &v = j["version"];
  const bool integral =
      v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
  if (!integral || v.get<std::size_t>() != 1) {
    throw ConfigError(what + " version must be 1");
  }
}

inline ParameterGrid parse_grid(const json &j, Axis axis,
                                const std::string &section) {
  need_object(j, section);
  check_keys(j, section,
             {"freq_min", "freq_max", "freq_count", "rate_min", "rate_max",
              "rate_count"});
  for (const char *k :
       {"freq_min", "freq_max", "freq_count", "rate_min", "rate_max",
        "rate_count"}) {
    if (!j.contains(k)) {
      throw ConfigError(section + " is missing key '" + std::string(k) + "'");
    }
  }
  ParameterGrid g;
  g.axis = axis;
  g.freq_min = need_number(j["freq_min"], section + ".freq_min");
  g.freq_max = need_number(j["freq_max"], section + ".freq_max");
  g.freq_count = need_count(j["freq_count"], section + ".freq_count");
  g.rate_min = need_number(j["rate_min"], section + ".rate_min");
  g.rate_max = need_number(j["rate_max"], section + ".rate_max");
  g.rate_count = need_count(j["rate_count"], section + ".rate_count");
  try {
    g.validate();
  } catch (const ParameterError &e) {
    throw ConfigError(section + ": " + e.what());
  }
  return g;
}

} // namespace detail

inline PipelineConfig parse_pipeline_config(const nlohmann::json &j) {
  using detail::json;
  detail::need_object(j, "config");
  detail::check_keys(j, "config",
                     {"version", "solver", "estimator", "notch", "blocks",
                      "baselines"});
  detail::check_version(j, "config");

  PipelineConfig cfg;

  if (j.contains("solver")) {
    const json &s = detail::need_object(j["solver"], "solver");
    detail::check_keys(s, "solver",
                       {"lambda_rel", "max_iters", "tol", "acceleration"});
    if (s.contains("lambda_rel")) {
      cfg.estimator.solver.lambda_rel =
          detail::need_number(s["lambda_rel"], "solver.lambda_rel");
    }
    if (s.contains("max_iters")) {
      cfg.estimator.solver.max_iters =
          detail::need_count(s["max_iters"], "solver.max_iters");
    }
    if (s.contains("tol")) {
      cfg.estimator.solver.tol = detail::need_number(s["tol"], "solver.tol");
    }
    if (s.contains("acceleration")) {
      cfg.estimator.solver.acceleration =
          detail::need_bool(s["acceleration"], "solver.acceleration");
    }
  }

  if (j.contains("estimator")) {
    const json &e = detail::need_object(j["estimator"], "estimator");
    detail::check_keys(e, "estimator",
                       {"mode", "l_max", "rel_weight_floor", "detect_ratio",
                        "roi", "azimuth_grid", "range_grid"});
    if (e.contains("mode")) {
      const std::string m = detail::need_string(e["mode"], "estimator.mode");
      if (m == "mean") {
        cfg.estimator.mode = EstimatorMode::mean;
      } else if (m == "mmv") {
        cfg.estimator.mode = EstimatorMode::mmv;
      } else {
        throw ConfigError("estimator.mode must be 'mean' or 'mmv', got '" +
                          m + "'");
      }
    }
    if (e.contains("l_max")) {
      cfg.estimator.l_max = detail::need_count(e["l_max"], "estimator.l_max");
    }
    if (e.contains("rel_weight_floor")) {
      cfg.estimator.rel_weight_floor = detail::need_number(
          e["rel_weight_floor"], "estimator.rel_weight_floor");
    }
    if (e.contains("detect_ratio")) {
      cfg.estimator.detect_ratio =
          detail::need_number(e["detect_ratio"], "estimator.detect_ratio");
    }
    if (e.contains("roi")) {
      const json &r = e["roi"];
      if (!r.is_array() || r.size() != 4) {
        throw ConfigError(
            "estimator.roi must be [row0, col0, rows, cols]");
      }
      Roi roi;
      roi.row0 = detail::need_count(r[0], "estimator.roi[0]");
      roi.col0 = detail::need_count(r[1], "estimator.roi[1]");
      roi.rows = detail::need_count(r[2], "estimator.roi[2]");
      roi.cols = detail::need_count(r[3], "estimator.roi[3]");
      cfg.estimator.roi = roi;
    }
    if (e.contains("azimuth_grid")) {
      cfg.estimator.azimuth_grid = detail::parse_grid(
          e["azimuth_grid"], Axis::azimuth, "estimator.azimuth_grid");
    }
    if (e.contains("range_grid")) {
      cfg.estimator.range_grid = detail::parse_grid(
          e["range_grid"], Axis::range, "estimator.range_grid");
    }
  }

  if (j.contains("notch")) {
    const json &n = detail::need_object(j["notch"], "notch");
    detail::check_keys(
        n, "notch", {"rule", "kappa", "quantile_q", "dilation", "oversample"});
    if (n.contains("rule")) {
      const std::string r = detail::need_string(n["rule"], "notch.rule");
      if (r == "robust_median") {
        cfg.notch.rule = NotchRule::robust_median;
      } else if (r == "quantile") {
        cfg.notch.rule = NotchRule::quantile;
      } else {
        throw ConfigError(
            "notch.rule must be 'robust_median' or 'quantile', got '" + r +
            "'");
      }
    }
    if (n.contains("kappa")) {
      cfg.notch.kappa = detail::need_number(n["kappa"], "notch.kappa");
    }
    if (n.contains("quantile_q")) {
      cfg.notch.quantile_q =
          detail::need_number(n["quantile_q"], "notch.quantile_q");
    }
    if (n.contains("dilation")) {
      cfg.notch.dilation = detail::need_count(n["dilation"], "notch.dilation");
    }
    if (n.contains("oversample")) {
      cfg.notch.oversample =
          detail::need_count(n["oversample"], "notch.oversample");
    }
  }

  if (j.contains("blocks")) {
    const json &b = detail::need_object(j["blocks"], "blocks");
    detail::check_keys(b, "blocks", {"rows", "cols", "overlap", "taper"});
    if (b.contains("rows")) {
      cfg.blocks.rows = detail::need_count(b["rows"], "blocks.rows");
    }
    if (b.contains("cols")) {
      cfg.blocks.cols = detail::need_count(b["cols"], "blocks.cols");
    }
    if (b.contains("overlap")) {
      cfg.blocks.overlap = detail::need_count(b["overlap"], "blocks.overlap");
    }
    if (b.contains("taper")) {
      const std::string t = detail::need_string(b["taper"], "blocks.taper");
      if (t == "none") {
        cfg.blocks.taper = TaperKind::none;
      } else if (t == "raised_cosine") {
        cfg.blocks.taper = TaperKind::raised_cosine;
      } else {
        throw ConfigError(
            "blocks.taper must be 'none' or 'raised_cosine', got '" + t +
            "'");
      }
    }
  }

  if (j.contains("baselines")) {
    const json &b = detail::need_object(j["baselines"], "baselines");
    detail::check_keys(b, "baselines",
                       {"pca_rank", "rpca_lambda", "rpca_tol",
                        "rpca_max_iters", "rpca_scene"});
    if (b.contains("pca_rank")) {
      cfg.baselines.pca_rank =
          detail::need_count(b["pca_rank"], "baselines.pca_rank");
    }
    if (b.contains("rpca_lambda")) {
      cfg.baselines.rpca_lambda =
          detail::need_number(b["rpca_lambda"], "baselines.rpca_lambda");
    }
    if (b.contains("rpca_tol")) {
      cfg.baselines.rpca_tol =
          detail::need_number(b["rpca_tol"], "baselines.rpca_tol");
    }
    if (b.contains("rpca_max_iters")) {
      cfg.baselines.rpca_max_iters =
          detail::need_count(b["rpca_max_iters"], "baselines.rpca_max_iters");
    }
    if (b.contains("rpca_scene")) {
      const std::string s =
          detail::need_string(b["rpca_scene"], "baselines.rpca_scene");
      if (s == "sparse") {
        cfg.baselines.rpca_scene_sparse = true;
      } else if (s == "low_rank") {
        cfg.baselines.rpca_scene_sparse = false;
      } else {
        throw ConfigError(
            "baselines.rpca_scene must be 'sparse' or 'low_rank', got '" + s +
            "'");
      }
    }
  }

  try {
    cfg.estimator.validate();
    cfg.notch.validate();
    cfg.blocks.validate();
  } catch (const ConfigError &) {
    throw;
  } catch (const Error &e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline SimulationSpec parse_simulation_spec(const nlohmann::json &j) {
  using detail::json;
  detail::need_object(j, "simulation spec");
  detail::check_keys(j, "simulation spec",
                     {"version", "rows", "cols", "seed", "sir_db", "snr_db",
                      "scene", "mixture"});
  detail::check_version(j, "simulation spec");

  SimulationSpec spec;
  if (j.contains("rows")) {
    spec.rows = detail::need_count(j["rows"], "rows");
  }
  if (j.contains("cols")) {
    spec.cols = detail::need_count(j["cols"], "cols");
  }
  if (j.contains("seed")) {
    spec.seed = detail::need_count(j["seed"], "seed");
  }
  if (j.contains("sir_db")) {
    spec.sir_db = detail::need_number(j["sir_db"], "sir_db");
  }
  if (j.contains("snr_db") && !j["snr_db"].is_null()) {
    spec.snr_db = detail::need_number(j["snr_db"], "snr_db");
  }

  if (j.contains("scene")) {
    const json &s = detail::need_object(j["scene"], "scene");
    detail::check_keys(s, "scene",
                       {"type", "count", "amplitude_min", "amplitude_max",
                        "mean_power", "path"});
    const std::string type =
        s.contains("type") ? detail::need_string(s["type"], "scene.type")
                           : std::string("speckle");
    if (type == "speckle") {
      spec.scene.kind = SceneKind::speckle;
      if (s.contains("mean_power")) {
        spec.scene.mean_power =
            detail::need_number(s["mean_power"], "scene.mean_power");
      }
    } else if (type == "point_targets") {
      spec.scene.kind = SceneKind::point_targets;
      if (s.contains("count")) {
        spec.scene.target_count =
            detail::need_count(s["count"], "scene.count");
      }
      if (s.contains("amplitude_min")) {
        spec.scene.amplitude_min =
            detail::need_number(s["amplitude_min"], "scene.amplitude_min");
      }
      if (s.contains("amplitude_max")) {
        spec.scene.amplitude_max =
            detail::need_number(s["amplitude_max"], "scene.amplitude_max");
      }
    } else if (type == "from_file") {
      spec.scene.kind = SceneKind::from_file;
      if (!s.contains("path")) {
        throw ConfigError("scene.path is required for from_file scenes");
      }
      spec.scene.path = detail::need_string(s["path"], "scene.path");
    } else {
      throw ConfigError("scene.type must be 'speckle', 'point_targets', or "
                        "'from_file', got '" +
                        type + "'");
    }
  }

  if (!j.contains("mixture")) {
    throw ConfigError("simulation spec is missing the mixture section");
  }
  const json &mx = detail::need_object(j["mixture"], "mixture");
  detail::check_keys(mx, "mixture", {"azimuth_fm_rate", "components"});
  if (!mx.contains("azimuth_fm_rate") || !mx.contains("components")) {
    throw ConfigError("mixture needs azimuth_fm_rate and components");
  }
  spec.mixture.azimuth_fm_rate =
      detail::need_number(mx["azimuth_fm_rate"], "mixture.azimuth_fm_rate");
  if (!mx["components"].is_array() || mx["components"].empty()) {
    throw ConfigError("mixture.components must be a non-empty array");
  }
  for (std::size_t i = 0; i < mx["components"].size(); ++i) {
    const json &c = mx["components"][i];
    const std::string where = "mixture.components[" + std::to_string(i) + "]";
    detail::need_object(c, where);
    detail::check_keys(c, where,
                       {"amplitude", "range_fm_rate", "carrier_freq",
                        "azimuth_center", "range_center", "azimuth_duration",
                        "range_duration"});
    LfmComponent comp;
    if (c.contains("amplitude")) {
      const json &a = c["amplitude"];
      if (a.is_number()) {
        comp.amplitude = cplx{a.get<double>(), 0.0};
      } else if (a.is_array() && a.size() == 2 && a[0].is_number() &&
                 a[1].is_number()) {
        comp.amplitude = cplx{a[0].get<double>(), a[1].get<double>()};
      } else {
        throw ConfigError(where +
                          ".amplitude must be a number or [real, imag]");
      }
    }
    for (const char *k : {"range_fm_rate", "carrier_freq", "azimuth_center",
                          "range_center", "azimuth_duration",
                          "range_duration"}) {
      if (!c.contains(k)) {
        throw ConfigError(where + " is missing key '" + std::string(k) + "'");
      }
    }
    comp.range_fm_rate =
        detail::need_number(c["range_fm_rate"], where + ".range_fm_rate");
    comp.carrier_freq =
        detail::need_number(c["carrier_freq"], where + ".carrier_freq");
    comp.azimuth_center =
        detail::need_number(c["azimuth_center"], where + ".azimuth_center");
    comp.range_center =
        detail::need_number(c["range_center"], where + ".range_center");
    comp.azimuth_duration = detail::need_number(
        c["azimuth_duration"], where + ".azimuth_duration");
    comp.range_duration =
        detail::need_number(c["range_duration"], where + ".range_duration");
    spec.mixture.components.push_back(comp);
  }

  try {
    spec.validate();
  } catch (const Error &e) {
    throw ConfigError(e.what());
  }
  return spec;
}

namespace detail {

inline nlohmann::json load_json_file(const std::string &path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
}

} // namespace detail

inline PipelineConfig load_pipeline_config(const std::string &path) {
  return parse_pipeline_config(detail::load_json_file(path));
}

inline SimulationSpec load_simulation_spec(const std::string &path) {
  return parse_simulation_spec(detail::load_json_file(path));
}

} // namespace rfiscrub
