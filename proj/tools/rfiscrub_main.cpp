// Command-line front end for the RFI scrubbing toolkit.
//
// Subcommands: simulate, estimate, suppress, metrics, sweep, render.
// All reports are versioned JSON. Errors leave a machine-readable category
// on stderr and a distinct exit code per category.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rfiscrub/rfiscrub.hpp"

namespace {

using nlohmann::json;
using namespace rfiscrub;

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;
constexpr int kExitFormat = 5;
constexpr int kExitData = 6;
constexpr int kExitInternal = 70;

void emit_error(const std::string &category, const std::string &message) {
  json e;
  e["error"]["category"] = category;
  e["error"]["message"] = message;
  std::cerr << e.dump() << "\n";
}

void write_report(const json &report, const std::string &path) {
  if (path.empty()) {
    std::cout << report.dump(2) << "\n";
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  f << report.dump(2) << "\n";
  if (!f) {
    throw IoError("write to '" + path + "' failed");
  }
}

const char *mode_name(EstimatorMode m) {
  return m == EstimatorMode::mmv ? "mmv" : "mean";
}

json estimation_to_json(const EstimationResult &est) {
  json out;
  out["status"] = est.detected ? "ok" : "no-interference";
  out["mode"] = mode_name(est.mode);
  if (est.detected) {
    out["azimuth_fm_rate"] = est.azimuth_fm_rate;
    out["azimuth_freq"] = est.azimuth_freq;
  }
  out["range_components"] = json::array();
  for (const RangeComponent &c : est.range_components) {
    json jc;
    jc["range_fm_rate"] = c.range_fm_rate;
    jc["range_freq"] = c.range_freq;
    jc["weight"] = c.weight;
    out["range_components"].push_back(jc);
  }
  return out;
}

json suppression_report_to_json(const SuppressionReport &rep) {
  json out;
  out["detected"] = rep.detected;
  out["modified"] = rep.modified;
  out["input_energy"] = rep.input_energy;
  out["output_energy"] = rep.output_energy;
  out["removed_energy"] = rep.removed_energy;
  out["estimation"] = estimation_to_json(rep.estimation);
  out["components"] = json::array();
  for (const ComponentReport &c : rep.components) {
    json jc;
    jc["azimuth_fm_rate"] = c.azimuth_fm_rate;
    jc["range_fm_rate"] = c.range_fm_rate;
    jc["masked_bins"] = c.masked_bins;
    jc["threshold"] = c.threshold;
    jc["masked_spectral_energy"] = c.masked_spectral_energy;
    jc["removed_energy"] = c.removed_energy;
    jc["applied"] = c.applied;
    jc["degenerate"] = c.degenerate;
    out["components"].push_back(jc);
  }
  return out;
}

PipelineConfig load_config_or_default(const std::string &path) {
  if (path.empty()) {
    return PipelineConfig{};
  }
  return load_pipeline_config(path);
}

unsigned thread_budget() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) {
    n = 1;
  }
  if (const char *cap = std::getenv("RFI_SCRUB_THREADS")) {
    const long v = std::strtol(cap, nullptr, 10);
    if (v >= 1 && static_cast<unsigned>(v) < n) {
      n = static_cast<unsigned>(v);
    }
  }
  return n;
}

// ---- subcommand bodies ----

struct SimulateArgs {
  std::string spec_path, out_clean, out_corrupt, out_rfi;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs &a) {
  SimulationSpec spec = load_simulation_spec(a.spec_path);
  if (a.seed) {
    spec.seed = *a.seed;
  }
  Simulation sim = simulate(spec);
  if (sim.clipped) {
    std::cerr << "warning: an interference component window extends past "
                 "the image and was truncated\n";
  }
  write_cimg(a.out_clean, sim.clean, 64);
  write_cimg(a.out_corrupt, sim.corrupted, 64);
  if (!a.out_rfi.empty()) {
    write_cimg(a.out_rfi, sim.rfi, 64);
  }
  return 0;
}

struct EstimateArgs {
  std::string in_path, config_path, report_path;
};

int run_estimate(const EstimateArgs &a) {
  const ComplexImage X = read_cimg(a.in_path);
  const PipelineConfig cfg = load_config_or_default(a.config_path);
  const EstimationResult est = estimate_interference(X, cfg.estimator);
  json report = estimation_to_json(est);
  report["version"] = 1;
  write_report(report, a.report_path);
  return 0;
}

struct SuppressArgs {
  std::string in_path, config_path, out_path, rfi_out_path, report_path;
};

int run_suppress(const SuppressArgs &a) {
  const CimgFile in = read_cimg_file(a.in_path);
  const PipelineConfig cfg = load_config_or_default(a.config_path);
  if (cfg.notch.kappa_suspicious()) {
    std::cerr << "warning: notch.kappa <= 1 masks at least half of every "
                 "spectrum; expect heavy signal loss\n";
  }
  BlockResult res =
      process_blocks(in.image, cfg.blocks, cfg.estimator, cfg.notch);
  write_cimg(a.out_path, res.s_hat, in.precision);
  if (!a.rfi_out_path.empty()) {
    write_cimg(a.rfi_out_path, res.r_hat, in.precision);
  }
  {
    json report;
    report["version"] = 1;
    report["status"] = "ok";
    report["input_energy"] = res.input_energy;
    report["output_energy"] = res.output_energy;
    report["removed_energy"] = res.removed_energy;
    report["blocks"] = json::array();
    for (const BlockReport &b : res.blocks) {
      json jb;
      jb["row0"] = b.row0;
      jb["col0"] = b.col0;
      jb["rows"] = b.rows;
      jb["cols"] = b.cols;
      jb["report"] = suppression_report_to_json(b.report);
      report["blocks"].push_back(jb);
    }
    write_report(report, a.report_path);
  }
  return 0;
}

struct MetricsArgs {
  std::string test_path, ref_path, report_path;
};

int run_metrics(const MetricsArgs &a) {
  const ComplexImage test = read_cimg(a.test_path);
  json report;
  report["version"] = 1;
  report["ag"] = average_gradient(test);
  if (!a.ref_path.empty()) {
    const ComplexImage ref = read_cimg(a.ref_path);
    report["rel_err_db"] = relative_recovery_error_db(test, ref);
    report["sir_db"] = sir_db(ref, subtract(test, ref));
  }
  write_report(report, a.report_path);
  return 0;
}

struct RenderArgs {
  std::string in_path, out_path;
  double dyn_range = 40.0;
};

int run_render(const RenderArgs &a) {
  const ComplexImage X = read_cimg(a.in_path);
  render_png(X, a.out_path, a.dyn_range);
  return 0;
}

struct SweepArgs {
  std::string spec_path, config_path, report_path, methods_csv;
  double sir_from = 0.0, sir_to = 0.0, sir_step = 1.0;
  std::size_t trials = 10;
  std::optional<std::uint64_t> seed;
};

ComplexImage run_method(const std::string &method, const ComplexImage &X,
                        const PipelineConfig &cfg) {
  if (method == "proposed" || method == "specan1") {
    EstimatorConfig est = cfg.estimator;
    if (method == "specan1") {
      est.l_max = 1;
    }
    return process_blocks(X, cfg.blocks, est, cfg.notch).s_hat;
  }
  if (method == "pca") {
    return pca_removal(X, cfg.baselines.pca_rank).s_hat;
  }
  if (method == "rpca") {
    RpcaConfig rc;
    rc.lambda = cfg.baselines.rpca_lambda;
    rc.tol = cfg.baselines.rpca_tol;
    rc.max_iters = cfg.baselines.rpca_max_iters;
    rc.scene = cfg.baselines.rpca_scene_sparse ? RpcaScenePart::sparse
                                               : RpcaScenePart::low_rank;
    return rpca_removal(X, rc).s_hat;
  }
  throw ParameterError("unknown sweep method '" + method + "'");
}

int run_sweep(const SweepArgs &a) {
  SimulationSpec base = load_simulation_spec(a.spec_path);
  const PipelineConfig cfg = load_config_or_default(a.config_path);
  if (a.seed) {
    base.seed = *a.seed;
  }
  if (!(a.sir_step > 0.0)) {
    throw ParameterError("--sir-step must be positive");
  }
  if (a.sir_from > a.sir_to) {
    throw ParameterError("--sir-from must not exceed --sir-to");
  }
  if (a.trials == 0) {
    throw ParameterError("--trials must be positive");
  }

  std::vector<double> sirs;
  for (double s = a.sir_from; s <= a.sir_to + 1e-9; s += a.sir_step) {
    sirs.push_back(s);
  }

  std::vector<std::string> methods;
  {
    std::string cur;
    for (char c : a.methods_csv + ",") {
      if (c == ',') {
        if (!cur.empty()) {
          methods.push_back(cur);
          cur.clear();
        }
      } else {
        cur.push_back(c);
      }
    }
    if (methods.empty()) {
      throw ParameterError("--methods must name at least one method");
    }
    for (const std::string &m : methods) {
      if (m != "proposed" && m != "specan1" && m != "pca" && m != "rpca") {
        throw ParameterError("unknown sweep method '" + m + "'");
      }
    }
  }

  // errs[sir][method][trial]
  std::vector<std::vector<std::vector<double>>> errs(
      sirs.size(), std::vector<std::vector<double>>(
                       methods.size(), std::vector<double>(a.trials, 0.0)));

  struct Task {
    std::size_t si, ti;
  };
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < sirs.size(); ++si) {
    for (std::size_t ti = 0; ti < a.trials; ++ti) {
      tasks.push_back({si, ti});
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string fail_msg;
  std::mutex fail_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size() || failed.load()) {
        return;
      }
      const Task task = tasks[t];
      try {
        SimulationSpec spec = base;
        spec.sir_db = sirs[task.si];
        spec.seed = base.seed + task.ti; // trial-indexed, order-independent
        const Simulation sim = simulate(spec);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          const ComplexImage s_hat =
              run_method(methods[mi], sim.corrupted, cfg);
          errs[task.si][mi][task.ti] =
              relative_recovery_error_db(s_hat, sim.clean);
        }
      } catch (const std::exception &e) {
        std::lock_guard<std::mutex> lk(fail_mu);
        failed.store(true);
        if (fail_msg.empty()) {
          fail_msg = e.what();
        }
      }
    }
  };

  const unsigned nthreads =
      std::min<unsigned>(thread_budget(),
                         static_cast<unsigned>(tasks.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nthreads; ++i) {
      pool.emplace_back(worker);
    }
    for (std::thread &th : pool) {
      th.join();
    }
  }
  if (failed.load()) {
    throw Error("sweep trial failed: " + fail_msg);
  }

  json report;
  report["version"] = 1;
  report["trials"] = a.trials;
  report["sir_db"] = sirs;
  report["methods"] = methods;
  report["results"] = json::array();
  for (std::size_t si = 0; si < sirs.size(); ++si) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const std::vector<double> &v = errs[si][mi];
      double mean = 0.0;
      for (double x : v) {
        mean += x;
      }
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) {
        var += (x - mean) * (x - mean);
      }
      var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
      const double sd = std::sqrt(var);
      json jr;
      jr["sir_db"] = sirs[si];
      jr["method"] = methods[mi];
      jr["mean_rel_err_db"] = mean;
      jr["std_rel_err_db"] = sd;
      jr["std_err"] = sd / std::sqrt(static_cast<double>(v.size()));
      jr["per_trial"] = v;
      report["results"].push_back(jr);
    }
  }
  write_report(report, a.report_path);
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"SAR radio-frequency-interference removal toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  std::uint64_t sim_seed = 0;
  auto *sim = app.add_subcommand("simulate",
                                 "Generate a synthetic scene + interference");
  sim->add_option("--spec", sim_args.spec_path, "Simulation spec JSON")
      ->required();
  sim->add_option("--out-clean", sim_args.out_clean, "Clean scene output")
      ->required();
  sim->add_option("--out-corrupt", sim_args.out_corrupt,
                  "Corrupted image output")
      ->required();
  sim->add_option("--out-rfi", sim_args.out_rfi, "Interference-only output");
  auto *sim_seed_opt =
      sim->add_option("--seed", sim_seed, "Override the spec's seed");

  EstimateArgs est_args;
  auto *est = app.add_subcommand("estimate",
                                 "Estimate interference chirp parameters");
  est->add_option("--in", est_args.in_path, "Input CIMG image")->required();
  est->add_option("--config", est_args.config_path, "Pipeline config JSON");
  est->add_option("--report", est_args.report_path,
                  "Report path (stdout if omitted)");

  SuppressArgs sup_args;
  auto *sup = app.add_subcommand("suppress", "Remove estimated interference");
  sup->add_option("--in", sup_args.in_path, "Input CIMG image")->required();
  sup->add_option("--config", sup_args.config_path, "Pipeline config JSON");
  sup->add_option("--out", sup_args.out_path, "Cleaned image output")
      ->required();
  sup->add_option("--rfi-out", sup_args.rfi_out_path,
                  "Removed-interference output");
  sup->add_option("--report", sup_args.report_path,
                  "Report path (stdout if omitted)");

  MetricsArgs met_args;
  auto *met = app.add_subcommand("metrics", "Image quality metrics");
  met->add_option("--test", met_args.test_path, "Image under test")
      ->required();
  met->add_option("--ref", met_args.ref_path, "Reference image");
  met->add_option("--report", met_args.report_path,
                  "Report path (stdout if omitted)");

  RenderArgs ren_args;
  auto *ren = app.add_subcommand("render", "Render a magnitude PNG");
  ren->add_option("--in", ren_args.in_path, "Input CIMG image")->required();
  ren->add_option("--out", ren_args.out_path, "Output PNG path")->required();
  ren->add_option("--dyn-range", ren_args.dyn_range,
                  "Dynamic range in dB (default 40)");

  SweepArgs swp_args;
  std::uint64_t swp_seed = 0;
  auto *swp = app.add_subcommand(
      "sweep", "Run a multi-method SIR sweep and report recovery errors");
  swp->add_option("--spec", swp_args.spec_path, "Simulation spec JSON")
      ->required();
  swp->add_option("--sir-from", swp_args.sir_from, "Lowest SIR in dB")
      ->required();
  swp->add_option("--sir-to", swp_args.sir_to, "Highest SIR in dB")
      ->required();
  swp->add_option("--sir-step", swp_args.sir_step, "SIR step in dB")
      ->required();
  swp->add_option("--trials", swp_args.trials, "Trials per SIR point")
      ->required();
  swp->add_option("--methods", swp_args.methods_csv,
                  "Comma-separated: proposed,specan1,pca,rpca")
      ->required();
  swp->add_option("--config", swp_args.config_path, "Pipeline config JSON");
  swp->add_option("--report", swp_args.report_path,
                  "Report path (stdout if omitted)");
  auto *swp_seed_opt =
      swp->add_option("--seed", swp_seed, "Override the spec's seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    emit_error("usage", e.what());
    return kExitUsage;
  }

  try {
    if (*sim) {
      if (sim_seed_opt->count() > 0) {
        sim_args.seed = sim_seed;
      }
      return run_simulate(sim_args);
    }
    if (*est) {
      return run_estimate(est_args);
    }
    if (*sup) {
      return run_suppress(sup_args);
    }
    if (*met) {
      return run_metrics(met_args);
    }
    if (*ren) {
      return run_render(ren_args);
    }
    if (*swp) {
      if (swp_seed_opt->count() > 0) {
        swp_args.seed = swp_seed;
      }
      return run_sweep(swp_args);
    }
    emit_error("usage", "no subcommand selected");
    return kExitUsage;
  } catch (const ConfigError &e) {
    emit_error("config", e.what());
    return kExitConfig;
  } catch (const FormatError &e) {
    emit_error("format", e.what());
    return kExitFormat;
  } catch (const IoError &e) {
    emit_error("io", e.what());
    return kExitIo;
  } catch (const DimensionError &e) {
    emit_error("data", e.what());
    return kExitData;
  } catch (const ParameterError &e) {
    emit_error("data", e.what());
    return kExitData;
  } catch (const DataError &e) {
    emit_error("data", e.what());
    return kExitData;
  } catch (const std::exception &e) {
    emit_error("internal", e.what());
    return kExitInternal;
  }
}
