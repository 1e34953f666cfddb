// End-to-end checks of the command-line tool: exit codes per error
// category, JSON report schemas, deterministic simulation output, the
// byte-identical clean-input shortcut, and sweep statistics.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "rfiscrub/config.hpp"
#include "rfiscrub/core.hpp"
#include "rfiscrub/image_io.hpp"
#include "rfiscrub/metrics.hpp"
#include "rfiscrub/simulator.hpp"

#include "support/oracles.hpp"

using namespace rfiscrub;
using nlohmann::json;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CmdResult run_cli(const std::string &args, const std::string &env = "") {
  const std::string cmd = (env.empty() ? "" : env + " ") +
                          std::string(RFISCRUB_BIN) + " " + args +
                          " > cli_stdout.txt 2> cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  CmdResult r;
  if (WIFEXITED(status)) {
    r.exit_code = WEXITSTATUS(status);
  }
  r.out = slurp("cli_stdout.txt");
  r.err = slurp("cli_stderr.txt");
  return r;
}

std::string error_category(const std::string &stderr_text) {
  // the error object is the last line of stderr; warnings may precede it
  std::istringstream ss(stderr_text);
  std::string line, last;
  while (std::getline(ss, line)) {
    if (!line.empty()) {
      last = line;
    }
  }
  const json e = json::parse(last);
  return e.at("error").at("category").get<std::string>();
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::trunc);
  f << text;
}

// One grid-aligned component on a 32x32 lattice. With center 16 the
// azimuth chirp lands on frequency 0.25 of the default azimuth grid
// (the centered quadratic leaves linear term -2*Ka*16), and the range
// chirp on frequency 0.5 (carrier 0.375 shifted by -2*Kr*16, wrapped).
json small_sim_spec() {
  json j;
  j["rows"] = 32;
  j["cols"] = 32;
  j["seed"] = 5;
  j["sir_db"] = -10.0;
  j["scene"] = {{"type", "speckle"}, {"mean_power", 1.0}};
  j["mixture"]["azimuth_fm_rate"] = -1.0 / 128.0;
  j["mixture"]["components"] = json::array({json{
      {"amplitude", 1.0},
      {"range_fm_rate", 1.0 / 128.0},
      {"carrier_freq", 0.375},
      {"azimuth_center", 16.0},
      {"range_center", 16.0},
      {"azimuth_duration", 32.0},
      {"range_duration", 32.0},
  }});
  return j;
}

SimulationSpec library_spec_from(const json &j) {
  return parse_simulation_spec(j);
}

} // namespace

TEST_CASE("usage errors exit with code 2 and a JSON error object") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("scrub-everything").exit_code == 2);

  const CmdResult r = run_cli("estimate"); // missing required --in
  CHECK(r.exit_code == 2);
  CHECK(error_category(r.err) == "usage");
}

TEST_CASE("simulate writes the same images the library produces") {
  write_text("cli_sim_spec.json", small_sim_spec().dump());

  const CmdResult r = run_cli(
      "simulate --spec cli_sim_spec.json --out-clean cli_clean.cimg "
      "--out-corrupt cli_corrupt.cimg --out-rfi cli_rfi.cimg");
  REQUIRE(r.exit_code == 0);

  const Simulation want = simulate(library_spec_from(small_sim_spec()));
  REQUIRE(oracles::bitwise_equal(read_cimg("cli_clean.cimg"), want.clean));
  REQUIRE(
      oracles::bitwise_equal(read_cimg("cli_corrupt.cimg"), want.corrupted));
  REQUIRE(oracles::bitwise_equal(read_cimg("cli_rfi.cimg"), want.rfi));

  SECTION("--seed overrides the spec") {
    const CmdResult r2 = run_cli(
        "simulate --spec cli_sim_spec.json --out-clean cli_clean2.cimg "
        "--out-corrupt cli_corrupt2.cimg --seed 7");
    REQUIRE(r2.exit_code == 0);
    SimulationSpec spec = library_spec_from(small_sim_spec());
    spec.seed = 7;
    REQUIRE(oracles::bitwise_equal(read_cimg("cli_corrupt2.cimg"),
                                   simulate(spec).corrupted));
  }

  SECTION("error categories map to exit codes") {
    CHECK(run_cli("simulate --spec cli_no_such_spec.json --out-clean a.cimg "
                  "--out-corrupt b.cimg")
              .exit_code == 4);
    write_text("cli_bad_syntax.json", "{ nope");
    const CmdResult bad = run_cli(
        "simulate --spec cli_bad_syntax.json --out-clean a.cimg "
        "--out-corrupt b.cimg");
    CHECK(bad.exit_code == 3);
    CHECK(error_category(bad.err) == "config");

    json small = small_sim_spec();
    small["rows"] = 8;
    small["mixture"]["components"][0]["azimuth_center"] = 4.0;
    small["mixture"]["components"][0]["azimuth_duration"] = 8.0;
    write_text("cli_small_spec.json", small.dump());
    CHECK(run_cli("simulate --spec cli_small_spec.json --out-clean a.cimg "
                  "--out-corrupt b.cimg")
              .exit_code == 3);
  }
}

TEST_CASE("estimate reports grid-exact chirp parameters as JSON") {
  write_text("cli_sim_spec.json", small_sim_spec().dump());
  REQUIRE(run_cli("simulate --spec cli_sim_spec.json --out-clean "
                  "cli_clean.cimg --out-corrupt cli_corrupt.cimg")
              .exit_code == 0);

  const CmdResult r = run_cli("estimate --in cli_corrupt.cimg");
  REQUIRE(r.exit_code == 0);
  const json rep = json::parse(r.out);
  CHECK(rep.at("version") == 1);
  CHECK(rep.at("status") == "ok");
  CHECK(rep.at("mode") == "mmv");
  CHECK(rep.at("azimuth_fm_rate").get<double>() == -1.0 / 128.0);
  CHECK(rep.at("azimuth_freq").get<double>() == 0.25);
  REQUIRE(rep.at("range_components").size() >= 1);
  CHECK(rep.at("range_components")[0].at("range_fm_rate").get<double>() ==
        1.0 / 128.0);
  CHECK(rep.at("range_components")[0].at("range_freq").get<double>() == 0.5);
  CHECK(rep.at("range_components")[0].at("weight").get<double>() > 0.0);

  SECTION("--report writes the same document to a file") {
    const CmdResult r2 =
        run_cli("estimate --in cli_corrupt.cimg --report cli_est.json");
    REQUIRE(r2.exit_code == 0);
    CHECK(json::parse(slurp("cli_est.json")) == rep);
  }

  SECTION("a clean image reports no interference") {
    const CmdResult r2 = run_cli("estimate --in cli_clean.cimg");
    REQUIRE(r2.exit_code == 0);
    const json rep2 = json::parse(r2.out);
    CHECK(rep2.at("status") == "no-interference");
    CHECK_FALSE(rep2.contains("azimuth_fm_rate"));
    CHECK(rep2.at("range_components").empty());
  }

  SECTION("format and data errors are distinguished") {
    write_text("cli_garbage.cimg", "this is not a CIMG file at all........");
    const CmdResult bad = run_cli("estimate --in cli_garbage.cimg");
    CHECK(bad.exit_code == 5);
    CHECK(error_category(bad.err) == "format");

    write_text("cli_roi.json", R"({"estimator": {"roi": [0, 0, 64, 64]}})");
    const CmdResult roi =
        run_cli("estimate --in cli_corrupt.cimg --config cli_roi.json");
    CHECK(roi.exit_code == 6);
    CHECK(error_category(roi.err) == "data");

    CHECK(run_cli("estimate --in cli_missing.cimg").exit_code == 4);
  }
}

TEST_CASE("suppress passes a clean image through byte for byte") {
  SceneSpec scene;
  scene.kind = SceneKind::speckle;
  const ComplexImage clean = make_scene(scene, 64, 64, 21);
  write_cimg("cli_pure_scene.cimg", clean, 32);

  const CmdResult r = run_cli(
      "suppress --in cli_pure_scene.cimg --out cli_pure_out.cimg "
      "--report cli_sup_rep.json");
  REQUIRE(r.exit_code == 0);
  REQUIRE(oracles::read_file_bytes("cli_pure_out.cimg") ==
          oracles::read_file_bytes("cli_pure_scene.cimg"));

  const json rep = json::parse(slurp("cli_sup_rep.json"));
  CHECK(rep.at("version") == 1);
  CHECK(rep.at("status") == "ok");
  CHECK(rep.at("removed_energy").get<double>() == 0.0);
  CHECK(rep.at("input_energy").get<double>() ==
        rep.at("output_energy").get<double>());
  REQUIRE(rep.at("blocks").size() == 1);
  CHECK(rep.at("blocks")[0].at("row0") == 0);
  CHECK(rep.at("blocks")[0].at("report").at("detected") == false);
  CHECK(rep.at("blocks")[0].at("report").at("modified") == false);
}

TEST_CASE("suppress removes planted interference and accounts energy") {
  write_text("cli_sim_spec.json", small_sim_spec().dump());
  REQUIRE(run_cli("simulate --spec cli_sim_spec.json --out-clean "
                  "cli_clean.cimg --out-corrupt cli_corrupt.cimg")
              .exit_code == 0);

  const CmdResult r = run_cli(
      "suppress --in cli_corrupt.cimg --out cli_sup_out.cimg "
      "--rfi-out cli_sup_rfi.cimg --report cli_sup_rep2.json");
  REQUIRE(r.exit_code == 0);

  const json rep = json::parse(slurp("cli_sup_rep2.json"));
  REQUIRE(rep.at("blocks").size() == 1);
  CHECK(rep.at("blocks")[0].at("report").at("detected") == true);
  CHECK(rep.at("blocks")[0].at("report").at("modified") == true);
  CHECK(rep.at("removed_energy").get<double>() > 0.0);
  CHECK(rep.at("output_energy").get<double>() <
        rep.at("input_energy").get<double>());

  const ComplexImage clean = read_cimg("cli_clean.cimg");
  const ComplexImage corrupt = read_cimg("cli_corrupt.cimg");
  const ComplexImage out = read_cimg("cli_sup_out.cimg");
  const ComplexImage rfi_out = read_cimg("cli_sup_rfi.cimg");
  CHECK(relative_recovery_error_db(out, clean) <
        relative_recovery_error_db(corrupt, clean));
  CHECK(oracles::max_abs_diff(add(out, rfi_out), corrupt) <
        1e-9 * std::sqrt(energy(corrupt)));

  SECTION("a tiny kappa triggers the suspicious-config warning") {
    write_text("cli_kappa.json", R"({"notch": {"kappa": 0.5}})");
    const CmdResult warned = run_cli(
        "suppress --in cli_corrupt.cimg --out cli_sup_warn.cimg "
        "--config cli_kappa.json --report cli_sup_warn.json");
    REQUIRE(warned.exit_code == 0);
    CHECK(warned.err.find("notch.kappa") != std::string::npos);
  }
}

TEST_CASE("metrics reports gradient and reference comparisons") {
  write_text("cli_sim_spec.json", small_sim_spec().dump());
  REQUIRE(run_cli("simulate --spec cli_sim_spec.json --out-clean "
                  "cli_clean.cimg --out-corrupt cli_corrupt.cimg")
              .exit_code == 0);

  SECTION("gradient only without a reference") {
    const CmdResult r = run_cli("metrics --test cli_clean.cimg");
    REQUIRE(r.exit_code == 0);
    const json rep = json::parse(r.out);
    CHECK(rep.at("ag").get<double>() > 0.0);
    CHECK_FALSE(rep.contains("rel_err_db"));
    CHECK_FALSE(rep.contains("sir_db"));
  }

  SECTION("with a reference the implied SIR comes back") {
    const CmdResult r =
        run_cli("metrics --test cli_corrupt.cimg --ref cli_clean.cimg");
    REQUIRE(r.exit_code == 0);
    const json rep = json::parse(r.out);
    // at SIR -10 the corruption energy is 10 dB above the scene
    CHECK_THAT(rep.at("sir_db").get<double>(),
               Catch::Matchers::WithinAbs(-10.0, 1e-9));
    CHECK_THAT(rep.at("rel_err_db").get<double>(),
               Catch::Matchers::WithinAbs(10.0, 1e-9));
  }

  SECTION("shape mismatch is a data error") {
    write_cimg("cli_small.cimg", ComplexImage(16, 16), 64);
    const CmdResult r =
        run_cli("metrics --test cli_corrupt.cimg --ref cli_small.cimg");
    CHECK(r.exit_code == 6);
    CHECK(error_category(r.err) == "data");
  }
}

TEST_CASE("render produces a readable PNG with the requested size") {
  const ComplexImage img = oracles::random_image(20, 28, 301);
  write_cimg("cli_render_in.cimg", img, 64);

  REQUIRE(run_cli("render --in cli_render_in.cimg --out cli_render.png")
              .exit_code == 0);
  const oracles::GrayPng png =
      oracles::parse_gray_png(oracles::read_file_bytes("cli_render.png"));
  CHECK(png.width == 28);
  CHECK(png.height == 20);

  CHECK(run_cli("render --in cli_render_in.cimg --out cli_render.png "
                "--dyn-range 0")
            .exit_code == 6);
  CHECK(run_cli("render --in cli_absent.cimg --out x.png").exit_code == 4);
}

TEST_CASE("sweep aggregates per-trial recovery errors") {
  json spec = small_sim_spec();
  spec["sir_db"] = 0.0;
  write_text("cli_sweep_spec.json", spec.dump());

  const std::string sweep_args =
      "sweep --spec cli_sweep_spec.json --sir-from 0 --sir-to 5 "
      "--sir-step 5 --trials 2 --methods proposed,pca "
      "--report cli_sweep.json";
  const CmdResult r = run_cli(sweep_args, "RFI_SCRUB_THREADS=2");
  REQUIRE(r.exit_code == 0);

  const json rep = json::parse(slurp("cli_sweep.json"));
  CHECK(rep.at("version") == 1);
  CHECK(rep.at("trials") == 2);
  CHECK(rep.at("sir_db") == json::array({0.0, 5.0}));
  CHECK(rep.at("methods") == json::array({"proposed", "pca"}));
  REQUIRE(rep.at("results").size() == 4);

  for (const json &row : rep.at("results")) {
    const std::vector<double> per =
        row.at("per_trial").get<std::vector<double>>();
    REQUIRE(per.size() == 2);
    const double mean = (per[0] + per[1]) / 2.0;
    const double var = (per[0] - mean) * (per[0] - mean) +
                       (per[1] - mean) * (per[1] - mean);
    const double sd = std::sqrt(var); // n - 1 == 1
    CHECK_THAT(row.at("mean_rel_err_db").get<double>(),
               Catch::Matchers::WithinAbs(mean, 1e-12));
    CHECK_THAT(row.at("std_rel_err_db").get<double>(),
               Catch::Matchers::WithinAbs(sd, 1e-12));
    CHECK_THAT(row.at("std_err").get<double>(),
               Catch::Matchers::WithinAbs(sd / std::sqrt(2.0), 1e-12));
  }

  SECTION("the proposed method beats PCA on this planted mixture") {
    auto mean_of = [&](const std::string &method, double sir) {
      for (const json &row : rep.at("results")) {
        if (row.at("method") == method &&
            row.at("sir_db").get<double>() == sir) {
          return row.at("mean_rel_err_db").get<double>();
        }
      }
      FAIL("missing sweep row");
      return 0.0;
    };
    CHECK(mean_of("proposed", 0.0) < mean_of("pca", 0.0));
  }

  SECTION("trial seeds make reruns reproducible regardless of threads") {
    const CmdResult r2 = run_cli(
        "sweep --spec cli_sweep_spec.json --sir-from 0 --sir-to 5 "
        "--sir-step 5 --trials 2 --methods proposed,pca "
        "--report cli_sweep2.json",
        "RFI_SCRUB_THREADS=1");
    REQUIRE(r2.exit_code == 0);
    const json rep2 = json::parse(slurp("cli_sweep2.json"));
    CHECK(rep2.at("results") == rep.at("results"));
  }

  SECTION("sweep argument validation") {
    CHECK(run_cli("sweep --spec cli_sweep_spec.json --sir-from 0 "
                  "--sir-to 5 --sir-step 5 --trials 2 --methods pca,bogus")
              .exit_code == 6);
    CHECK(run_cli("sweep --spec cli_sweep_spec.json --sir-from 0 "
                  "--sir-to 5 --sir-step 0 --trials 2 --methods pca")
              .exit_code == 6);
    CHECK(run_cli("sweep --spec cli_sweep_spec.json --sir-from 5 "
                  "--sir-to 0 --sir-step 5 --trials 2 --methods pca")
              .exit_code == 6);
    CHECK(run_cli("sweep --spec cli_sweep_spec.json --sir-from 0 "
                  "--sir-to 5 --sir-step 5 --trials 0 --methods pca")
              .exit_code == 6);
    CHECK(run_cli("sweep --spec cli_absent.json --sir-from 0 --sir-to 5 "
                  "--sir-step 5 --trials 2 --methods pca")
              .exit_code == 4);
  }
}
