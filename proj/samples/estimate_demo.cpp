// Generate a two-component chirp mixture over speckle and recover its
// parameters from the corrupted image alone.
#include <cstdio>

#include <rfiscrub/rfiscrub.hpp>

using namespace rfiscrub;

int main() {
  SimulationSpec spec;
  spec.rows = 256;
  spec.cols = 256;
  spec.seed = 7;
  spec.sir_db = -5.0;
  spec.snr_db = 20.0;

  // Rates sit on the default estimation grid (spacing 2/256^2, span 1/256).
  LfmMixture mix;
  mix.azimuth_fm_rate = 96.0 / 32768.0;
  LfmComponent c0;
  c0.amplitude = {1.0, 0.0};
  c0.range_fm_rate = 64.0 / 32768.0;
  c0.carrier_freq = 0.5;
  c0.azimuth_center = 128.0;
  c0.range_center = 128.0;
  c0.azimuth_duration = 256.0;
  c0.range_duration = 256.0;
  LfmComponent c1 = c0;
  c1.amplitude = {0.0, 0.6};
  c1.range_fm_rate = -96.0 / 32768.0;
  c1.carrier_freq = -0.5;
  mix.components = {c0, c1};
  spec.mixture = mix;

  Simulation sim = simulate(spec);
  std::printf("scene %zux%zu  sir %.1f dB  snr %.1f dB\n", sim.corrupted.rows(),
              sim.corrupted.cols(), spec.sir_db, *spec.snr_db);

  EstimatorConfig cfg;
  EstimationResult est = estimate_interference(sim.corrupted, cfg);
  if (!est.detected) {
    std::printf("no interference detected\n");
    return 1;
  }

  std::printf("azimuth fm rate  true %+.6f  est %+.6f\n", mix.azimuth_fm_rate,
              est.azimuth_fm_rate);
  std::printf("range components (%zu found):\n", est.range_components.size());
  for (const RangeComponent& rc : est.range_components) {
    std::printf("  fm rate %+.6f  freq %+.6f  weight %.3f\n", rc.range_fm_rate,
                rc.range_freq, rc.weight);
  }
  for (const LfmComponent& c : mix.components) {
    double eff = c.carrier_freq * 2.0 - 2.0 * c.range_fm_rate * c.range_center;
    std::printf("  true    %+.6f  freq %+.6f\n", c.range_fm_rate, eff);
  }
  return 0;
}
