// Copyright 2026 The bandbeam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// bandbeam command-line front end.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bandbeam/beamforming.hpp"
#include "bandbeam/corpus.hpp"
#include "bandbeam/geometry.hpp"
#include "bandbeam/harness.hpp"

namespace {

using namespace bandbeam;

struct ExperimentFlags {
  std::string config;
  std::string preset;
  std::string corpus;
  std::string out;
  std::string geometry;
  std::optional<std::uint64_t> seed;
  std::optional<int> scenes;
  std::vector<std::string> variants;
  std::optional<double> cutoff_hz;
  std::string bands;
  std::optional<int> max_order;
  std::optional<double> max_duration;
  std::string masks;
  bool save_audio = false;
  std::optional<int> jobs;
};

void add_experiment_flags(CLI::App* app, ExperimentFlags& f) {
  app->add_option("--config", f.config, "Experiment config file (JSON)");
  app->add_option("--preset", f.preset, "experiment1 or experiment2")
      ->check(CLI::IsMember({"experiment1", "experiment2"}));
  app->add_option("--corpus", f.corpus, "Directory of 16 kHz mono WAV files");
  app->add_option("--out", f.out, "Output root directory");
  app->add_option("--geometry", f.geometry, "Geometry file (default: built-in arrays)");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--scenes-per-array", f.scenes, "Scenes per array");
  app->add_option("--variant", f.variants, "Model variant (repeatable)");
  app->add_option("--cutoff-hz", f.cutoff_hz, "Bandwise cutoff frequency");
  app->add_option("--bands", f.bands, "Band edges in Hz, comma separated");
  app->add_option("--max-order", f.max_order, "Image-source reflection order");
  app->add_option("--max-duration", f.max_duration, "Utterance cap in seconds");
  app->add_option("--masks", f.masks, "Use external masks from this directory");
  app->add_flag("--save-audio", f.save_audio, "Write WAV outputs and masks");
  app->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve_config(const ExperimentFlags& f) {
  ExperimentConfig c;
  if (!f.config.empty())
    c = load_experiment_config(f.config);
  else if (f.preset == "experiment1" || f.preset.empty())
    c = experiment1_preset();
  else
    c = experiment2_preset();
  if (!f.config.empty() && !f.preset.empty()) {
    const std::string name = c.name;
    ExperimentConfig p = f.preset == "experiment1" ? experiment1_preset() : experiment2_preset();
    c.arrays = p.arrays;
    c.name = name;
  }
  if (!f.corpus.empty()) c.corpus_dir = f.corpus;
  if (!f.out.empty()) c.output_dir = f.out;
  if (!f.geometry.empty()) c.geometry_file = f.geometry;
  if (f.seed) c.seed = *f.seed;
  if (f.scenes) c.scenes_per_array = *f.scenes;
  if (!f.variants.empty()) {
    c.variants.clear();
    for (const std::string& v : f.variants) c.variants.push_back(parse_variant(v));
  }
  if (f.cutoff_hz) c.cutoff_hz = *f.cutoff_hz;
  if (!f.bands.empty()) c.bands = BandSpec::parse(f.bands);
  if (f.max_order) c.max_order = *f.max_order;
  if (f.max_duration) c.max_duration_s = *f.max_duration;
  if (!f.masks.empty()) {
    c.mask_source = MaskSource::kExternal;
    c.mask_dir = f.masks;
  }
  if (f.save_audio) c.save_audio = true;
  if (f.jobs) c.jobs = *f.jobs;
  if (c.corpus_dir.empty() && c.mask_source == MaskSource::kOracle)
    throw Error("no corpus given (use --corpus or corpus_dir in the config)");
  c.validate();
  return c;
}

void print_summary(const MetricsReport& report) {
  std::printf("%-12s %-8s %-10s %6s %9s\n", "grouping", "group", "variant", "n", "SI-SDR");
  for (const GroupSummary& g : report.groups)
    std::printf("%-12s %-8s %-10s %6zu %9.2f\n", grouping_name(g.grouping).c_str(),
                g.group.c_str(), g.variant.c_str(), g.count, g.si_sdr_db);
}

int run_arrays(const std::string& out, const std::string& validate) {
  if (!validate.empty()) {
    const auto arrays = load_geometry_file(validate);
    for (const MicArray& a : arrays) {
      std::printf("%-4s L=%ld frontal=%ld", a.name.c_str(), static_cast<long>(a.size()),
                  static_cast<long>(frontal_mic_index(a)));
      if (!a.lineage.base.empty())
        std::printf(" base=%s range=[%g, %g] mm", a.lineage.base.c_str(),
                    a.lineage.magnitude_lo_mm, a.lineage.magnitude_hi_mm);
      std::printf("\n");
    }
    std::printf("%zu arrays OK\n", arrays.size());
    return 0;
  }
  const std::string text = geometry_to_json(standard_arrays());
  if (out.empty()) {
    std::cout << text;
  } else {
    save_geometry_file(out, standard_arrays());
    std::cerr << "wrote " << out << "\n";
  }
  return 0;
}

int run_beampattern(const std::string& array_name, const std::string& geometry,
                    const std::string& beam, const std::vector<double>& freqs, double step,
                    const std::string& out, const std::string& bank_json) {
  const auto arrays = geometry.empty() ? standard_arrays() : load_geometry_file(geometry);
  const MicArray& array = find_array(arrays, array_name);
  const BeamformerBank bank = build_bank(array);
  const Eigen::Index d = bank.index_of(beam);
  if (!bank_json.empty()) {
    std::ofstream os(bank_json);
    if (!os) throw Error("cannot write " + bank_json);
    os << bank_to_json(bank);
  }
  const auto steps = static_cast<Eigen::Index>(std::lround(360.0 / step));
  Eigen::VectorXd az(steps);
  for (Eigen::Index i = 0; i < steps; ++i) az[i] = i * step * std::numbers::pi / 180.0;

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw Error("cannot write " + out);
    os = &file;
  }
  *os << "array,beam,freq_hz,azimuth_deg,gain,gain_db\n";
  for (double f : freqs) {
    const Eigen::VectorXd gain = beam_pattern(array, bank.directions[d], f, az);
    for (Eigen::Index i = 0; i < steps; ++i) {
      char line[160];
      std::snprintf(line, sizeof(line), "%s,%s,%g,%g,%.9g,%.6f\n", array.name.c_str(),
                    beam.c_str(), f, i * step, gain[i],
                    20.0 * std::log10(std::max(gain[i], 1e-12)));
      *os << line;
    }
    std::cerr << "freq " << f << " Hz: -3 dB main lobe "
              << main_lobe_width_deg(array, bank.directions[d], f) << " deg\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wearable-array enhancement pipeline: scenes, beamformers, masks, metrics"};
  app.require_subcommand(1);

  std::string arrays_out, arrays_validate;
  auto* arrays_cmd = app.add_subcommand("arrays", "Dump or validate the geometry file");
  arrays_cmd->add_option("--out", arrays_out, "Write the geometry file here");
  arrays_cmd->add_option("--validate", arrays_validate, "Check an existing geometry file");

  std::string corpus_out;
  int corpus_count = 40, corpus_speakers = 8;
  double corpus_seconds = 3.0;
  std::uint64_t corpus_seed = 7;
  auto* corpus_cmd = app.add_subcommand("corpus", "Write a synthetic speech-like corpus");
  corpus_cmd->add_option("--out", corpus_out, "Output directory")->required();
  corpus_cmd->add_option("--count", corpus_count, "Number of utterances");
  corpus_cmd->add_option("--speakers", corpus_speakers, "Number of speakers");
  corpus_cmd->add_option("--seconds", corpus_seconds, "Utterance length");
  corpus_cmd->add_option("--seed", corpus_seed, "Seed");

  std::string bp_array = "0", bp_geometry, bp_beam = "front", bp_out, bp_bank;
  std::vector<double> bp_freqs{250.0, 1000.0, 4000.0};
  double bp_step = 1.0;
  auto* bp_cmd = app.add_subcommand("beampattern", "Directivity CSV of a DAS beam");
  bp_cmd->add_option("--array", bp_array, "Array name");
  bp_cmd->add_option("--geometry", bp_geometry, "Geometry file");
  bp_cmd->add_option("--beam", bp_beam, "front, back, left or right")
      ->check(CLI::IsMember({"front", "back", "left", "right"}));
  bp_cmd->add_option("--freq", bp_freqs, "Frequencies in Hz")->delimiter(',');
  bp_cmd->add_option("--step", bp_step, "Azimuth step in degrees")->check(CLI::PositiveNumber);
  bp_cmd->add_option("--out", bp_out, "CSV path (default stdout)");
  bp_cmd->add_option("--bank-json", bp_bank, "Also export the 4-beam bank weights");

  ExperimentFlags gen_f, enh_f, eval_f, run_f;
  auto* gen_cmd = app.add_subcommand("gen", "Sample and render scenes");
  add_experiment_flags(gen_cmd, gen_f);
  auto* enh_cmd = app.add_subcommand("enhance", "Apply oracle or external masks");
  add_experiment_flags(enh_cmd, enh_f);
  auto* eval_cmd = app.add_subcommand("eval", "Score enhanced outputs and write reports");
  add_experiment_flags(eval_cmd, eval_f);
  auto* run_cmd = app.add_subcommand("run", "gen + enhance + eval in one pass");
  add_experiment_flags(run_cmd, run_f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (arrays_cmd->parsed()) return run_arrays(arrays_out, arrays_validate);
    if (corpus_cmd->parsed()) {
      const auto files = write_synthetic_corpus(corpus_out, corpus_count, corpus_seconds,
                                                corpus_seed, corpus_speakers);
      std::cerr << "wrote " << files.size() << " utterances to " << corpus_out << "\n";
      return 0;
    }
    if (bp_cmd->parsed())
      return run_beampattern(bp_array, bp_geometry, bp_beam, bp_freqs, bp_step, bp_out, bp_bank);
    if (gen_cmd->parsed()) {
      generate_dataset(resolve_config(gen_f));
      return 0;
    }
    if (enh_cmd->parsed()) {
      enhance_dataset(resolve_config(enh_f));
      return 0;
    }
    if (eval_cmd->parsed()) {
      print_summary(evaluate_dataset(resolve_config(eval_f)));
      return 0;
    }
    if (run_cmd->parsed()) {
      print_summary(run_experiment(resolve_config(run_f)));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
