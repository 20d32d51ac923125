/*
 * Copyright 2026 The Actirep Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// actirep: raw actigraphy -> activity-count maps -> VAE features ->
// outcome estimation, stage by stage. Every stage derives its RNG stream
// from one root seed (--seed / ACTIREP_SEED / config [run] seed), so a full
// pipeline re-run with the same seed reproduces every artifact byte for
// byte.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "actirep/actigram.hpp"
#include "actirep/cnnlstm.hpp"
#include "actirep/common.hpp"
#include "actirep/eval.hpp"
#include "actirep/ingest.hpp"
#include "actirep/labels.hpp"
#include "actirep/nncore.hpp"
#include "actirep/pipeline.hpp"
#include "actirep/rng.hpp"
#include "actirep/signal.hpp"
#include "actirep/simulate.hpp"
#include "actirep/vae.hpp"
#include "json.hpp"

namespace {

using namespace actirep;

// Flat key-value config with [section] headers; flags override these values.
std::map<std::string, std::string> parse_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError,
          "cannot open config " + path.string());
  std::map<std::string, std::string> values;
  std::string line;
  std::string section;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string trimmed = line.substr(first, last - first + 1);
    if (trimmed.empty() || trimmed[0] == '#' || trimmed[0] == ';') continue;
    if (trimmed.front() == '[' && trimmed.back() == ']') {
      section = trimmed.substr(1, trimmed.size() - 2);
      continue;
    }
    const auto equals = trimmed.find('=');
    require(equals != std::string::npos, ErrorCode::UsageError,
            path.string() + " line " + std::to_string(line_number) +
                ": expected key = value");
    auto strip = [](std::string text) {
      const auto begin = text.find_first_not_of(" \t");
      const auto end = text.find_last_not_of(" \t");
      return begin == std::string::npos
                 ? std::string()
                 : text.substr(begin, end - begin + 1);
    };
    const std::string key = strip(trimmed.substr(0, equals));
    values[section.empty() ? key : section + "." + key] =
        strip(trimmed.substr(equals + 1));
  }
  return values;
}

struct ConfigLookup {
  std::map<std::string, std::string> values;

  template <typename T>
  void apply(const std::string& key, T& target) const {
    const auto it = values.find(key);
    if (it == values.end()) return;
    std::istringstream stream(it->second);
    T parsed;
    if (stream >> parsed) target = parsed;
  }

  void apply(const std::string& key, std::string& target) const {
    const auto it = values.find(key);
    if (it != values.end()) target = it->second;
  }
};

std::vector<actigram::ActigraphyMap> load_maps_dir(
    const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorCode::IoError,
          dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".amap") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorCode::IoError,
          "no .amap files under " + dir.string());
  std::vector<actigram::ActigraphyMap> maps;
  maps.reserve(files.size());
  for (const auto& file : files) {
    maps.push_back(actigram::load_map_file(file));
  }
  return maps;
}

std::vector<const actigram::ActigraphyMap*> map_pointers(
    const std::vector<actigram::ActigraphyMap>& maps) {
  std::vector<const actigram::ActigraphyMap*> ptrs;
  for (const auto& map : maps) ptrs.push_back(&map);
  return ptrs;
}

void write_synthetic_set(const std::vector<vae::LabeledMap>& synthetic,
                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(std::filesystem::is_directory(dir), ErrorCode::IoError,
          "cannot create " + dir.string());
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  for (const auto& labeled : synthetic) {
    actigram::save_map_file(labeled.map,
                            dir / (labeled.map.participant_id + ".amap"));
    labels[labeled.map.participant_id] = binary_class_name(labeled.label);
  }
  std::ofstream out(dir / "synthetic.json");
  require(out.good(), ErrorCode::IoError, "cannot write synthetic.json");
  out << labels.dump(2) << "\n";
}

std::vector<vae::LabeledMap> load_synthetic_set(
    const std::filesystem::path& dir) {
  std::ifstream in(dir / "synthetic.json");
  require(in.good(), ErrorCode::IoError,
          "cannot open " + (dir / "synthetic.json").string());
  const nlohmann::json labels = nlohmann::json::parse(in);
  std::vector<vae::LabeledMap> synthetic;
  for (const auto& [id, label] : labels.items()) {
    vae::LabeledMap labeled;
    labeled.map = actigram::load_map_file(dir / (id + ".amap"));
    labeled.label = label.get<std::string>() == "unhealthy"
                        ? BinaryClass::Unhealthy
                        : BinaryClass::Healthy;
    synthetic.push_back(std::move(labeled));
  }
  return synthetic;
}

std::map<std::string, ingest::SurveyRecord> survey_index(
    const std::filesystem::path& path) {
  std::map<std::string, ingest::SurveyRecord> index;
  for (ingest::SurveyRecord& record : ingest::parse_survey_csv(path)) {
    std::string id = record.participant_id;
    index.emplace(std::move(id), std::move(record));
  }
  return index;
}

int run(int argc, char** argv) {
  CLI::App app{"actigraphy-to-outcome pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 0;
  app.add_option("--config", config_path, "flat key-value config file");
  app.add_option("--seed", seed, "root seed; all stage streams derive from it")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  app.add_option("--jobs", jobs, "worker cap for parallel kernels");

  // simulate
  auto* cmd_simulate = app.add_subcommand("simulate", "generate a synthetic cohort");
  sim::CohortSpec cohort;
  std::string sim_out;
  cmd_simulate->add_option("--participants", cohort.n_participants, "cohort size");
  cmd_simulate->add_option("--days", cohort.days, "recording days");
  cmd_simulate->add_option("--unhealthy-fraction", cohort.unhealthy_fraction,
                           "fraction labeled unhealthy");
  cmd_simulate->add_option("--missing-rate", cohort.missing_rate,
                           "fraction of time dropped");
  cmd_simulate->add_option("--amplitude-drop", cohort.effect.amplitude_drop,
                           "unhealthy envelope attenuation");
  cmd_simulate->add_option("--phase-shift-hours",
                           cohort.effect.phase_shift_hours,
                           "unhealthy circadian delay");
  cmd_simulate->add_option("--fragmentation-boost",
                           cohort.effect.fragmentation_boost,
                           "unhealthy night-burst multiplier");
  cmd_simulate->add_option("--out", sim_out, "output directory")->required();

  // prep
  auto* cmd_prep = app.add_subcommand("prep", "raw csv -> actigraphy maps");
  std::string raw_dir, prep_out;
  actigram::MapConfig map_cfg;
  map_cfg.normalization_cap = 0.0;  // fitted unless given
  signal::FilterSpec filter_cfg;
  cmd_prep->add_option("--raw-dir", raw_dir, "directory of raw csv files")
      ->required();
  cmd_prep->add_option("--out", prep_out, "map output directory")->required();
  cmd_prep->add_option("--days", map_cfg.days, "days per map");
  cmd_prep->add_option("--bin-seconds", map_cfg.bin_seconds,
                       "seconds per map bin (multiple of 30)");
  cmd_prep->add_option("--cap", map_cfg.normalization_cap,
                       "normalization cap; fitted at the 99.5th percentile when omitted");
  cmd_prep->add_option("--low-cut", filter_cfg.low_cut_hz, "bandpass low edge (Hz)");
  cmd_prep->add_option("--high-cut", filter_cfg.high_cut_hz, "bandpass high edge (Hz)");
  cmd_prep->add_option("--order", filter_cfg.order, "filter order");

  // train-vae
  auto* cmd_train_vae = app.add_subcommand("train-vae", "train the map autoencoder");
  std::string vae_maps_dir, vae_out;
  vae::VaeConfig vae_cfg;
  cmd_train_vae->add_option("--maps", vae_maps_dir, "map directory")->required();
  cmd_train_vae->add_option("--out", vae_out, "checkpoint path")->required();
  cmd_train_vae->add_option("--latent-dim", vae_cfg.latent_dim, "latent width");
  cmd_train_vae->add_option("--epochs", vae_cfg.epochs, "training epochs");
  cmd_train_vae->add_option("--batch-size", vae_cfg.batch_size, "batch size");
  cmd_train_vae->add_option("--kl-weight", vae_cfg.kl_weight, "KL term weight");

  // encode
  auto* cmd_encode = app.add_subcommand("encode", "maps -> latent csv");
  std::string enc_model, enc_maps_dir, enc_out;
  cmd_encode->add_option("--model", enc_model, "vae checkpoint")->required();
  cmd_encode->add_option("--maps", enc_maps_dir, "map directory")->required();
  cmd_encode->add_option("--out", enc_out, "latent csv path")->required();

  // traverse
  auto* cmd_traverse = app.add_subcommand("traverse", "latent traversal grid");
  std::string trav_model, trav_maps_dir, trav_out;
  double trav_lo = -2.0, trav_hi = 2.0;
  int trav_steps = 9;
  cmd_traverse->add_option("--model", trav_model, "vae checkpoint")->required();
  cmd_traverse->add_option("--maps", trav_maps_dir,
                           "map directory; the median-activity map is the base")
      ->required();
  cmd_traverse->add_option("--lo", trav_lo, "sweep start");
  cmd_traverse->add_option("--hi", trav_hi, "sweep end");
  cmd_traverse->add_option("--steps", trav_steps, "sweep points");
  cmd_traverse->add_option("--out", trav_out, "grid pgm path")->required();

  // generate
  auto* cmd_generate = app.add_subcommand("generate", "sample synthetic labeled maps");
  std::string gen_model, gen_latents, gen_labels, gen_out;
  int gen_per_class = 100;
  cmd_generate->add_option("--model", gen_model, "vae checkpoint")->required();
  cmd_generate->add_option("--latents", gen_latents, "latent csv from encode")
      ->required();
  cmd_generate->add_option("--labels", gen_labels, "labels csv")->required();
  cmd_generate->add_option("--per-class", gen_per_class, "maps per class");
  cmd_generate->add_option("--out", gen_out, "output directory")->required();

  // train-cnnlstm
  auto* cmd_train_cnn = app.add_subcommand("train-cnnlstm", "train the supervised baseline");
  std::string cnn_maps_dir, cnn_labels, cnn_synth_dir, cnn_out;
  cnnlstm::CnnLstmConfig cnn_cfg;
  cmd_train_cnn->add_option("--maps", cnn_maps_dir, "map directory")->required();
  cmd_train_cnn->add_option("--labels", cnn_labels, "labels csv")->required();
  cmd_train_cnn->add_option("--synthetic", cnn_synth_dir,
                            "synthetic map directory from generate");
  cmd_train_cnn->add_option("--out", cnn_out, "checkpoint path")->required();
  cmd_train_cnn->add_option("--epochs", cnn_cfg.epochs, "training epochs");
  cmd_train_cnn->add_option("--batch-size", cnn_cfg.batch_size, "batch size");
  cmd_train_cnn->add_option("--conv-filters", cnn_cfg.conv_filters, "conv1d filters");
  cmd_train_cnn->add_option("--lstm-units", cnn_cfg.lstm_units, "lstm units");
  cmd_train_cnn->add_option("--dense-units", cnn_cfg.dense_units, "dense units");
  cmd_train_cnn->add_option("--learning-rate", cnn_cfg.learning_rate, "adam step size");

  // labels
  auto* cmd_labels = app.add_subcommand("labels", "score surveys into outcome labels");
  std::string lab_survey, lab_out;
  std::string experiment_id = "E3";
  cmd_labels->add_option("--survey", lab_survey, "survey csv")->required();
  cmd_labels->add_option("--experiment", experiment_id, "E1|E2|E3|E4");
  cmd_labels->add_option("--out", lab_out, "labels csv path")->required();

  // evaluate
  auto* cmd_evaluate = app.add_subcommand("evaluate", "run the full protocol");
  std::string eval_kind = "vae_lr";
  std::string eval_experiment = "E3";
  std::string eval_maps_dir, eval_survey, eval_latents, eval_synth_dir;
  std::string eval_out, eval_table;
  eval::ProtocolConfig protocol;
  cnnlstm::CnnLstmConfig eval_cnn_cfg;
  cmd_evaluate->add_option("--model-kind", eval_kind, "vae_lr|cnnlstm|cnnlstm_aug");
  cmd_evaluate->add_option("--experiment", eval_experiment, "E1|E2|E3|E4");
  cmd_evaluate->add_option("--maps", eval_maps_dir, "map directory")->required();
  cmd_evaluate->add_option("--survey", eval_survey, "survey csv")->required();
  cmd_evaluate->add_option("--latents", eval_latents, "latent csv (vae_lr)");
  cmd_evaluate->add_option("--synthetic", eval_synth_dir,
                           "synthetic maps (cnnlstm_aug)");
  cmd_evaluate->add_option("--repeats", protocol.external_repeats, "external repeats");
  cmd_evaluate->add_option("--folds", protocol.internal_folds, "internal folds");
  cmd_evaluate->add_option("--test-fraction", protocol.test_fraction, "held-out fraction");
  cmd_evaluate->add_option("--epochs", eval_cnn_cfg.epochs, "deep model epochs");
  cmd_evaluate->add_option("--batch-size", eval_cnn_cfg.batch_size, "deep model batch");
  cmd_evaluate->add_option("--out", eval_out, "report json path")->required();
  cmd_evaluate->add_option("--table", eval_table, "plain-text table path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& error) {
    std::cerr << "error: UsageError: " << error.what() << "\n";
    return 2;
  }

  // Config file first, then env seed, then explicit flags.
  ConfigLookup config;
  if (!config_path.empty()) {
    config.values = parse_config_file(config_path);
    if (!seed_given) config.apply("run.seed", seed);
    config.apply("run.jobs", jobs);
    config.apply("map.days", map_cfg.days);
    config.apply("map.bin_seconds", map_cfg.bin_seconds);
    config.apply("map.normalization_cap", map_cfg.normalization_cap);
    config.apply("vae.latent_dim", vae_cfg.latent_dim);
    config.apply("vae.epochs", vae_cfg.epochs);
    config.apply("vae.batch_size", vae_cfg.batch_size);
    config.apply("vae.kl_weight", vae_cfg.kl_weight);
    config.apply("cnnlstm.conv_filters", cnn_cfg.conv_filters);
    config.apply("cnnlstm.epochs", cnn_cfg.epochs);
    config.apply("cnnlstm.batch_size", cnn_cfg.batch_size);
    config.apply("cnnlstm.lstm_units", cnn_cfg.lstm_units);
    config.apply("cnnlstm.dense_units", cnn_cfg.dense_units);
    config.apply("cnnlstm.learning_rate", cnn_cfg.learning_rate);
    config.apply("protocol.external_repeats", protocol.external_repeats);
    config.apply("protocol.internal_folds", protocol.internal_folds);
    config.apply("protocol.test_fraction", protocol.test_fraction);
    config.apply("run.experiment", experiment_id);
    config.apply("run.experiment", eval_experiment);
  }
  if (!seed_given && config.values.count("run.seed") == 0) {
    if (const char* env_seed = std::getenv("ACTIREP_SEED")) {
      seed = std::strtoull(env_seed, nullptr, 10);
    }
  }
  if (jobs > 0) nn::set_max_threads(jobs);

  if (cmd_simulate->parsed()) {
    cohort.seed = derive_seed(seed, "simulate");
    const sim::Manifest manifest = sim::generate_cohort(cohort, sim_out);
    std::cout << "simulate: wrote " << manifest.participants.size()
              << " raw recordings to " << sim_out << "\n";
    return 0;
  }

  if (cmd_prep->parsed()) {
    const pipeline::PrepSummary summary =
        pipeline::prep_directory(raw_dir, prep_out, map_cfg, filter_cfg);
    std::cout << "prep: wrote " << summary.written << " maps ("
              << summary.excluded << " excluded, cap "
              << summary.normalization_cap << ") to " << prep_out << "\n";
    return 0;
  }

  if (cmd_train_vae->parsed()) {
    const auto maps = load_maps_dir(vae_maps_dir);
    vae_cfg.seed = derive_seed(seed, "vae");
    vae::TrainingLog log;
    const vae::VaeModel model =
        vae::train_vae(map_pointers(maps), vae_cfg, &log);
    vae::save_model(model, vae_out);
    std::cout << "train-vae: " << maps.size() << " maps, first-epoch loss "
              << log.epoch_mean_loss.front() << ", final "
              << log.epoch_mean_loss.back() << ", checkpoint " << vae_out
              << "\n";
    return 0;
  }

  if (cmd_encode->parsed()) {
    const auto maps = load_maps_dir(enc_maps_dir);
    const vae::VaeModel model = vae::load_model(enc_model);
    const auto codes = vae::encode_all(model, map_pointers(maps));
    std::vector<std::string> ids;
    for (const auto& map : maps) ids.push_back(map.participant_id);
    vae::write_latent_csv(ids, codes, enc_out);
    std::cout << "encode: " << codes.size() << " codes to " << enc_out << "\n";
    return 0;
  }

  if (cmd_traverse->parsed()) {
    const auto maps = load_maps_dir(trav_maps_dir);
    const vae::VaeModel model = vae::load_model(trav_model);
    const std::size_t base_index = pipeline::median_activity_index(maps);
    const vae::LatentCode base = vae::encode(model, maps[base_index]);
    vae::render_traversal_grid(model, base, static_cast<float>(trav_lo),
                               static_cast<float>(trav_hi), trav_steps,
                               trav_out);
    std::cout << "traverse: base " << maps[base_index].participant_id
              << ", grid " << model.cfg.latent_dim << "x" << trav_steps
              << " to " << trav_out << "\n";
    return 0;
  }

  if (cmd_generate->parsed()) {
    const vae::VaeModel model = vae::load_model(gen_model);
    const auto latent_rows = vae::read_latent_csv(gen_latents);
    std::map<std::string, labels::Outcome> outcome_by_id;
    for (const auto& [id, outcome] : labels::read_labels_csv(gen_labels)) {
      outcome_by_id[id] = outcome;
    }
    std::vector<std::pair<vae::LatentCode, BinaryClass>> labeled_codes;
    for (const auto& [id, code] : latent_rows) {
      const auto it = outcome_by_id.find(id);
      if (it == outcome_by_id.end()) continue;
      if (it->second == labels::Outcome::Ineligible) continue;
      labeled_codes.emplace_back(code,
                                 it->second == labels::Outcome::Unhealthy
                                     ? BinaryClass::Unhealthy
                                     : BinaryClass::Healthy);
    }
    const auto stats = vae::fit_class_stats(labeled_codes);
    std::vector<vae::LabeledMap> synthetic;
    for (const auto& [label, class_stats] : stats) {
      const auto batch =
          vae::generate(model, class_stats, gen_per_class,
                        derive_seed(seed, std::string("generate.") +
                                              binary_class_name(label)));
      synthetic.insert(synthetic.end(), batch.begin(), batch.end());
    }
    write_synthetic_set(synthetic, gen_out);
    std::cout << "generate: " << synthetic.size() << " synthetic maps to "
              << gen_out << "\n";
    return 0;
  }

  if (cmd_train_cnn->parsed()) {
    const auto maps = load_maps_dir(cnn_maps_dir);
    std::map<std::string, labels::Outcome> outcome_by_id;
    for (const auto& [id, outcome] : labels::read_labels_csv(cnn_labels)) {
      outcome_by_id[id] = outcome;
    }
    std::vector<cnnlstm::LabeledMapRef> examples;
    for (const auto& map : maps) {
      const auto it = outcome_by_id.find(map.participant_id);
      if (it == outcome_by_id.end() ||
          it->second == labels::Outcome::Ineligible) {
        continue;
      }
      examples.emplace_back(&map, it->second == labels::Outcome::Unhealthy
                                      ? BinaryClass::Unhealthy
                                      : BinaryClass::Healthy);
    }
    cnn_cfg.seed = derive_seed(seed, "cnnlstm");
    cnnlstm::TrainResult result;
    std::vector<vae::LabeledMap> synthetic;
    if (!cnn_synth_dir.empty()) {
      synthetic = load_synthetic_set(cnn_synth_dir);
      std::vector<const vae::LabeledMap*> ptrs;
      for (const auto& labeled : synthetic) ptrs.push_back(&labeled);
      result = cnnlstm::train_with_augmentation(examples, ptrs, cnn_cfg);
    } else {
      result = cnnlstm::train_cnnlstm(examples, cnn_cfg);
    }
    cnnlstm::save_model(result.model, cnn_out);
    std::cout << "train-cnnlstm: " << examples.size() << " real + "
              << synthetic.size() << " synthetic maps, final BCE "
              << result.epoch_train_bce.back() << ", checkpoint " << cnn_out
              << "\n";
    return 0;
  }

  if (cmd_labels->parsed()) {
    const auto records = ingest::parse_survey_csv(lab_survey);
    const auto id = labels::experiment_from_string(experiment_id);
    const auto spec = labels::ExperimentSpec::make(id);
    std::vector<std::pair<std::string, labels::Outcome>> rows;
    for (const auto& record : records) {
      rows.emplace_back(record.participant_id,
                        labels::assign_label(record, spec));
    }
    labels::write_labels_csv(rows, id, lab_out);
    std::cout << "labels: " << rows.size() << " rows to " << lab_out << "\n";
    return 0;
  }

  if (cmd_evaluate->parsed()) {
    const auto maps = load_maps_dir(eval_maps_dir);
    const auto surveys = survey_index(eval_survey);
    const auto kind = eval::model_kind_from_string(eval_kind);
    const auto spec = labels::ExperimentSpec::make(
        labels::experiment_from_string(eval_experiment));

    std::map<std::string, vae::LatentCode> codes_by_id;
    if (kind == eval::ModelKind::VaeLr) {
      require(!eval_latents.empty(), ErrorCode::UsageError,
              "vae_lr needs --latents");
      for (auto& [id, code] : vae::read_latent_csv(eval_latents)) {
        codes_by_id.emplace(id, std::move(code));
      }
    }

    eval::Dataset dataset;
    std::vector<vae::LabeledMap> synthetic;
    if (kind == eval::ModelKind::CnnLstmAug) {
      require(!eval_synth_dir.empty(), ErrorCode::UsageError,
              "cnnlstm_aug needs --synthetic");
      synthetic = load_synthetic_set(eval_synth_dir);
      for (const auto& labeled : synthetic) {
        dataset.synthetic.push_back(&labeled);
      }
    }
    for (const auto& map : maps) {
      const auto survey_it = surveys.find(map.participant_id);
      if (survey_it == surveys.end()) continue;
      const labels::Outcome outcome =
          labels::assign_label(survey_it->second, spec);
      if (outcome == labels::Outcome::Ineligible) continue;
      eval::Participant participant;
      participant.id = map.participant_id;
      participant.label = outcome == labels::Outcome::Unhealthy
                              ? BinaryClass::Unhealthy
                              : BinaryClass::Healthy;
      participant.map = &map;
      if (kind == eval::ModelKind::VaeLr) {
        const auto code_it = codes_by_id.find(map.participant_id);
        if (code_it == codes_by_id.end()) continue;
        participant.features =
            labels::raw_features(code_it->second, survey_it->second, spec);
      }
      dataset.participants.push_back(std::move(participant));
    }

    protocol.seed = derive_seed(seed, "eval");
    eval_cnn_cfg.seed = derive_seed(seed, "eval.cnnlstm");
    const eval::EvalReport report = eval::run_experiment(
        kind, eval_experiment, dataset, protocol, eval_cnn_cfg);
    eval::write_report(report, eval_out);
    const std::string table = eval::format_report_table({report});
    if (!eval_table.empty()) {
      std::ofstream table_out(eval_table);
      require(table_out.good(), ErrorCode::IoError,
              "cannot open " + eval_table);
      table_out << table;
    }
    std::cout << table;
    std::cout << "evaluate: report " << eval_out << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  } catch (const std::exception& error) {
    std::cerr << "error: IoError: " << error.what() << "\n";
    return 1;
  }
}
