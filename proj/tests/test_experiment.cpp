#include "scoregan/experiment.hpp"

#include <nlohmann/json.hpp>

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

using namespace scoregan;

namespace {

TrainConfig tiny_base() {
  TrainConfig c;
  c.seed = 11;
  c.t_len = 10;
  c.synth_vocab = 30;
  c.synth_size = 120;
  c.synth_fraud_fraction = 0.4;
  c.synth_min_tokens = 3;
  c.synth_max_tokens = 6;
  c.gen_embed_dim = 6;
  c.gen_hidden_dim = 6;
  c.noise_dim = 2;
  c.score_embed_dim = 3;
  c.batch_gen = 3;
  c.pretrain_gen_epochs = 1;
  c.disc_windows = {1};
  c.disc_filters = {4};
  c.embed_dim = 6;
  c.lr_disc = 0.1;
  c.batch_disc = 6;
  c.pretrain_disc_steps = 1;
  c.disc_steps_per_epoch = 1;
  c.outer_iters = 1;
  c.gen_inner = 1;
  c.disc_inner = 1;
  c.rollouts = 1;
  c.igm_batch = 2;
  c.fb_pool = 8;
  return c;
}

std::set<std::string> differing_keys(const TrainConfig& a, const TrainConfig& b) {
  nlohmann::json ja = config_to_json(a);
  nlohmann::json jb = config_to_json(b);
  std::set<std::string> keys;
  for (auto it = ja.begin(); it != ja.end(); ++it) {
    if (jb.at(it.key()) != it.value()) keys.insert(it.key());
  }
  return keys;
}

}  // namespace

TEST_CASE("experiment grids have the documented cell counts") {
  TrainConfig base = tiny_base();
  CHECK(experiment_cells(ExperimentKind::AblationScore, base).size() == 4);
  CHECK(experiment_cells(ExperimentKind::BehavioralCombos, base).size() == 6);
  CHECK(experiment_cells(ExperimentKind::RegularizationConvergence, base).size() == 2);
  CHECK(experiment_cells(ExperimentKind::SupervisionSweep, base).size() == 4);
  CHECK(experiment_cells(ExperimentKind::CrossDataset, base).size() == 4);
  CHECK(experiment_cells(ExperimentKind::GeneratedVsHumanOnly, base).size() == 2);
}

TEST_CASE("cells differ from the base only in their grid variables") {
  TrainConfig base = tiny_base();
  const std::map<ExperimentKind, std::set<std::string>> allowed = {
      {ExperimentKind::AblationScore, {"score_in_g", "score_in_d", "regularizer_on"}},
      {ExperimentKind::BehavioralCombos, {"score_in_d", "features"}},
      {ExperimentKind::RegularizationConvergence, {"regularizer_on"}},
      {ExperimentKind::SupervisionSweep, {"supervision"}},
      {ExperimentKind::CrossDataset, {}},
      {ExperimentKind::GeneratedVsHumanOnly, {"augment_with_generated"}},
  };
  for (const auto& [kind, keys] : allowed) {
    for (const ExperimentCell& cell : experiment_cells(kind, base)) {
      for (const std::string& k : differing_keys(base, cell.config)) {
        CHECK(keys.count(k) == 1);
      }
    }
  }
}

TEST_CASE("experiment kind names round-trip; unknown kinds rejected") {
  for (ExperimentKind kind :
       {ExperimentKind::AblationScore, ExperimentKind::BehavioralCombos,
        ExperimentKind::RegularizationConvergence, ExperimentKind::SupervisionSweep,
        ExperimentKind::CrossDataset, ExperimentKind::GeneratedVsHumanOnly}) {
    CHECK(experiment_kind_from_name(experiment_name(kind)) == kind);
  }
  CHECK_THROWS_AS(experiment_kind_from_name("nope"), ArgumentError);
}

TEST_CASE("supervision sweep emits exactly 4 rows per seed with matched seeds") {
  TrainConfig base = tiny_base();
  SynthSpec spec;
  spec.vocab_size = base.synth_vocab;
  spec.size = base.synth_size;
  spec.fraud_fraction = base.synth_fraud_fraction;
  spec.min_tokens = base.synth_min_tokens;
  spec.max_tokens = base.synth_max_tokens;
  auto corpus = synth_corpus(spec, 55);

  const int n_seeds = 2;
  ExperimentReport report =
      run_experiment(ExperimentKind::SupervisionSweep, base, corpus, n_seeds, "synthetic");
  CHECK(report.rows.size() == 4 * n_seeds);

  std::map<std::string, std::set<std::uint64_t>> seeds_per_cell;
  for (const ExperimentRow& row : report.rows) {
    CHECK(row.experiment == "supervision-sweep");
    CHECK(row.ap >= 0.0);
    CHECK(row.ap <= 1.0);
    CHECK(row.auc >= 0.0);
    CHECK(row.auc <= 1.0);
    seeds_per_cell[row.cell].insert(row.seed);
  }
  // Matched seeds: every cell ran the same seed list.
  std::set<std::uint64_t> reference = seeds_per_cell.begin()->second;
  for (const auto& [cell, seeds] : seeds_per_cell) CHECK(seeds == reference);

  std::string report_path = "/tmp/scoregan_test_report.csv";
  std::string trace_path = "/tmp/scoregan_test_trace.csv";
  write_report_csv(report, report_path);
  write_trace_csv(report, "supervision-sweep", trace_path);
  std::ifstream in(report_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "experiment,dataset,seed,cell,ap,auc,accuracy,iterations_to_converge");
  std::size_t lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == report.rows.size());
  std::remove(report_path.c_str());
  std::remove(trace_path.c_str());
}
