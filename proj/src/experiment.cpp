#include "scoregan/experiment.hpp"

#include <algorithm>
#include <fstream>

namespace scoregan {

ExperimentKind experiment_kind_from_name(const std::string& name) {
  if (name == "ablation-score") return ExperimentKind::AblationScore;
  if (name == "behavioral-combos") return ExperimentKind::BehavioralCombos;
  if (name == "regularization-convergence") return ExperimentKind::RegularizationConvergence;
  if (name == "supervision-sweep") return ExperimentKind::SupervisionSweep;
  if (name == "cross-dataset") return ExperimentKind::CrossDataset;
  if (name == "generated-vs-human-only") return ExperimentKind::GeneratedVsHumanOnly;
  throw ArgumentError("unknown experiment kind: \"" + name + "\"");
}

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::AblationScore: return "ablation-score";
    case ExperimentKind::BehavioralCombos: return "behavioral-combos";
    case ExperimentKind::RegularizationConvergence: return "regularization-convergence";
    case ExperimentKind::SupervisionSweep: return "supervision-sweep";
    case ExperimentKind::CrossDataset: return "cross-dataset";
    case ExperimentKind::GeneratedVsHumanOnly: return "generated-vs-human-only";
  }
  return "";
}

std::vector<ExperimentCell> experiment_cells(ExperimentKind kind, const TrainConfig& base) {
  std::vector<ExperimentCell> cells;
  switch (kind) {
    case ExperimentKind::AblationScore: {
      // Removing the score from the generator also removes the regularization
      // term, which is how the generator loses its constraint.
      for (bool in_g : {false, true}) {
        for (bool in_d : {false, true}) {
          ExperimentCell cell;
          cell.config = base;
          cell.config.ablation.score_in_g = in_g;
          cell.config.ablation.regularizer_on = in_g && base.ablation.regularizer_on;
          cell.config.ablation.score_in_d = in_d;
          cell.id = std::string("score_in_g=") + (in_g ? "on" : "off") +
                    ";score_in_d=" + (in_d ? "on" : "off");
          cells.push_back(std::move(cell));
        }
      }
      break;
    }
    case ExperimentKind::BehavioralCombos: {
      struct Combo {
        const char* id;
        bool score, mnr, rl, se, sr;
      };
      const Combo combos[] = {
          {"features=we", false, false, false, false, false},
          {"features=we+score", true, false, false, false, false},
          {"features=we+score+mnr", true, true, false, false, false},
          {"features=we+score+rl", true, false, true, false, false},
          {"features=we+score+se", true, false, false, true, false},
          {"features=we+score+sr", true, false, false, false, true},
      };
      for (const Combo& combo : combos) {
        ExperimentCell cell;
        cell.config = base;
        cell.config.ablation.score_in_d = combo.score;
        cell.config.behavioral.mnr = combo.mnr;
        cell.config.behavioral.rl = combo.rl;
        cell.config.behavioral.se = combo.se;
        cell.config.behavioral.sr = combo.sr;
        cell.id = combo.id;
        cells.push_back(std::move(cell));
      }
      break;
    }
    case ExperimentKind::RegularizationConvergence: {
      for (bool on : {true, false}) {
        ExperimentCell cell;
        cell.config = base;
        cell.config.ablation.regularizer_on = on;
        cell.id = std::string("regularizer=") + (on ? "on" : "off");
        cells.push_back(std::move(cell));
      }
      break;
    }
    case ExperimentKind::SupervisionSweep: {
      for (Scalar ratio : {0.1, 0.3, 0.5, 0.7}) {
        ExperimentCell cell;
        cell.config = base;
        cell.config.supervision = ratio;
        cell.id = "supervision=" + std::to_string(ratio).substr(0, 3);
        cells.push_back(std::move(cell));
      }
      break;
    }
    case ExperimentKind::CrossDataset: {
      for (int count : {250, 500, 1000, 2000}) {
        ExperimentCell cell;
        cell.config = base;
        cell.subsample = count;
        cell.id = "samples=" + std::to_string(count);
        cells.push_back(std::move(cell));
      }
      break;
    }
    case ExperimentKind::GeneratedVsHumanOnly: {
      for (bool aug : {true, false}) {
        ExperimentCell cell;
        cell.config = base;
        cell.config.augment_with_generated = aug;
        cell.id = std::string("negatives=") + (aug ? "human+generated" : "human-only");
        cells.push_back(std::move(cell));
      }
      break;
    }
  }
  return cells;
}

namespace {

/// Stratified subsample of `count` reviews, deterministic per seed.
std::vector<Review> subsample(const std::vector<Review>& corpus, int count,
                              std::uint64_t seed) {
  if (count <= 0 || count >= static_cast<int>(corpus.size())) return corpus;
  Scalar ratio = static_cast<Scalar>(count) / static_cast<Scalar>(corpus.size());
  return split_corpus(corpus, ratio, seed).first;
}

}  // namespace

ExperimentReport run_experiment(ExperimentKind kind, const TrainConfig& base,
                                const std::vector<Review>& corpus, int n_seeds,
                                const std::string& dataset_name) {
  if (n_seeds < 1) throw ArgumentError("run_experiment: need at least one seed");
  ExperimentReport report;
  for (const ExperimentCell& cell : experiment_cells(kind, base)) {
    for (int s = 0; s < n_seeds; ++s) {
      TrainConfig config = cell.config;
      config.seed = base.seed + static_cast<std::uint64_t>(s);
      std::vector<Review> data =
          cell.subsample > 0 ? subsample(corpus, cell.subsample, config.seed) : corpus;
      TrainResult result = adversarial_train(config, data);

      ExperimentRow row;
      row.experiment = experiment_name(kind);
      row.dataset = dataset_name;
      row.seed = config.seed;
      row.cell = cell.id;
      const MetricsReport& last = result.history.back();
      row.ap = last.ap;
      row.auc = last.auc;
      row.accuracy = last.accuracy;
      row.iterations_to_converge = -1;
      for (const MetricsReport& r : result.history) {
        if (r.auc >= config.auc_target) {
          row.iterations_to_converge = r.iteration;
          break;
        }
      }
      report.rows.push_back(row);

      for (const MetricsReport& r : result.history) {
        report.traces.push_back(TraceRow{cell.id, config.seed, r.iteration, r.ap, r.auc, r.accuracy});
      }
    }
  }
  return report;
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open report file: " + path);
  out << "experiment,dataset,seed,cell,ap,auc,accuracy,iterations_to_converge\n";
  for (const ExperimentRow& r : report.rows) {
    out << r.experiment << ',' << r.dataset << ',' << r.seed << ',' << r.cell << ','
        << r.ap << ',' << r.auc << ',' << r.accuracy << ',' << r.iterations_to_converge
        << '\n';
  }
}

void write_trace_csv(const ExperimentReport& report, const std::string& experiment,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open trace file: " + path);
  out << "experiment,cell,seed,iteration,ap,auc,accuracy\n";
  for (const TraceRow& t : report.traces) {
    out << experiment << ',' << t.cell << ',' << t.seed << ',' << t.iteration << ','
        << t.ap << ',' << t.auc << ',' << t.accuracy << '\n';
  }
}

}  // namespace scoregan
