#pragma once

#include "scoregan/config.hpp"
#include "scoregan/corpus.hpp"
#include "scoregan/trainer.hpp"

#include <string>
#include <vector>

namespace scoregan {

enum class ExperimentKind {
  AblationScore,
  BehavioralCombos,
  RegularizationConvergence,
  SupervisionSweep,
  CrossDataset,
  GeneratedVsHumanOnly,
};

ExperimentKind experiment_kind_from_name(const std::string& name);
const char* experiment_name(ExperimentKind kind);

struct ExperimentCell {
  std::string id;  // flattened grid parameters, e.g. "score_in_g=on;score_in_d=off"
  TrainConfig config;
  int subsample = 0;  // cross-dataset sample count, 0 = whole corpus
};

/// The grid for one experiment kind; every cell starts from the base config
/// and changes only its grid variable(s).
std::vector<ExperimentCell> experiment_cells(ExperimentKind kind, const TrainConfig& base);

struct ExperimentRow {
  std::string experiment;
  std::string dataset;
  std::uint64_t seed = 0;
  std::string cell;
  Scalar ap = 0.0, auc = 0.0, accuracy = 0.0;
  int iterations_to_converge = -1;  // -1 when the target was never reached
};

struct TraceRow {
  std::string cell;
  std::uint64_t seed = 0;
  int iteration = 0;
  Scalar ap = 0.0, auc = 0.0, accuracy = 0.0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  std::vector<TraceRow> traces;
};

/// Runs every cell with matched seeds (base.seed, base.seed + 1, ...) and
/// collects final metrics plus per-iteration traces.
ExperimentReport run_experiment(ExperimentKind kind, const TrainConfig& base,
                                const std::vector<Review>& corpus, int n_seeds,
                                const std::string& dataset_name);

/// report.csv: experiment,dataset,seed,cell,ap,auc,accuracy,iterations_to_converge
void write_report_csv(const ExperimentReport& report, const std::string& path);
/// trace.csv: experiment,cell,seed,iteration,ap,auc,accuracy
void write_trace_csv(const ExperimentReport& report, const std::string& experiment,
                     const std::string& path);

}  // namespace scoregan
