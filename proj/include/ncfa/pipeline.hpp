#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncfa/ecc.hpp"
#include "ncfa/graph.hpp"
#include "ncfa/indep.hpp"
#include "ncfa/synth.hpp"
#include "ncfa/vae.hpp"

namespace ncfa::pipeline {

struct RunConfig {
  double alpha = 0.05;
  long long lambda = 0;  // 0 = default floor(n^2/4); always clamped to >= K
  indep::TestMethod method = indep::TestMethod::dcov;
  ecc::Mode solver = ecc::Mode::automatic;
  int exact_cap = ecc::kDefaultExactCap;
  vae::TrainConfig train;
  std::uint64_t seed = 0;
};

struct RunReport {
  UndirectedGraph udg;
  CliqueCover cover;  // solver cliques plus singletons for isolated vertices
  MCMGraph mcm;
  NCFAGraph ncfa;
  int causal_dof = 0;  // K = |L|, rows of the MCM biadjacency
  long long lambda_requested = 0;
  long long lambda_used = 0;
  std::string solver_path;
  bool solver_certified = false;
  long long solver_nodes = 0;
  std::vector<std::string> warnings;
  std::vector<int> degenerate_columns;
  vae::VAEParams model;
  vae::TrainTrace ncfa_trace;
  vae::TrainTrace baseline_trace;
  double training_delta = 0.0;    // baseline - NCFA at the final epoch
  double validation_delta = 0.0;
  bool has_truth = false;
  long long sfd_to_truth = 0;
  long long shd_to_truth = 0;
  bool exact_recovery = false;  // SFD to the true MCM structure is zero
};

/// Full algorithm: estimate the UDG, cover it, allocate latents, train the
/// masked VAE and the fully connected baseline with the same seed.
RunReport run_ncfa(const indep::SampleMatrix& sample, const RunConfig& config,
                   const synth::GroundTruth* truth = nullptr);

/// Writes udg.json, mcm.json, ncfa.json, model.json, trace.csv,
/// baseline_trace.csv, and report.json under out_dir.
void write_run_artifacts(const RunReport& report, const RunConfig& config,
                         const std::string& out_dir);

struct Deltas {
  double training_delta = 0.0;
  double validation_delta = 0.0;
  std::vector<double> per_epoch_train;
  std::vector<double> per_epoch_val;
};

/// Delta = other - ncfa, per epoch and at the final epoch; positive values
/// favor the NCFA model.
Deltas compute_deltas(const vae::TrainTrace& ncfa_trace,
                      const vae::TrainTrace& other_trace);

struct SweepConfig {
  int n = 10;
  std::vector<double> densities;
  int graphs_per_density = 10;
  int datasets_per_graph = 10;
  int sample_size = 1000;
  RunConfig run;
  int workers = 0;  // 0 = hardware concurrency
};

struct SweepRow {
  double density = 0.0;
  int graph_rep = 0;
  int dataset_rep = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  long long realized_edges = 0;
  int k_true = 0;
  int k_learned = 0;
  long long sfd_to_truth = 0;
  long long shd_udg = 0;
  bool exact_recovery = false;
  double ncfa_train = 0.0, ncfa_val = 0.0;
  double baseline_train = 0.0, baseline_val = 0.0;
  double truth_train = 0.0, truth_val = 0.0;
  double delta_train_baseline = 0.0, delta_val_baseline = 0.0;
  double delta_train_truth = 0.0, delta_val_truth = 0.0;
};

/// Synthetic protocol: per density, sample ground-truth UDGs with exact edge
/// counts, derive MCM structures via the exact solver, draw datasets, and
/// compare NCFA against the baseline VAE and the truth-given NCFA model
/// (lambda equal to the true latent count). Replicates run in parallel with
/// per-run derived seeds; failures are recorded and the sweep continues.
std::vector<SweepRow> run_synthetic_experiment(const SweepConfig& config);

/// Long-format CSV (density,graph,dataset,seed,metric,value) for box plots.
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace ncfa::pipeline
