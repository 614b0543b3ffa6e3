#include "ncfa/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <sstream>
#include <thread>

#include "ncfa/io.hpp"
#include "ncfa/rng.hpp"

namespace ncfa::pipeline {

namespace {

// seed stream tags
constexpr std::uint64_t kTagUdg = 11;
constexpr std::uint64_t kTagEcc = 12;
constexpr std::uint64_t kTagVae = 13;

}  // namespace

RunReport run_ncfa(const indep::SampleMatrix& sample, const RunConfig& config,
                   const synth::GroundTruth* truth) {
  RunReport report;

  const indep::UdgEstimate est =
      indep::estimate_udg(sample, config.alpha, config.method,
                          derive_seed(config.seed, kTagUdg));
  report.udg = est.graph;
  report.degenerate_columns = est.degenerate_columns;
  for (int c : est.degenerate_columns)
    report.warnings.push_back("column " + std::to_string(c) +
                              " is constant; no edges attached");

  ecc::Solution sol = ecc::solve(report.udg, config.solver,
                                 derive_seed(config.seed, kTagEcc),
                                 config.exact_cap);
  if (!sol.fallback.empty()) report.warnings.push_back(sol.fallback);
  report.solver_path = ecc::to_string(sol.solver);
  report.solver_certified = sol.is_certified_minimum;
  report.solver_nodes = sol.nodes_expanded;

  report.cover = add_singleton_cliques(sol.cover, report.udg);
  report.mcm = mcm_from_cover(report.cover);
  report.causal_dof = report.mcm.latent_count();

  report.lambda_requested =
      config.lambda > 0 ? config.lambda : default_lambda(sample.n());
  report.ncfa = assign_latents(report.mcm, report.lambda_requested);
  report.lambda_used = report.ncfa.lambda;
  if (report.lambda_used != report.lambda_requested)
    report.warnings.push_back(
        "lambda clamped from " + std::to_string(report.lambda_requested) +
        " to " + std::to_string(report.lambda_used) +
        " so every clique keeps at least one latent");

  vae::TrainConfig tc = config.train;
  tc.seed = derive_seed(config.seed, kTagVae);
  auto [params, trace] = vae::train(report.ncfa, sample, tc);
  report.model = std::move(params);
  report.ncfa_trace = std::move(trace);

  auto [base_params, base_trace] =
      vae::baseline_vae(sample.n(), report.lambda_used, sample, tc);
  report.baseline_trace = std::move(base_trace);

  const Deltas d = compute_deltas(report.ncfa_trace, report.baseline_trace);
  report.training_delta = d.training_delta;
  report.validation_delta = d.validation_delta;

  if (truth) {
    report.has_truth = true;
    report.sfd_to_truth = sfd(report.mcm, truth->mcm);
    report.shd_to_truth = shd(report.udg, truth->udg);
    report.exact_recovery = report.sfd_to_truth == 0;
  }
  return report;
}

namespace {

io::json report_to_json(const RunReport& r, const RunConfig& config) {
  io::json j;
  j["alpha"] = config.alpha;
  j["method"] = indep::to_string(config.method);
  j["seed"] = config.seed;
  j["lambda_requested"] = r.lambda_requested;
  j["lambda_used"] = r.lambda_used;
  j["causal_dof"] = r.causal_dof;
  j["solver"] = {{"mode", ecc::to_string(config.solver)},
                 {"path", r.solver_path},
                 {"certified_minimum", r.solver_certified},
                 {"nodes_expanded", r.solver_nodes}};
  j["warnings"] = r.warnings;
  j["degenerate_columns"] = r.degenerate_columns;
  j["udg"] = io::udg_to_json(r.udg);
  io::json cover = io::json::array();
  for (const auto& c : r.cover.cliques) cover.push_back(c);
  j["cover"] = std::move(cover);
  j["multiplicities"] = r.ncfa.multiplicities;
  j["ncfa_final_train"] = r.ncfa_trace.final_train();
  j["ncfa_final_val"] = r.ncfa_trace.final_val();
  j["baseline_final_train"] = r.baseline_trace.final_train();
  j["baseline_final_val"] = r.baseline_trace.final_val();
  j["training_delta"] = r.training_delta;
  j["validation_delta"] = r.validation_delta;
  if (r.has_truth) {
    j["sfd_to_truth"] = r.sfd_to_truth;
    j["shd_to_truth"] = r.shd_to_truth;
    j["exact_recovery"] = r.exact_recovery;
  }
  return j;
}

}  // namespace

void write_run_artifacts(const RunReport& report, const RunConfig& config,
                         const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  vae::TrainConfig tc = config.train;
  tc.seed = derive_seed(config.seed, kTagVae);
  io::write_json_file((dir / "udg.json").string(), io::udg_to_json(report.udg));
  io::write_json_file((dir / "mcm.json").string(), io::mcm_to_json(report.mcm));
  io::write_json_file((dir / "ncfa.json").string(), io::ncfa_to_json(report.ncfa));
  io::write_json_file((dir / "model.json").string(),
                      io::model_to_json(report.model, tc));
  io::write_trace_csv((dir / "trace.csv").string(), report.ncfa_trace);
  io::write_trace_csv((dir / "baseline_trace.csv").string(),
                      report.baseline_trace);
  io::write_json_file((dir / "report.json").string(),
                      report_to_json(report, config));
}

Deltas compute_deltas(const vae::TrainTrace& ncfa_trace,
                      const vae::TrainTrace& other_trace) {
  if (ncfa_trace.train_loss.size() != other_trace.train_loss.size() ||
      ncfa_trace.val_loss.size() != other_trace.val_loss.size())
    throw std::invalid_argument("trace epoch counts differ");
  if (ncfa_trace.train_loss.empty())
    throw std::invalid_argument("empty traces");
  Deltas d;
  d.per_epoch_train.reserve(ncfa_trace.train_loss.size());
  d.per_epoch_val.reserve(ncfa_trace.val_loss.size());
  for (std::size_t e = 0; e < ncfa_trace.train_loss.size(); ++e) {
    d.per_epoch_train.push_back(other_trace.train_loss[e] - ncfa_trace.train_loss[e]);
    d.per_epoch_val.push_back(other_trace.val_loss[e] - ncfa_trace.val_loss[e]);
  }
  d.training_delta = d.per_epoch_train.back();
  d.validation_delta = d.per_epoch_val.back();
  return d;
}

namespace {

SweepRow run_one(const SweepConfig& config, double density, int graph_rep,
                 int dataset_rep, std::uint64_t run_seed) {
  SweepRow row;
  row.density = density;
  row.graph_rep = graph_rep;
  row.dataset_rep = dataset_rep;
  row.seed = run_seed;

  const UndirectedGraph udg =
      synth::sample_er_udg(config.n, density, derive_seed(run_seed, 1));
  row.realized_edges = udg.edge_count();
  const synth::GroundTruth gt = synth::make_ground_truth(
      udg, derive_seed(run_seed, 2), ecc::Mode::exact, config.run.exact_cap);
  row.k_true = gt.mcm.latent_count();

  const indep::SampleMatrix data =
      synth::sample_dataset(gt, config.sample_size, derive_seed(run_seed, 3));

  RunConfig rc = config.run;
  rc.seed = derive_seed(run_seed, 4);
  const RunReport report = run_ncfa(data, rc, &gt);

  row.k_learned = report.causal_dof;
  row.sfd_to_truth = report.sfd_to_truth;
  row.shd_udg = report.shd_to_truth;
  row.exact_recovery = report.exact_recovery;
  row.ncfa_train = report.ncfa_trace.final_train();
  row.ncfa_val = report.ncfa_trace.final_val();
  row.baseline_train = report.baseline_trace.final_train();
  row.baseline_val = report.baseline_trace.final_val();
  row.delta_train_baseline = report.training_delta;
  row.delta_val_baseline = report.validation_delta;

  // the truth-given model: true structure, lambda equal to the true number
  // of causal latent factors
  vae::TrainConfig tc = rc.train;
  tc.seed = derive_seed(rc.seed, kTagVae);
  const NCFAGraph truth_graph = assign_latents(gt.mcm, gt.mcm.latent_count());
  auto [truth_params, truth_trace] = vae::train(truth_graph, data, tc);
  row.truth_train = truth_trace.final_train();
  row.truth_val = truth_trace.final_val();
  const Deltas dt = compute_deltas(report.ncfa_trace, truth_trace);
  row.delta_train_truth = dt.training_delta;
  row.delta_val_truth = dt.validation_delta;
  return row;
}

}  // namespace

std::vector<SweepRow> run_synthetic_experiment(const SweepConfig& config) {
  struct Task {
    double density;
    int graph_rep;
    int dataset_rep;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t di = 0; di < config.densities.size(); ++di) {
    for (int g = 0; g < config.graphs_per_density; ++g) {
      const std::uint64_t graph_seed = derive_seed(
          derive_seed(config.run.seed, static_cast<std::uint64_t>(di)),
          static_cast<std::uint64_t>(g));
      for (int d = 0; d < config.datasets_per_graph; ++d) {
        tasks.push_back({config.densities[di], g, d,
                         derive_seed(graph_seed, static_cast<std::uint64_t>(d))});
      }
    }
  }

  std::vector<SweepRow> rows(tasks.size());
  const unsigned workers =
      config.workers > 0
          ? static_cast<unsigned>(config.workers)
          : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      try {
        rows[i] = run_one(config, t.density, t.graph_rep, t.dataset_rep, t.seed);
      } catch (const std::exception& ex) {
        rows[i].density = t.density;
        rows[i].graph_rep = t.graph_rep;
        rows[i].dataset_rep = t.dataset_rep;
        rows[i].seed = t.seed;
        rows[i].failed = true;
        rows[i].error = ex.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers && w < tasks.size(); ++w)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ostringstream out;
  out << "density,graph,dataset,seed,metric,value\n";
  auto emit = [&](const SweepRow& r, const char* metric, double value) {
    out << io::format_double(r.density) << ',' << r.graph_rep << ','
        << r.dataset_rep << ',' << r.seed << ',' << metric << ','
        << io::format_double(value) << '\n';
  };
  for (const auto& r : rows) {
    if (r.failed) {
      emit(r, "failed", 1.0);
      continue;
    }
    emit(r, "edges", static_cast<double>(r.realized_edges));
    emit(r, "k_true", r.k_true);
    emit(r, "k_learned", r.k_learned);
    emit(r, "sfd", static_cast<double>(r.sfd_to_truth));
    emit(r, "shd", static_cast<double>(r.shd_udg));
    emit(r, "exact_recovery", r.exact_recovery ? 1.0 : 0.0);
    emit(r, "ncfa_train", r.ncfa_train);
    emit(r, "ncfa_val", r.ncfa_val);
    emit(r, "baseline_train", r.baseline_train);
    emit(r, "baseline_val", r.baseline_val);
    emit(r, "truth_train", r.truth_train);
    emit(r, "truth_val", r.truth_val);
    emit(r, "delta_train_baseline", r.delta_train_baseline);
    emit(r, "delta_val_baseline", r.delta_val_baseline);
    emit(r, "delta_train_truth", r.delta_train_truth);
    emit(r, "delta_val_truth", r.delta_val_truth);
  }
  io::write_text_file(path, out.str());
}

}  // namespace ncfa::pipeline
