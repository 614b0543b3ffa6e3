#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ncfa/ecc.hpp"
#include "ncfa/graph.hpp"
#include "ncfa/indep.hpp"
#include "ncfa/io.hpp"
#include "ncfa/pipeline.hpp"
#include "ncfa/rng.hpp"
#include "ncfa/synth.hpp"
#include "ncfa/vae.hpp"

namespace {

namespace fs = std::filesystem;
using ncfa::io::json;

struct CommonOpts {
  std::string input;
  std::string out = ".";
  double alpha = 0.05;
  long long lambda = 0;
  std::string test = "dcov";
  std::string solver = "auto";
  bool pure_child = false;
  int cap = ncfa::ecc::kDefaultExactCap;
  int epochs = 200;
  double lr = 1e-5;
  double split = 0.7;
  std::uint64_t seed = 0;
  bool no_header = false;
};

void add_data_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--input,-i", o.input, "input CSV file")->required();
  cmd->add_flag("--no-header", o.no_header, "treat the first CSV row as data");
}

void add_train_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--lr", o.lr, "AdamW learning rate");
  cmd->add_option("--split", o.split, "training fraction of the 70/30 split");
  cmd->add_option("--lambda", o.lambda, "latent degrees of freedom (0 = floor(n^2/4))");
}

ncfa::pipeline::RunConfig to_run_config(const CommonOpts& o) {
  ncfa::pipeline::RunConfig rc;
  rc.alpha = o.alpha;
  rc.lambda = o.lambda;
  rc.method = ncfa::indep::method_from_string(o.test);
  rc.solver = o.pure_child ? ncfa::ecc::Mode::pure_child
                           : ncfa::ecc::mode_from_string(o.solver);
  rc.exact_cap = o.cap;
  rc.train.epochs = o.epochs;
  rc.train.learning_rate = o.lr;
  rc.train.split_fraction = o.split;
  rc.seed = o.seed;
  return rc;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Neuro-causal factor analysis: estimate a dependence graph, "
               "cover it with cliques, and train a decoder-masked VAE"};
  app.require_subcommand(1);

  CommonOpts o;

  auto* discover = app.add_subcommand(
      "discover", "estimate the unconditional dependence graph from data");
  add_data_flags(discover, o);
  discover->add_option("--alpha", o.alpha, "test significance level");
  discover->add_option("--test", o.test, "independence test: dcov or xi");
  discover->add_option("--seed", o.seed, "rng seed");
  discover->add_option("--out,-o", o.out, "output directory");

  auto* ecc_cmd = app.add_subcommand(
      "ecc", "edge clique cover of a UDG JSON file");
  std::string graph_path;
  bool enumerate = false;
  ecc_cmd->add_option("--input,-i", graph_path, "UDG JSON file")->required();
  ecc_cmd->add_option("--solver", o.solver, "auto, exact, heuristic, or pure-child");
  ecc_cmd->add_flag("--pure-child", o.pure_child, "use the pure-child fast path");
  ecc_cmd->add_flag("--enumerate", enumerate, "enumerate all minimum covers (exact only)");
  ecc_cmd->add_option("--cap", o.cap, "exact-solver vertex cap");
  ecc_cmd->add_option("--seed", o.seed, "rng seed");
  ecc_cmd->add_option("--out,-o", o.out, "output directory");

  auto* fit = app.add_subcommand("fit", "full pipeline on a CSV sample");
  add_data_flags(fit, o);
  add_train_flags(fit, o);
  fit->add_option("--alpha", o.alpha, "test significance level");
  fit->add_option("--test", o.test, "independence test: dcov or xi");
  fit->add_option("--solver", o.solver, "auto, exact, heuristic, or pure-child");
  fit->add_flag("--pure-child", o.pure_child, "use the pure-child fast path");
  fit->add_option("--cap", o.cap, "exact-solver vertex cap");
  fit->add_option("--seed", o.seed, "rng seed");
  fit->add_option("--out,-o", o.out, "output directory");
  std::string truth_path;
  fit->add_option("--truth", truth_path, "ground truth JSON for recovery metrics");

  auto* baseline = app.add_subcommand(
      "baseline", "train the fully connected reference VAE only");
  add_data_flags(baseline, o);
  add_train_flags(baseline, o);
  baseline->add_option("--seed", o.seed, "rng seed");
  baseline->add_option("--out,-o", o.out, "output directory");

  auto* synth = app.add_subcommand(
      "synth", "generate a ground-truth model and dataset");
  int synth_n = 10, synth_s = 1000;
  double synth_p = 0.2;
  synth->add_option("--n", synth_n, "measurement variables");
  synth->add_option("--p", synth_p, "UDG edge density");
  synth->add_option("--s", synth_s, "observations");
  synth->add_option("--cap", o.cap, "exact-solver vertex cap");
  synth->add_option("--seed", o.seed, "rng seed");
  synth->add_option("--out,-o", o.out, "output directory");

  auto* sweep = app.add_subcommand(
      "sweep", "synthetic experiment over a density grid");
  std::vector<double> densities;
  int graphs_per = 10, datasets_per = 10, sweep_n = 10, sweep_s = 1000, workers = 0;
  sweep->add_option("--n", sweep_n, "measurement variables");
  sweep->add_option("--densities", densities, "edge densities")
      ->delimiter(',')
      ->required();
  sweep->add_option("--graphs", graphs_per, "ground-truth graphs per density");
  sweep->add_option("--datasets", datasets_per, "datasets per graph");
  sweep->add_option("--s", sweep_s, "observations per dataset");
  sweep->add_option("--alpha", o.alpha, "test significance level");
  sweep->add_option("--test", o.test, "independence test: dcov or xi");
  add_train_flags(sweep, o);
  sweep->add_option("--workers", workers, "parallel replicates (0 = all cores)");
  sweep->add_option("--seed", o.seed, "rng seed");
  sweep->add_option("--out,-o", o.out, "output directory");

  auto* metrics = app.add_subcommand(
      "metrics", "SFD/SHD between two graph JSON files");
  std::string path_a, path_b;
  metrics->add_option("--a", path_a, "first graph")->required();
  metrics->add_option("--b", path_b, "second graph")->required();

  CLI11_PARSE(app, argc, argv);

  if (discover->parsed()) {
    const auto sample = ncfa::io::read_csv(o.input, !o.no_header);
    const auto est = ncfa::indep::estimate_udg(
        sample, o.alpha, ncfa::indep::method_from_string(o.test),
        ncfa::derive_seed(o.seed, 11));
    fs::create_directories(o.out);
    ncfa::io::write_json_file((fs::path(o.out) / "udg.json").string(),
                              ncfa::io::udg_to_json(est.graph));
    std::ostringstream tests;
    tests << "i,j,method,statistic,p_value\n";
    for (const auto& t : est.tests)
      tests << t.pair.first << ',' << t.pair.second << ','
            << ncfa::indep::to_string(t.method) << ','
            << ncfa::io::format_double(t.statistic) << ','
            << ncfa::io::format_double(t.p_value) << '\n';
    ncfa::io::write_text_file((fs::path(o.out) / "tests.csv").string(), tests.str());
    std::cout << "n=" << est.graph.n() << " edges=" << est.graph.edge_count()
              << "\n";
    return 0;
  }

  if (ecc_cmd->parsed()) {
    const auto udg = ncfa::io::udg_from_json(ncfa::io::read_json_file(graph_path));
    const auto mode = o.pure_child ? ncfa::ecc::Mode::pure_child
                                   : ncfa::ecc::mode_from_string(o.solver);
    ncfa::ecc::Solution sol;
    std::vector<ncfa::CliqueCover> all;
    if (enumerate) {
      sol = ncfa::ecc::exact_min_ecc(udg, true, o.cap, &all);
    } else {
      sol = ncfa::ecc::solve(udg, mode, ncfa::derive_seed(o.seed, 12), o.cap);
    }
    const auto cover = ncfa::add_singleton_cliques(sol.cover, udg);
    fs::create_directories(o.out);
    if (!cover.cliques.empty())
      ncfa::io::write_json_file((fs::path(o.out) / "mcm.json").string(),
                                ncfa::io::mcm_to_json(mcm_from_cover(cover)));
    json info;
    info["solver"] = ncfa::ecc::to_string(sol.solver);
    info["cover_size"] = sol.cover.size();
    info["certified_minimum"] = sol.is_certified_minimum;
    info["nodes_expanded"] = sol.nodes_expanded;
    if (!sol.fallback.empty()) info["fallback"] = sol.fallback;
    if (enumerate) {
      info["minimum_covers_found"] = sol.minimum_covers_found;
      json covers = json::array();
      for (const auto& c : all) covers.push_back(c.cliques);
      info["minimum_covers"] = std::move(covers);
    }
    ncfa::io::write_json_file((fs::path(o.out) / "ecc.json").string(), info);
    std::cout << ncfa::io::canonical_dump(info);
    return 0;
  }

  if (fit->parsed()) {
    const auto sample = ncfa::io::read_csv(o.input, !o.no_header);
    const auto rc = to_run_config(o);
    ncfa::synth::GroundTruth gt;
    const bool has_truth = !truth_path.empty();
    if (has_truth)
      gt = ncfa::io::ground_truth_from_json(ncfa::io::read_json_file(truth_path));
    const auto report = ncfa::pipeline::run_ncfa(sample, rc, has_truth ? &gt : nullptr);
    ncfa::pipeline::write_run_artifacts(report, rc, o.out);
    std::cout << "K=" << report.causal_dof << " lambda=" << report.lambda_used
              << " train_delta=" << ncfa::io::format_double(report.training_delta)
              << " val_delta=" << ncfa::io::format_double(report.validation_delta)
              << "\n";
    return 0;
  }

  if (baseline->parsed()) {
    const auto sample = ncfa::io::read_csv(o.input, !o.no_header);
    ncfa::vae::TrainConfig tc;
    tc.epochs = o.epochs;
    tc.learning_rate = o.lr;
    tc.split_fraction = o.split;
    tc.seed = ncfa::derive_seed(o.seed, 13);
    const long long lambda =
        o.lambda > 0 ? o.lambda : ncfa::default_lambda(sample.n());
    auto [params, trace] =
        ncfa::vae::baseline_vae(sample.n(), std::max<long long>(lambda, 1), sample, tc);
    fs::create_directories(o.out);
    ncfa::io::write_json_file((fs::path(o.out) / "model.json").string(),
                              ncfa::io::model_to_json(params, tc));
    ncfa::io::write_trace_csv((fs::path(o.out) / "trace.csv").string(), trace);
    std::cout << "final_train=" << ncfa::io::format_double(trace.final_train())
              << " final_val=" << ncfa::io::format_double(trace.final_val())
              << "\n";
    return 0;
  }

  if (synth->parsed()) {
    const auto udg = ncfa::synth::sample_er_udg(synth_n, synth_p,
                                                ncfa::derive_seed(o.seed, 14));
    const auto gt = ncfa::synth::make_ground_truth(
        udg, ncfa::derive_seed(o.seed, 15), ncfa::ecc::Mode::automatic, o.cap);
    const auto data =
        ncfa::synth::sample_dataset(gt, synth_s, ncfa::derive_seed(o.seed, 16));
    fs::create_directories(o.out);
    ncfa::io::write_json_file((fs::path(o.out) / "truth.json").string(),
                              ncfa::io::ground_truth_to_json(gt));
    ncfa::io::write_json_file((fs::path(o.out) / "udg.json").string(),
                              ncfa::io::udg_to_json(gt.udg));
    ncfa::io::write_csv((fs::path(o.out) / "data.csv").string(), data);
    std::cout << "n=" << synth_n << " edges=" << udg.edge_count()
              << " K=" << gt.mcm.latent_count() << " s=" << synth_s << "\n";
    return 0;
  }

  if (sweep->parsed()) {
    ncfa::pipeline::SweepConfig sc;
    sc.n = sweep_n;
    sc.densities = densities;
    sc.graphs_per_density = graphs_per;
    sc.datasets_per_graph = datasets_per;
    sc.sample_size = sweep_s;
    sc.workers = workers;
    sc.run = to_run_config(o);
    const auto rows = ncfa::pipeline::run_synthetic_experiment(sc);
    fs::create_directories(o.out);
    ncfa::pipeline::write_sweep_csv(rows, (fs::path(o.out) / "sweep.csv").string());
    int failures = 0;
    for (const auto& r : rows)
      if (r.failed) ++failures;
    std::cout << "runs=" << rows.size() << " failures=" << failures << "\n";
    return 0;
  }

  if (metrics->parsed()) {
    const json ja = ncfa::io::read_json_file(path_a);
    const json jb = ncfa::io::read_json_file(path_b);
    const bool mcm_a = ja.contains("biadjacency");
    const bool mcm_b = jb.contains("biadjacency");
    if (mcm_a && mcm_b) {
      const auto a = ncfa::io::mcm_from_json(ja);
      const auto b = ncfa::io::mcm_from_json(jb);
      std::cout << "sfd=" << ncfa::sfd(a, b) << "\n"
                << "shd=" << ncfa::shd(udg_of_mcm(a), udg_of_mcm(b)) << "\n";
    } else {
      const auto a = mcm_a ? udg_of_mcm(ncfa::io::mcm_from_json(ja))
                           : ncfa::io::udg_from_json(ja);
      const auto b = mcm_b ? udg_of_mcm(ncfa::io::mcm_from_json(jb))
                           : ncfa::io::udg_from_json(jb);
      std::cout << "shd=" << ncfa::shd(a, b) << "\n";
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ncfa::ecc::SolverRefused& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 3;
  } catch (const ncfa::vae::TrainingDiverged& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 4;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}
