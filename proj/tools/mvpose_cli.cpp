// Experiment CLI: synthetic data generation, training, evaluation and the
// ablation studies, all driven by a JSON experiment spec.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mvpose/harness.hpp"
#include "mvpose/selftest.hpp"

namespace fs = std::filesystem;
using namespace mvpose;

namespace {

struct CommonArgs {
  std::string spec_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int threads = 2;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_spec) {
  if (needs_spec)
    cmd->add_option("--spec", args.spec_path, "experiment spec (JSON)")->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the spec's replicate seeds");
  cmd->add_option("--threads", args.threads, "worker threads for experiment cells");
}

ExperimentSpec load_spec(const CommonArgs& args) {
  ExperimentSpec spec = ExperimentSpec::from_json_file(args.spec_path);
  if (args.seed) spec.replicate_seeds = {*args.seed};
  return spec;
}

void ensure_out(const CommonArgs& args) { fs::create_directories(args.out_dir); }

void emit_table(const ResultTable& table, const CommonArgs& args) {
  write_results_csv(table, args.out_dir + "/results.csv");
  write_timings_csv(table, args.out_dir + "/timings.csv");
  std::cout << "wrote " << args.out_dir << "/results.csv (" << table.rows.size()
            << " rows)\n";
}

int run_synth(const CommonArgs& args) {
  const ExperimentSpec spec = load_spec(args);
  ensure_out(args);
  const Skeleton skeleton = Skeleton::h36m17();
  write_dataset(build_dataset(spec.rig, skeleton, spec.train_motions),
                args.out_dir + "/train_dataset.json");
  write_dataset(build_dataset(spec.rig, skeleton, spec.eval_motions),
                args.out_dir + "/eval_dataset.json");
  std::cout << "wrote " << args.out_dir << "/train_dataset.json and eval_dataset.json\n";
  return 0;
}

int run_train(const CommonArgs& args) {
  ExperimentSpec spec = load_spec(args);
  ensure_out(args);
  const Skeleton skeleton = Skeleton::h36m17();
  const Dataset train_set =
      build_dataset(spec.rig, skeleton, spec.train_motions);
  const Dataset eval_set = build_dataset(spec.rig, skeleton, spec.eval_motions);
  const Dataset val_set = subset_views(eval_set, {spec.eval_view});

  TrainConfig config = spec.train_base;
  if (args.seed) config.seed = *args.seed;
  LifterConfig lifter = spec.lifter;
  lifter.init_seed = Rng::mix(config.seed, 0x6c696674ULL);

  const TrainResult result = train(train_set, val_set, lifter, config);
  write_train_log_csv(result.log, args.out_dir + "/train_log.csv");
  write_params(lifter, result.params, args.out_dir + "/params.json");
  std::cout << "objective " << objective_name(config.objective)
            << ", final val MPJPE " << result.log.epochs.back().val_mpjpe
            << " mm, PA-MPJPE " << result.log.epochs.back().val_pa_mpjpe
            << " mm\nwrote " << args.out_dir << "/train_log.csv and params.json\n";
  return 0;
}

int run_eval(const CommonArgs& args, const std::string& params_path) {
  const ExperimentSpec spec = load_spec(args);
  ensure_out(args);
  const auto [lifter, params] = read_params(params_path);
  const Skeleton skeleton = Skeleton::h36m17();
  const Dataset eval_set = build_dataset(spec.rig, skeleton, spec.eval_motions);

  std::vector<EvalItem> items;
  for (const MultiviewSample& s : eval_set.samples)
    for (const View& v : s.views)
      if (v.view_id == spec.eval_view)
        items.push_back({s.activity_label,
                         predict_sequence(lifter, params, v.pose2d),
                         *v.pose3d_camera});
  const MetricReport report = evaluate(items, skeleton.root_index);

  ResultTable table;
  ResultRow row;
  row.cell_id = "eval:" + spec.eval_view;
  row.seed = spec.replicate_seeds.front();
  row.mpjpe_mm = report.mpjpe_mm;
  row.pa_mpjpe_mm = report.pa_mpjpe_mm;
  row.frame_count = report.frame_count;
  row.per_activity = report.per_activity;
  table.rows.push_back(std::move(row));
  emit_table(table, args);
  std::cout << "MPJPE " << report.mpjpe_mm << " mm, PA-MPJPE "
            << report.pa_mpjpe_mm << " mm over " << report.frame_count
            << " frames\n";
  return 0;
}

int run_check_gradients(const CommonArgs& args) {
  const std::uint64_t seed = args.seed.value_or(20240901ULL);
  bool all_pass = true;
  for (const GradCheckResult& r : run_gradient_checks(seed)) {
    std::printf("[%s] %-42s worst rel err %.3e (tol %.0e, %d cases)\n",
                r.pass ? "PASS" : "FAIL", r.name.c_str(), r.worst_rel_err,
                r.tolerance, r.cases);
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

int run_procrustes(const CommonArgs& args) {
  const std::uint64_t seed = args.seed.value_or(20240902ULL);
  const ProcrustesSelftest r = run_procrustes_selftest(seed);
  std::printf(
      "[%s] procrustes selftest: %d pairs (+%d mirrored), worst relative "
      "objective gap %.3e, %d determinant failures\n",
      r.pass ? "PASS" : "FAIL", r.pairs, r.mirrored_pairs, r.worst_rel_gap,
      r.det_failures);
  return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiview-consistency pose lifting experiments"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string params_path;

  CLI::App* synth = app.add_subcommand("synth", "generate the synthetic datasets");
  add_common(synth, args, true);
  CLI::App* train_cmd = app.add_subcommand("train", "train one model per the spec");
  add_common(train_cmd, args, true);
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval_cmd, args, true);
  eval_cmd->add_option("--params", params_path, "checkpoint (params.json)")->required();
  CLI::App* compare = app.add_subcommand("compare-objectives",
                                         "objective grid x seeds (Table-1 style)");
  add_common(compare, args, true);
  CLI::App* ablate_views =
      app.add_subcommand("ablate-views", "error versus number of training views");
  add_common(ablate_views, args, true);
  CLI::App* ablate_sel = app.add_subcommand(
      "ablate-selection", "reference view paired with each other view");
  add_common(ablate_sel, args, true);
  CLI::App* attribution = app.add_subcommand(
      "attribution", "view grid with the consistency loss disabled");
  add_common(attribution, args, true);
  CLI::App* gradcheck =
      app.add_subcommand("check-gradients", "finite-difference gradient suite");
  add_common(gradcheck, args, false);
  CLI::App* procrustes = app.add_subcommand(
      "procrustes-selftest", "closed-form fit versus numeric minimizer");
  add_common(procrustes, args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(args);
    if (train_cmd->parsed()) return run_train(args);
    if (eval_cmd->parsed()) return run_eval(args, params_path);
    if (compare->parsed()) {
      const ExperimentSpec spec = load_spec(args);
      ensure_out(args);
      emit_table(run_objective_comparison(spec, args.threads), args);
      return 0;
    }
    if (ablate_views->parsed()) {
      const ExperimentSpec spec = load_spec(args);
      ensure_out(args);
      run_view_count_ablation(spec, args.threads, args.out_dir);
      std::cout << "wrote " << args.out_dir << "/results.csv and results.svg\n";
      return 0;
    }
    if (ablate_sel->parsed()) {
      const ExperimentSpec spec = load_spec(args);
      ensure_out(args);
      run_view_selection_ablation(spec, args.threads, args.out_dir);
      std::cout << "wrote " << args.out_dir << "/results.csv and results.svg\n";
      return 0;
    }
    if (attribution->parsed()) {
      const ExperimentSpec spec = load_spec(args);
      ensure_out(args);
      run_data_vs_loss_attribution(spec, args.threads, args.out_dir);
      std::cout << "wrote " << args.out_dir << "/results.csv and results.svg\n";
      return 0;
    }
    if (gradcheck->parsed()) return run_check_gradients(args);
    if (procrustes->parsed()) return run_procrustes(args);
  } catch (const std::exception& e) {
    // One machine-readable line on stderr.
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '"') c = '\'';
    std::cerr << "{\"error\": \"" << msg << "\"}\n";
    return 1;
  }
  return 0;
}
