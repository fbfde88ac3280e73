#pragma once

#include "mvpose/metrics.hpp"
#include "mvpose/trainer.hpp"

namespace mvpose {

// Everything one experiment needs: the rig, the motion lists, the model and
// training configuration, the objective grid and the replicate seeds.
struct ExperimentSpec {
  std::string name = "experiment";
  RigSpec rig;
  std::vector<MotionSpec> train_motions;
  std::vector<MotionSpec> eval_motions;
  std::vector<std::pair<Objective, LossWeights>> objective_grid;
  std::vector<std::vector<std::string>> view_subsets;
  LifterConfig lifter;
  TrainConfig train_base;
  std::vector<std::uint64_t> replicate_seeds = {1, 2, 3};
  std::string eval_view = "v0";       // monocular evaluation view
  std::string reference_view = "v0";  // anchor of the view-selection ablation

  void validate() const;
  static ExperimentSpec from_json_file(const std::string& path);
};

// Synthesizes the full multiview dataset for a motion list.
Dataset build_dataset(const RigSpec& rig, const Skeleton& skeleton,
                      const std::vector<MotionSpec>& motions);

// Keeps only the named views of every sample, in the given order.
Dataset subset_views(const Dataset& dataset,
                     const std::vector<std::string>& view_ids);

struct ResultRow {
  std::string cell_id;
  std::uint64_t seed = 0;
  double mpjpe_mm = 0.0;
  double pa_mpjpe_mm = 0.0;
  long frame_count = 0;
  std::map<std::string, ActivityMetrics> per_activity;
  double wall_seconds = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;  // sorted by (cell_id, seed)
};

// Deterministic columns only; wall-clock timings go to a separate file so
// results.csv is byte-identical across reruns.
void write_results_csv(const ResultTable& table, const std::string& path);
void write_timings_csv(const ResultTable& table, const std::string& path);

// One experiment cell: a training view subset plus a full train config.
struct ExperimentCell {
  std::string cell_id;
  std::vector<std::string> views;
  TrainConfig train;
};

// Trains and evaluates every cell (parallel across cells, deterministic
// output). Each row is reproducible from (spec, cell, seed) alone.
ResultTable run_cells(const ExperimentSpec& spec,
                      const std::vector<ExperimentCell>& cells, int threads);

// Table-1 analogue: every objective-grid entry times every replicate seed,
// trained on the full rig, evaluated monocularly on eval_view.
ResultTable run_objective_comparison(const ExperimentSpec& spec, int threads);

// Fig-4 analogue: one training per view count k = 1..N (k = 1 drops the
// consistency term) with lambda_2d_reproj = lambda_con = 1 fixed across k.
// Writes results.csv/results.svg under out_dir when nonempty.
ResultTable run_view_count_ablation(const ExperimentSpec& spec, int threads,
                                    const std::string& out_dir);

// Fig-7 analogue: reference view paired with each other view.
ResultTable run_view_selection_ablation(const ExperimentSpec& spec, int threads,
                                        const std::string& out_dir);

// Fig-5 analogue: the view-count grid with lambda_con = 0, isolating the
// data-volume effect from the consistency-loss effect.
ResultTable run_data_vs_loss_attribution(const ExperimentSpec& spec, int threads,
                                         const std::string& out_dir);

// Median over seeds of a metric per cell, in first-seen cell order.
std::vector<std::pair<std::string, double>> median_by_cell(
    const ResultTable& table, bool pa);

}  // namespace mvpose
