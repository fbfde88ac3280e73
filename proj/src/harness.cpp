#include "mvpose/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "mvpose/svg.hpp"

namespace mvpose {

using nlohmann::json;

void ExperimentSpec::validate() const {
  rig.validate();
  if (train_motions.empty()) throw std::invalid_argument("spec has no train motions");
  if (eval_motions.empty()) throw std::invalid_argument("spec has no eval motions");
  if (replicate_seeds.empty()) throw std::invalid_argument("spec has no replicate seeds");
  lifter.validate();
  train_base.validate();
  for (const auto& subset : view_subsets) {
    if (subset.empty()) throw std::invalid_argument("empty view subset");
    for (const std::string& id : subset) {
      bool found = false;
      for (int c = 0; c < rig.camera_count; ++c)
        if (id == "v" + std::to_string(c)) found = true;
      if (!found)
        throw std::invalid_argument("view subset names unknown view " + id);
    }
  }
}

namespace {

LossWeights weights_from_json(const json& doc) {
  LossWeights w;
  w.lambda_pos = doc.value("lambda_pos", w.lambda_pos);
  w.lambda_vel = doc.value("lambda_vel", w.lambda_vel);
  w.lambda_scale = doc.value("lambda_scale", w.lambda_scale);
  w.lambda_con = doc.value("lambda_con", w.lambda_con);
  w.lambda_2d_reproj = doc.value("lambda_2d_reproj", w.lambda_2d_reproj);
  return w;
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("spec parse error in " + path + ": " + e.what());
  }

  ExperimentSpec spec;
  spec.name = doc.value("name", spec.name);

  const json& rig = doc.at("rig");
  spec.rig.camera_count = rig.at("camera_count").get<int>();
  spec.rig.azimuths_deg = rig.at("azimuths_deg").get<std::vector<double>>();
  spec.rig.radius_mm = rig.value("radius_mm", spec.rig.radius_mm);
  spec.rig.height_mm = rig.value("height_mm", spec.rig.height_mm);
  spec.rig.focal_px = rig.value("focal_px", spec.rig.focal_px);
  if (rig.contains("resolution")) {
    spec.rig.resolution_w = rig.at("resolution").at(0).get<int>();
    spec.rig.resolution_h = rig.at("resolution").at(1).get<int>();
  }
  if (rig.contains("look_at")) {
    const json& la = rig.at("look_at");
    spec.rig.look_at = {la.at(0).get<double>(), la.at(1).get<double>(),
                        la.at(2).get<double>()};
  }

  const json& motions = doc.at("motions");
  MotionSpec base;
  base.frame_count = motions.value("frame_count", base.frame_count);
  base.frame_rate_hz = motions.value("frame_rate_hz", base.frame_rate_hz);
  base.joint_amplitude_rad = motions.value("joint_amplitude_rad", base.joint_amplitude_rad);
  base.joint_frequency_hz = motions.value("joint_frequency_hz", base.joint_frequency_hz);
  base.root_amplitude_mm = motions.value("root_amplitude_mm", base.root_amplitude_mm);
  base.root_frequency_hz = motions.value("root_frequency_hz", base.root_frequency_hz);
  const auto activities =
      motions.value("activities", std::vector<std::string>{"activity"});
  const auto expand = [&](const std::vector<std::uint64_t>& seeds) {
    std::vector<MotionSpec> out;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      MotionSpec m = base;
      m.seed = seeds[i];
      m.activity_label = activities[i % activities.size()];
      out.push_back(std::move(m));
    }
    return out;
  };
  spec.train_motions = expand(motions.at("train_seeds").get<std::vector<std::uint64_t>>());
  spec.eval_motions = expand(motions.at("eval_seeds").get<std::vector<std::uint64_t>>());

  if (doc.contains("objectives")) {
    for (const json& cell : doc.at("objectives")) {
      const Objective o = objective_from_name(cell.at("objective").get<std::string>());
      LossWeights w = cell.contains("weights") ? weights_from_json(cell.at("weights"))
                                               : LossWeights{};
      spec.objective_grid.emplace_back(o, w);
    }
  }
  if (doc.contains("view_subsets"))
    spec.view_subsets =
        doc.at("view_subsets").get<std::vector<std::vector<std::string>>>();

  if (doc.contains("lifter")) {
    const json& lf = doc.at("lifter");
    spec.lifter.window_frames = lf.value("window_frames", spec.lifter.window_frames);
    spec.lifter.hidden_sizes = lf.value("hidden_sizes", spec.lifter.hidden_sizes);
    spec.lifter.activation = lf.value("activation", std::string("tanh")) == "relu"
                                 ? LifterConfig::Activation::Relu
                                 : LifterConfig::Activation::Tanh;
    spec.lifter.output_scale_mm = lf.value("output_scale_mm", spec.lifter.output_scale_mm);
  }
  spec.lifter.joint_count = Skeleton::h36m17().joint_count();
  spec.lifter.root_index = Skeleton::h36m17().root_index;

  if (doc.contains("train")) {
    const json& tr = doc.at("train");
    spec.train_base.epochs = tr.value("epochs", spec.train_base.epochs);
    spec.train_base.learning_rate = tr.value("learning_rate", spec.train_base.learning_rate);
    spec.train_base.adam_beta1 = tr.value("adam_beta1", spec.train_base.adam_beta1);
    spec.train_base.adam_beta2 = tr.value("adam_beta2", spec.train_base.adam_beta2);
    spec.train_base.adam_eps = tr.value("adam_eps", spec.train_base.adam_eps);
    spec.train_base.batch_windows = tr.value("batch_windows", spec.train_base.batch_windows);
    spec.train_base.root_depth_init_mm =
        tr.value("root_depth_init_mm", spec.train_base.root_depth_init_mm);
    spec.train_base.depth_learning_rate =
        tr.value("depth_learning_rate", spec.train_base.depth_learning_rate);
    if (tr.contains("weights"))
      spec.train_base.weights = weights_from_json(tr.at("weights"));
    if (tr.contains("objective"))
      spec.train_base.objective =
          objective_from_name(tr.at("objective").get<std::string>());
  }
  if (doc.contains("replicate_seeds"))
    spec.replicate_seeds = doc.at("replicate_seeds").get<std::vector<std::uint64_t>>();
  spec.eval_view = doc.value("eval_view", spec.eval_view);
  spec.reference_view = doc.value("reference_view", spec.reference_view);

  spec.validate();
  return spec;
}

Dataset build_dataset(const RigSpec& rig, const Skeleton& skeleton,
                      const std::vector<MotionSpec>& motions) {
  Dataset ds;
  ds.skeleton = skeleton;
  for (const MotionSpec& m : motions) {
    const PoseSequence3D world = generate_motion(m, skeleton);
    ds.samples.push_back(render_sample(
        world, rig, m.activity_label + "-" + std::to_string(m.seed),
        m.activity_label));
  }
  return ds;
}

Dataset subset_views(const Dataset& dataset,
                     const std::vector<std::string>& view_ids) {
  Dataset out;
  out.skeleton = dataset.skeleton;
  for (const MultiviewSample& s : dataset.samples) {
    MultiviewSample sub;
    sub.sequence_id = s.sequence_id;
    sub.activity_label = s.activity_label;
    for (const std::string& id : view_ids) {
      const auto it = std::find_if(s.views.begin(), s.views.end(),
                                   [&](const View& v) { return v.view_id == id; });
      if (it == s.views.end())
        throw std::invalid_argument("subset_views: no view " + id + " in sample " +
                                    s.sequence_id);
      sub.views.push_back(*it);
    }
    out.samples.push_back(std::move(sub));
  }
  return out;
}

namespace {

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> activity_union(const ResultTable& table) {
  std::set<std::string> acts;
  for (const ResultRow& r : table.rows)
    for (const auto& [label, _] : r.per_activity) acts.insert(label);
  return {acts.begin(), acts.end()};
}

}  // namespace

void write_results_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const std::vector<std::string> acts = activity_union(table);
  out << "cell_id,seed,mpjpe_mm,pa_mpjpe_mm,frame_count";
  for (const std::string& a : acts)
    out << ",act_" << a << "_mpjpe_mm,act_" << a << "_pa_mpjpe_mm";
  out << "\n";
  for (const ResultRow& r : table.rows) {
    out << r.cell_id << "," << r.seed << "," << format_g(r.mpjpe_mm) << ","
        << format_g(r.pa_mpjpe_mm) << "," << r.frame_count;
    for (const std::string& a : acts) {
      const auto it = r.per_activity.find(a);
      if (it == r.per_activity.end()) {
        out << ",,";
      } else {
        out << "," << format_g(it->second.mpjpe_mm) << ","
            << format_g(it->second.pa_mpjpe_mm);
      }
    }
    out << "\n";
  }
}

void write_timings_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "cell_id,seed,wall_seconds\n";
  for (const ResultRow& r : table.rows)
    out << r.cell_id << "," << r.seed << "," << format_g(r.wall_seconds) << "\n";
}

ResultTable run_cells(const ExperimentSpec& spec,
                      const std::vector<ExperimentCell>& cells, int threads) {
  spec.validate();
  const Skeleton skeleton = Skeleton::h36m17();
  const Dataset full_train = build_dataset(spec.rig, skeleton, spec.train_motions);
  const Dataset eval_set = build_dataset(spec.rig, skeleton, spec.eval_motions);

  struct Job {
    const ExperimentCell* cell;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const ExperimentCell& cell : cells)
    for (std::uint64_t seed : spec.replicate_seeds) jobs.push_back({&cell, seed});

  std::vector<ResultRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      try {

      const auto t0 = std::chrono::steady_clock::now();
      Dataset train_set = subset_views(full_train, job.cell->views);
      TrainConfig config = job.cell->train;
      config.seed = job.seed;
      LifterConfig lifter = spec.lifter;
      lifter.init_seed = Rng::mix(job.seed, 0x6c696674ULL);

      // Validation during training uses the eval motions on the training
      // views (labels exist for synthetic data); the reported metrics below
      // use the monocular eval view.
      const Dataset val_set = subset_views(eval_set, {spec.eval_view});
      const TrainResult trained = train(train_set, val_set, lifter, config);

      std::vector<EvalItem> items;
      for (const MultiviewSample& s : eval_set.samples) {
        const auto it = std::find_if(
            s.views.begin(), s.views.end(),
            [&](const View& v) { return v.view_id == spec.eval_view; });
        if (it == s.views.end())
          throw std::runtime_error("eval view missing from eval dataset");
        items.push_back({s.activity_label,
                         predict_sequence(lifter, trained.params, it->pose2d),
                         *it->pose3d_camera});
      }
      const MetricReport report = evaluate(items, skeleton.root_index);

      ResultRow row;
      row.cell_id = job.cell->cell_id;
      row.seed = job.seed;
      row.mpjpe_mm = report.mpjpe_mm;
      row.pa_mpjpe_mm = report.pa_mpjpe_mm;
      row.frame_count = report.frame_count;
      row.per_activity = report.per_activity;
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      rows[i] = std::move(row);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(jobs.size());  // stop handing out work
        return;
      }
    }
  };

  const int n_threads = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  ResultTable table;
  table.rows = std::move(rows);
  std::sort(table.rows.begin(), table.rows.end(),
            [](const ResultRow& a, const ResultRow& b) {
              return a.cell_id != b.cell_id ? a.cell_id < b.cell_id
                                            : a.seed < b.seed;
            });
  return table;
}

ResultTable run_objective_comparison(const ExperimentSpec& spec, int threads) {
  if (spec.objective_grid.empty())
    throw std::invalid_argument("objective comparison needs an objective grid");
  std::vector<std::string> all_views;
  for (int c = 0; c < spec.rig.camera_count; ++c)
    all_views.push_back("v" + std::to_string(c));

  std::vector<ExperimentCell> cells;
  for (const auto& [objective, weights] : spec.objective_grid) {
    ExperimentCell cell;
    cell.cell_id = objective_name(objective);
    cell.views = all_views;
    cell.train = spec.train_base;
    cell.train.objective = objective;
    cell.train.weights = weights;
    cells.push_back(std::move(cell));
  }
  return run_cells(spec, cells, threads);
}

namespace {

std::vector<double> medians(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

void write_views_plot(const ResultTable& table, const std::string& out_dir,
                      const std::string& title) {
  // Median over seeds per cell, plotted against the leading integer in the
  // cell id (the view count or combination index).
  SvgSeries mpjpe{"MPJPE", {}, {}};
  SvgSeries pa{"PA-MPJPE", {}, {}};
  for (const auto& [cell, med] : median_by_cell(table, false)) {
    mpjpe.x.push_back(std::stod(cell.substr(cell.find('=') + 1)));
    mpjpe.y.push_back(med);
  }
  for (const auto& [cell, med] : median_by_cell(table, true)) {
    pa.x.push_back(std::stod(cell.substr(cell.find('=') + 1)));
    pa.y.push_back(med);
  }
  SvgChart chart;
  chart.title = title;
  chart.x_label = "views";
  chart.y_label = "error (mm)";
  chart.series = {mpjpe, pa};
  write_svg(chart, out_dir + "/results.svg");
}

ResultTable run_view_grid(const ExperimentSpec& spec, int threads,
                          const std::string& out_dir, double lambda_con,
                          const std::string& title) {
  std::vector<ExperimentCell> cells;
  for (int k = 1; k <= spec.rig.camera_count; ++k) {
    ExperimentCell cell;
    cell.cell_id = "views=" + std::to_string(k);
    for (int c = 0; c < k; ++c) cell.views.push_back("v" + std::to_string(c));
    cell.train = spec.train_base;
    cell.train.objective = k >= 2 && lambda_con != 0.0 ? Objective::L2Dcon
                                                       : Objective::L2D;
    cell.train.weights.lambda_2d_reproj = 1.0;
    cell.train.weights.lambda_con = k >= 2 ? lambda_con : 0.0;
    cells.push_back(std::move(cell));
  }
  ResultTable table = run_cells(spec, cells, threads);
  if (!out_dir.empty()) {
    write_results_csv(table, out_dir + "/results.csv");
    write_timings_csv(table, out_dir + "/timings.csv");
    write_views_plot(table, out_dir, title);
  }
  return table;
}

}  // namespace

ResultTable run_view_count_ablation(const ExperimentSpec& spec, int threads,
                                    const std::string& out_dir) {
  return run_view_grid(spec, threads, out_dir, 1.0,
                       spec.name + ": error vs view count");
}

ResultTable run_data_vs_loss_attribution(const ExperimentSpec& spec, int threads,
                                         const std::string& out_dir) {
  return run_view_grid(spec, threads, out_dir, 0.0,
                       spec.name + ": data-only (lambda_con = 0)");
}

ResultTable run_view_selection_ablation(const ExperimentSpec& spec, int threads,
                                        const std::string& out_dir) {
  std::vector<ExperimentCell> cells;
  int combination = 0;
  for (int c = 0; c < spec.rig.camera_count; ++c) {
    const std::string id = "v" + std::to_string(c);
    if (id == spec.reference_view) continue;
    ++combination;
    ExperimentCell cell;
    cell.cell_id = "pair=" + std::to_string(combination) + ":" +
                   spec.reference_view + "+" + id;
    cell.views = {spec.reference_view, id};
    cell.train = spec.train_base;
    cell.train.objective = Objective::L2Dcon;
    cell.train.weights.lambda_2d_reproj = 1.0;
    cell.train.weights.lambda_con = 1.0;
    cells.push_back(std::move(cell));
  }
  if (cells.empty())
    throw std::invalid_argument("view selection ablation needs >= 2 cameras");

  ResultTable table = run_cells(spec, cells, threads);
  if (!out_dir.empty()) {
    write_results_csv(table, out_dir + "/results.csv");
    write_timings_csv(table, out_dir + "/timings.csv");
    SvgSeries mpjpe{"MPJPE", {}, {}};
    SvgSeries pa{"PA-MPJPE", {}, {}};
    for (const auto& [cell, med] : median_by_cell(table, false)) {
      mpjpe.x.push_back(mpjpe.x.size() + 1.0);
      mpjpe.y.push_back(med);
    }
    for (const auto& [cell, med] : median_by_cell(table, true)) {
      pa.x.push_back(pa.x.size() + 1.0);
      pa.y.push_back(med);
    }
    SvgChart chart;
    chart.title = spec.name + ": two-view combinations (x = pair index)";
    chart.x_label = "combination";
    chart.y_label = "error (mm)";
    chart.series = {mpjpe, pa};
    write_svg(chart, out_dir + "/results.svg");
  }
  return table;
}

std::vector<std::pair<std::string, double>> median_by_cell(
    const ResultTable& table, bool pa) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> values;
  for (const ResultRow& r : table.rows) {
    if (!values.count(r.cell_id)) order.push_back(r.cell_id);
    values[r.cell_id].push_back(pa ? r.pa_mpjpe_mm : r.mpjpe_mm);
  }
  std::vector<std::pair<std::string, double>> out;
  for (const std::string& cell : order) {
    std::vector<double> v = medians(values[cell]);
    const std::size_t n = v.size();
    const double med = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    out.emplace_back(cell, med);
  }
  return out;
}

}  // namespace mvpose
