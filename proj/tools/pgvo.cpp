// pgvo command-line tool: scenes, datasets, navigation episodes, evaluation,
// depth projection and training.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pgvo/formats.hpp"
#include "pgvo/pgvo.hpp"

namespace {

using namespace pgvo;

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> sets;
  unsigned jobs = 1;
};

Config load_config(const Globals& g) {
  Config c = g.config_path.empty() ? Config{} : Config::parse(read_file(g.config_path));
  for (const auto& kv : g.sets) c.set_assignment(kv);
  return c;
}

std::uint64_t master_seed(const Globals& g, const Config& c) { return g.seed_given ? g.seed : c.u64("seed"); }

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

OccupancyGrid load_scene(const fs::path& p) { return decode_grid(read_file(p)); }

std::vector<double> parse_numbers(const std::string& s, std::size_t min_n, std::size_t max_n, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      v.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": bad number '" + item + "'");
    }
  }
  if (v.size() < min_n || v.size() > max_n) throw UsageError(std::string(what) + ": wrong number of components");
  return v;
}

// ---------------------------------------------------------------------------

int cmd_make_scenes(const Globals& g, const std::string& out_dir, int count) {
  const Config c = load_config(g);
  if (count < 1) throw UsageError("count must be >= 1");
  const std::uint64_t seed = master_seed(g, c);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03d.txt", i);
    write_file_atomic(fs::path(out_dir) / name, encode_grid(random_scene(derive_seed(seed, static_cast<std::uint64_t>(i)))));
  }
  std::cout << "wrote " << count << " scenes to " << out_dir << "\n";
  return 0;
}

int cmd_generate_dataset(const Globals& g, const std::string& scenes_dir, long long n, const std::string& out_dir) {
  if (n < 1) throw UsageError("n must be >= 1");
  const Config c = load_config(g);
  const auto files = sorted_files(scenes_dir, ".txt");
  if (files.empty()) throw UsageError("no scene files (*.txt) in " + scenes_dir);
  std::vector<OccupancyGrid> scenes;
  std::vector<std::string> names;
  for (const auto& f : files) {
    scenes.push_back(load_scene(f));
    names.push_back(f.filename().string());
  }
  DatasetOptions opt = dataset_options(c, master_seed(g, c), g.jobs);
  opt.n_samples = static_cast<std::size_t>(n);
  const auto data = generate_vo_dataset(scenes, opt);
  write_dataset(out_dir, data, opt, names);
  const auto& st = data.stats;
  std::cout << "action,count,fraction\n";
  for (Action a : kMovementActions)
    std::cout << to_string(a) << "," << st.action_counts[action_index(a)] << "," << format_fixed(st.action_fraction(a), 4)
              << "\n";
  std::cout << "collisions," << st.collisions << "," << format_fixed(st.collision_rate(), 4) << "\n";
  return 0;
}

Estimator make_estimator(const std::string& name, const Config& c) {
  if (name == "gt") return gt_estimator();
  if (name == "zero") return zero_estimator();
  if (name == "classical") return classical_estimator(vo_options(c));
  if (name.rfind("model:", 0) == 0) {
    LinearVoModel m = decode_checkpoint(read_file(name.substr(6)));
    if (!(m.features == feature_config(c)))
      throw UsageError("checkpoint feature layout differs from the configured one");
    return model_estimator(std::move(m));
  }
  throw UsageError("unknown estimator '" + name + "' (gt | zero | classical | model:PATH)");
}

std::string metrics_row(const std::string& id, const NavMetrics& m) {
  return id + "," + std::to_string(m.success) + "," + format_fixed(m.spl) + "," + format_fixed(m.soft_spl) + "," +
         format_fixed(m.d_g);
}

int cmd_simulate(const Globals& g, const std::string& scene_path, const std::string& start_s, const std::string& goal_s,
                 const std::string& estimator_s, const std::string& log_path, const std::string& out_dir, int episodes) {
  const Config c = load_config(g);
  const OccupancyGrid grid = load_scene(scene_path);
  const SceneNav scene(grid, kAgentRadius);
  const EpisodeOptions opt = episode_options(c);
  const Estimator est = make_estimator(estimator_s, c);
  const Policy policy = configured_policy(c);
  const std::uint64_t seed = master_seed(g, c);
  const std::string scene_name = fs::path(scene_path).filename().string();

  std::vector<EpisodeTask> tasks;
  if (!start_s.empty() || !goal_s.empty()) {
    if (start_s.empty() || goal_s.empty()) throw UsageError("--start and --goal must be given together");
    const auto s = parse_numbers(start_s, 2, 3, "--start");
    const auto q = parse_numbers(goal_s, 2, 2, "--goal");
    tasks.push_back({{Vec2(s[0], s[1]), s.size() > 2 ? deg2rad(s[2]) : 0.0}, Vec2(q[0], q[1])});
  } else {
    if (episodes < 1) throw UsageError("--episodes must be >= 1");
    for (int i = 0; i < episodes; ++i)
      tasks.push_back(sample_episode(scene, c.num("dataset.min_goal_distance"), c.num("dataset.max_goal_distance"),
                                     derive_seed(seed, static_cast<std::uint64_t>(i))));
  }
  if (tasks.size() > 1 && out_dir.empty()) throw UsageError("several episodes need --out-dir");

  std::vector<Episode> eps(tasks.size());
  parallel_for(tasks.size(), g.jobs, [&](std::size_t i) {
    eps[i] = run_episode(grid, scene.placement(), tasks[i].start, tasks[i].goal, policy, est, opt,
                         derive_seed(seed ^ 0xe915de5ULL, i));
    eps[i].scene = scene_name;
  });

  std::cout << "episode,S,SPL,SoftSPL,d_G\n";
  for (std::size_t i = 0; i < eps.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "episode_%03zu", i);
    if (!out_dir.empty()) write_file_atomic(fs::path(out_dir) / (std::string(id) + ".jsonl"), encode_episode_log(eps[i]));
    if (!log_path.empty()) write_file_atomic(log_path, encode_episode_log(eps[i]));
    std::cout << metrics_row(id, eps[i].metrics) << "\n";
  }
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& dir, const std::string& out_path) {
  const Config c = load_config(g);
  const auto files = sorted_files(dir, ".jsonl");
  if (files.empty()) throw UsageError("no episode logs (*.jsonl) in " + dir);
  std::string table = "episode,S,SPL,SoftSPL,d_G\n";
  double s = 0, spl_sum = 0, soft = 0, dg = 0;
  for (const auto& f : files) {
    const NavMetrics m = read_episode_summary(read_file(f), f.string(), c.num("episode.success_distance"),
                                              c.flag("metrics.clamp_soft_spl"));
    table += metrics_row(f.stem().string(), m) + "\n";
    s += m.success;
    spl_sum += m.spl;
    soft += m.soft_spl;
    dg += m.d_g;
  }
  const double n = static_cast<double>(files.size());
  table += "mean," + format_fixed(s / n) + "," + format_fixed(spl_sum / n) + "," + format_fixed(soft / n) + "," +
           format_fixed(dg / n) + "\n";
  if (!out_path.empty()) write_file_atomic(out_path, table);
  std::cout << table;
  return 0;
}

int cmd_project_depth(const Globals& g, const std::string& in, const std::string& out) {
  const Config c = load_config(g);
  const DepthImage depth = load_depth(in);
  const CameraIntrinsics cam = intrinsics_from_fov(c.num("camera.hfov_deg"), depth.width(), depth.height());
  const int size = c.integer("projection.size");
  write_file_atomic(out, encode_pgm(soft_projection(depth, cam, size, size)));
  std::cout << "wrote " << size << "x" << size << " projection to " << out << "\n";
  return 0;
}

std::string error_row(const std::string& label, const std::optional<ComponentErrors>& e) {
  if (!e) return label + ",,,,0";
  return label + "," + format_fixed(e->xi_x) + "," + format_fixed(e->xi_z) + "," + format_fixed(rad2deg(e->theta)) + "," +
         std::to_string(e->count);
}

int cmd_train(const Globals& g, const std::string& dataset_dir, const std::string& out_path) {
  const Config c = load_config(g);
  const std::uint64_t seed = master_seed(g, c);
  auto samples = read_dataset(dataset_dir);
  if (samples.empty()) throw UsageError("empty dataset");
  for (const auto& s : samples)
    if (!s.obs) throw UsageError("dataset has no observations (generate with dataset.render=true)");
  const CameraIntrinsics cam = sensor_config(c).cam;
  const FeatureConfig fc = feature_config(c);

  // deterministic split
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const double vf = c.num("train.val_fraction");
  if (!(vf >= 0.0 && vf < 1.0)) throw UsageError("train.val_fraction must lie in [0, 1)");
  const std::size_t n_val = static_cast<std::size_t>(vf * static_cast<double>(samples.size()));
  std::vector<VoSample> train, val;
  for (std::size_t k = 0; k < order.size(); ++k) (k < n_val ? val : train).push_back(samples[order[k]]);
  if (c.flag("train.augment_turns")) train = augment_turn_pairs(train);

  auto to_examples = [&](const std::vector<VoSample>& v) {
    std::vector<TrainingExample> out(v.size());
    parallel_for(v.size(), g.jobs, [&](std::size_t i) { out[i] = make_example(v[i], cam, fc); });
    return out;
  };
  const auto train_ex = to_examples(train);
  const auto val_ex = to_examples(val);

  FitResult res = fit(train_ex, fit_options(c, seed));
  res.model.features = fc;
  write_file_atomic(out_path, encode_checkpoint(res.model));
  std::string curve = "epoch,loss\n";
  for (std::size_t k = 0; k < res.loss_curve.size(); ++k)
    curve += std::to_string(k + 1) + "," + format_double(res.loss_curve[k]) + "\n";
  write_file_atomic(out_path + ".loss.csv", curve);

  const auto& report_set = val_ex.empty() ? train_ex : val_ex;
  std::vector<Se2Params> preds, gts, train_gts;
  std::vector<Action> acts, train_acts;
  double inv_rot = 0, inv_trans = 0;
  for (const auto& e : report_set) {
    const Se2Params pf = predict(res.model, e.fwd, e.action), pb = predict(res.model, e.bwd, e.action);
    preds.push_back(pf);
    gts.push_back(e.gt);
    acts.push_back(e.action);
    inv_rot += rot_invariance_loss(pf, pb);
    inv_trans += trans_invariance_loss(pf, pb);
  }
  for (const auto& e : train_ex) {
    train_gts.push_back(e.gt);
    train_acts.push_back(e.action);
  }
  const auto model_err = per_step_vo_error(preds, gts, acts);
  const auto sys_err = sys_error(train_gts, train_acts, gts, acts);

  std::cout << "final_loss," << format_double(res.final_loss) << "\n";
  std::cout << "split," << (val_ex.empty() ? "train" : "validation") << "\n";
  std::cout << "mean_inv_rot," << format_double(inv_rot / report_set.size()) << "\n";
  std::cout << "mean_inv_trans," << format_double(inv_trans / report_set.size()) << "\n";
  std::cout << "estimator,action,xi_x_m,xi_z_m,theta_deg,n\n";
  for (Action a : kMovementActions) {
    std::cout << error_row("model," + to_string(a), model_err.for_action(a)) << "\n";
    std::cout << error_row("sys_error," + to_string(a), sys_err.for_action(a)) << "\n";
  }
  std::cout << error_row("model,all", model_err.overall) << "\n";
  std::cout << error_row("sys_error,all", sys_err.overall) << "\n";
  return 0;
}

int exit_code(ErrorKind k) { return static_cast<int>(k); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pgvo: planar visual odometry toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key=value config file");
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--set", g.sets, "override a config key (KEY=VALUE, repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);

  std::function<int()> run;

  auto* mk = app.add_subcommand("make-scenes", "write random indoor scenes");
  std::string mk_out;
  int mk_count = 8;
  mk->add_option("out_dir", mk_out)->required();
  mk->add_option("--count", mk_count, "number of scenes");
  mk->callback([&] { run = [&] { return cmd_make_scenes(g, mk_out, mk_count); }; });

  auto* gen = app.add_subcommand("generate-dataset", "generate a VO dataset from scenes");
  std::string gen_scenes, gen_out;
  long long gen_n = 0;
  gen->add_option("scenes_dir", gen_scenes)->required();
  gen->add_option("n", gen_n)->required();
  gen->add_option("out_dir", gen_out)->required();
  gen->callback([&] { run = [&] { return cmd_generate_dataset(g, gen_scenes, gen_n, gen_out); }; });

  auto* sim = app.add_subcommand("simulate", "run navigation episodes with dead reckoning");
  std::string sim_scene, sim_start, sim_goal, sim_est = "gt", sim_log, sim_out;
  int sim_eps = 1;
  sim->add_option("scene", sim_scene)->required();
  sim->add_option("--start", sim_start, "x,z[,heading_deg] in scene meters");
  sim->add_option("--goal", sim_goal, "x,z in scene meters");
  sim->add_option("--estimator", sim_est, "gt | zero | classical | model:PATH");
  sim->add_option("--log", sim_log, "episode log (JSON lines)");
  sim->add_option("--out-dir", sim_out, "directory for one log per episode");
  sim->add_option("--episodes", sim_eps, "sampled episodes when --start/--goal are absent");
  sim->callback([&] {
    run = [&] { return cmd_simulate(g, sim_scene, sim_start, sim_goal, sim_est, sim_log, sim_out, sim_eps); };
  });

  auto* ev = app.add_subcommand("evaluate", "metrics table from a directory of episode logs");
  std::string ev_dir, ev_out;
  ev->add_option("logs_dir", ev_dir)->required();
  ev->add_option("--out", ev_out, "also write the table here");
  ev->callback([&] { run = [&] { return cmd_evaluate(g, ev_dir, ev_out); }; });

  auto* pd = app.add_subcommand("project-depth", "soft top-down projection of a DPTH1 file as PGM");
  std::string pd_in, pd_out;
  pd->add_option("depth_file", pd_in)->required();
  pd->add_option("out_pgm", pd_out)->required();
  pd->callback([&] { run = [&] { return cmd_project_depth(g, pd_in, pd_out); }; });

  auto* tr = app.add_subcommand("train", "fit the linear VO estimator on a dataset");
  std::string tr_dir, tr_out;
  tr->add_option("dataset_dir", tr_dir)->required();
  tr->add_option("out_checkpoint", tr_out)->required();
  tr->callback([&] { run = [&] { return cmd_train(g, tr_dir, tr_out); }; });

  auto* sc = app.add_subcommand("show-config", "print every config key with its value");
  sc->callback([&] {
    run = [&] {
      std::cout << load_config(g).dump();
      return 0;
    };
  });

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    return run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
