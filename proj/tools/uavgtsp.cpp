// Command-line front end: generate corpora, run solvers, train and evaluate
// the policy, sweep comparisons and render tours.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavgtsp/bench.hpp"
#include "uavgtsp/errors.hpp"
#include "uavgtsp/instances.hpp"
#include "uavgtsp/training.hpp"

namespace fs = std::filesystem;
using namespace uavgtsp;

namespace {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kInvalid = 3,
  kCapacity = 4,
  kIo = 5,
  kDiverged = 6,
};

struct UsageError : Error {
  using Error::Error;
};

struct Common {
  std::string config_path;
  std::vector<std::string> sets;  // key=value
  std::optional<double> omega;
};

// Flags first, then --set pairs, then the config file, which has the last word.
RunSettings resolve(const Common& c, RunSettings s) {
  if (c.omega) s.energy.omega = *c.omega;
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_setting(s, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!c.config_path.empty()) apply_config_file(s, c.config_path);
  s.energy.validate();
  s.aco.validate();
  s.train.energy = s.energy;
  return s;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "key = value file applied after all flags");
  app->add_option("--set", c.sets, "override one setting, key=value (repeatable)");
  app->add_option("--omega", c.omega, "ground/UAV weighting in [0, 1]");
}

void add_aco(CLI::App* app, AcoConfig& aco) {
  app->add_option("--ants", aco.n_ants, "ACO ants per iteration");
  app->add_option("--iterations", aco.n_iterations, "ACO iterations");
  app->add_option("--evaporation", aco.evaporation, "ACO evaporation rate");
  app->add_option("--alpha", aco.pheromone_weight, "ACO trail exponent");
  app->add_option("--beta", aco.visibility_weight, "ACO visibility exponent");
  app->add_option("--aco-seed", aco.rng_seed, "ACO random seed");
}

std::vector<std::string> gather_instances(const std::vector<std::string>& files,
                                          const std::string& corpus) {
  std::vector<std::string> paths = files;
  if (!corpus.empty()) {
    const auto more = list_instance_files(corpus);
    paths.insert(paths.end(), more.begin(), more.end());
  }
  if (paths.empty()) throw UsageError("no instances given (use --instance or --corpus)");
  return paths;
}

std::string label_of(const std::string& path) { return fs::path(path).stem().string(); }

void check_solvers(const std::vector<std::string>& solvers) {
  static const std::vector<std::string> known{"exact", "brute_force", "greedy", "aco", "drl"};
  for (const auto& name : solvers) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw UsageError("unknown solver '" + name + "'");
    }
  }
}

std::optional<Checkpoint> maybe_checkpoint(const std::string& path,
                                           const std::vector<std::string>& solvers) {
  check_solvers(solvers);
  const bool wants = std::find(solvers.begin(), solvers.end(), "drl") != solvers.end();
  if (!wants) return std::nullopt;
  if (path.empty()) throw UsageError("solver drl requires --checkpoint");
  return load_checkpoint(path);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

std::size_t env_workers() {
  const char* env = std::getenv("UAVGTSP_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0) throw UsageError("UAVGTSP_WORKERS must be a positive integer");
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + item + "' in list");
    }
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Energy-aware UAV data-collection tour planner"};
  app.require_subcommand(1);

  // generate
  GenerateOptions gen;
  std::size_t gen_count = 30;
  std::string gen_dir = "corpus";
  auto* g = app.add_subcommand("generate", "write a corpus of random instances");
  g->add_option("-K,--clusters", gen.num_clusters, "clusters per instance")->check(CLI::PositiveNumber);
  g->add_option("-N,--cluster-size", gen.cluster_size, "nodes per cluster")->check(CLI::Range(2, 1000000));
  g->add_option("--zeta", gen.zeta, "cluster half-width, m")->check(CLI::PositiveNumber);
  g->add_option("--area-size", gen.area_size, "side of the square area, m")->check(CLI::PositiveNumber);
  g->add_option("--count", gen_count, "number of instances");
  g->add_option("--seed", gen.seed, "base seed");
  g->add_option("--out-dir", gen_dir, "output directory");

  // solve
  Common solve_c;
  RunSettings solve_s;
  std::vector<std::string> solve_files, solve_solvers{"exact"};
  std::string solve_corpus, solve_ckpt, solve_out, solve_plot_dir;
  auto* s = app.add_subcommand("solve", "run solvers and write one CSV row per (instance, solver)");
  add_common(s, solve_c);
  add_aco(s, solve_s.aco);
  s->add_option("--instance", solve_files, "instance file (repeatable)");
  s->add_option("--corpus", solve_corpus, "directory of instance_*.json");
  s->add_option("--solver", solve_solvers, "exact, brute_force, greedy, aco, drl (repeatable)");
  s->add_option("--checkpoint", solve_ckpt, "policy checkpoint, required by drl");
  s->add_option("--out", solve_out, "CSV path, '-' for stdout");
  s->add_option("--plot-dir", solve_plot_dir, "also write an SVG per (instance, solver)");

  // train
  Common train_c;
  RunSettings train_s;
  std::optional<std::size_t> train_workers;
  auto* t = app.add_subcommand("train", "train the policy with REINFORCE and a critic baseline");
  add_common(t, train_c);
  auto& tc = train_s.train;
  t->add_option("--batch-size", tc.batch_size, "instances per step");
  t->add_option("--steps", tc.n_steps, "total training steps");
  t->add_option("-K,--clusters", tc.num_clusters, "clusters per training instance");
  t->add_option("-N,--cluster-size", tc.cluster_size, "nodes per cluster");
  t->add_option("--zeta", tc.zeta, "cluster half-width, m");
  t->add_option("--actor-lr", tc.actor_lr, "actor learning rate");
  t->add_option("--critic-lr", tc.critic_lr, "critic learning rate");
  t->add_option("--seed", tc.seed, "training seed");
  t->add_option("--embed-dim", tc.embed_dim, "embedding and LSTM width");
  t->add_option("--eval-every", tc.eval_every, "steps between held-out evaluations, 0 = off");
  t->add_option("--eval-instances", tc.eval_instances, "held-out set size");
  t->add_option("--checkpoint-every", tc.checkpoint_every, "steps between checkpoints");
  t->add_option("--checkpoint", tc.checkpoint_path, "checkpoint path")->required();
  t->add_option("--log", tc.log_path, "append-only training CSV");
  t->add_flag("--resume", tc.resume, "continue from --checkpoint when it exists");
  t->add_option("--workers", train_workers, "rollout threads (default: $UAVGTSP_WORKERS or 1)");
  t->add_option("--max-grad-norm", tc.max_grad_norm, "global gradient clipping norm");

  // evaluate
  Common eval_c;
  RunSettings eval_s;
  std::vector<std::string> eval_files, eval_solvers{"drl", "greedy", "aco"};
  std::string eval_corpus, eval_ckpt, eval_out;
  auto* e = app.add_subcommand("evaluate", "compare a checkpoint with the baselines, normalized to exact");
  add_common(e, eval_c);
  add_aco(e, eval_s.aco);
  e->add_option("--instance", eval_files, "instance file (repeatable)");
  e->add_option("--corpus", eval_corpus, "directory of instance_*.json");
  e->add_option("--solver", eval_solvers, "solvers besides exact (repeatable)");
  e->add_option("--checkpoint", eval_ckpt, "policy checkpoint");
  e->add_option("--out", eval_out, "CSV path, '-' for stdout");

  // compare
  Common cmp_c;
  RunSettings cmp_s;
  std::vector<std::string> cmp_solvers{"greedy", "aco"};
  std::string cmp_corpus, cmp_ckpt, cmp_out_dir = "compare", cmp_omegas = "0,0.3,0.6,0.9";
  auto* c = app.add_subcommand("compare", "omega and K sweeps of mean ratios vs exact");
  add_common(c, cmp_c);
  add_aco(c, cmp_s.aco);
  c->add_option("--corpus", cmp_corpus, "directory of instance_*.json")->required();
  c->add_option("--omegas", cmp_omegas, "comma-separated omega values");
  c->add_option("--solver", cmp_solvers, "solvers besides exact (repeatable)");
  c->add_option("--checkpoint", cmp_ckpt, "policy checkpoint, required by drl");
  c->add_option("--out-dir", cmp_out_dir, "directory for omega_sweep.csv, k_sweep.csv, ratios.csv");

  // plot
  Common plot_c;
  RunSettings plot_s;
  std::string plot_instance, plot_solver = "exact", plot_ckpt, plot_out = "tour.svg";
  auto* p = app.add_subcommand("plot", "render a solved tour as SVG");
  add_common(p, plot_c);
  add_aco(p, plot_s.aco);
  p->add_option("--instance", plot_instance, "instance file")->required();
  p->add_option("--solver", plot_solver, "solver to run");
  p->add_option("--checkpoint", plot_ckpt, "policy checkpoint, required by drl");
  p->add_option("--out", plot_out, "SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  if (*g) {
    const auto paths = generate_corpus(gen, gen_count, gen_dir);
    for (const auto& path : paths) std::cout << path << '\n';
    return kOk;
  }

  if (*s) {
    const RunSettings rs = resolve(solve_c, solve_s);
    const auto paths = gather_instances(solve_files, solve_corpus);
    const auto ckpt = maybe_checkpoint(solve_ckpt, solve_solvers);
    const PolicyParams* policy = ckpt ? &ckpt->actor : nullptr;
    std::string text = report_csv_header() + "\n";
    for (const auto& path : paths) {
      const Instance inst = load_instance(path);
      for (const auto& solver : solve_solvers) {
        const SolveReport rep = run_solver(solver, inst, rs.energy, rs.aco, policy);
        text += report_csv_row(label_of(path), inst, rep) + "\n";
        if (!solve_plot_dir.empty()) {
          fs::create_directories(solve_plot_dir);
          write_svg(inst, rep, (fs::path(solve_plot_dir) / (label_of(path) + "_" + solver + ".svg")).string());
        }
      }
    }
    emit(solve_out, text);
    return kOk;
  }

  if (*t) {
    train_s.train.workers = train_workers ? *train_workers : env_workers();
    const RunSettings rs = resolve(train_c, train_s);
    const TrainResult result = train(rs.train);
    for (const auto& [step, ratio] : result.eval_history) {
      std::cout << "step " << step << " eval_ratio " << format_float(ratio) << '\n';
    }
    std::cout << "checkpoint " << rs.train.checkpoint_path << '\n';
    return kOk;
  }

  if (*e) {
    const RunSettings rs = resolve(eval_c, eval_s);
    const auto paths = gather_instances(eval_files, eval_corpus);
    const auto ckpt = maybe_checkpoint(eval_ckpt, eval_solvers);
    std::vector<Instance> instances;
    for (const auto& path : paths) instances.push_back(load_instance(path));
    const ComparisonTable table =
        evaluate(instances, rs.energy, eval_solvers, rs.aco, ckpt ? &ckpt->actor : nullptr);
    emit(eval_out, comparison_csv(table));
    return kOk;
  }

  if (*c) {
    const RunSettings rs = resolve(cmp_c, cmp_s);
    const auto ckpt = maybe_checkpoint(cmp_ckpt, cmp_solvers);
    const PolicyParams* policy = ckpt ? &ckpt->actor : nullptr;
    std::vector<Instance> instances;
    for (const auto& path : list_instance_files(cmp_corpus)) instances.push_back(load_instance(path));
    if (instances.empty()) throw UsageError("corpus " + cmp_corpus + " holds no instances");
    const auto omegas = parse_list(cmp_omegas);
    fs::create_directories(cmp_out_dir);
    const fs::path dir(cmp_out_dir);
    write_text_file((dir / "omega_sweep.csv").string(),
                    sweep_csv(omega_sweep(instances, rs.energy, omegas, cmp_solvers, rs.aco, policy),
                              cmp_solvers));
    write_text_file((dir / "k_sweep.csv").string(),
                    sweep_csv(k_sweep(instances, rs.energy, cmp_solvers, rs.aco, policy), cmp_solvers));
    write_text_file((dir / "ratios.csv").string(),
                    comparison_csv(evaluate(instances, rs.energy, cmp_solvers, rs.aco, policy)));
    std::cout << "wrote " << (dir / "omega_sweep.csv").string() << ", "
              << (dir / "k_sweep.csv").string() << ", " << (dir / "ratios.csv").string() << '\n';
    return kOk;
  }

  if (*p) {
    const RunSettings rs = resolve(plot_c, plot_s);
    const auto ckpt = maybe_checkpoint(plot_ckpt, {plot_solver});
    const Instance inst = load_instance(plot_instance);
    const SolveReport rep = run_solver(plot_solver, inst, rs.energy, rs.aco, ckpt ? &ckpt->actor : nullptr);
    write_svg(inst, rep, plot_out);
    std::cout << plot_out << '\n';
    return kOk;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kCapacity;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const ParseError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}
