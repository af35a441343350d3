#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uavgtsp/bench.hpp"
#include "uavgtsp/errors.hpp"
#include "uavgtsp/exact.hpp"
#include "uavgtsp/instances.hpp"

using namespace uavgtsp;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Half a unit in the 9th significant digit, the resolution of the CSV.
double print_resolution(double x) {
  if (x == 0.0) return 0.0;
  return 0.5 * std::pow(10.0, std::floor(std::log10(std::abs(x))) - 8);
}

// Recomputes the breakdown from the primitives, not total_weighted_energy.
EnergyBreakdown recompute(const EnergyParams& p, const Instance& inst, const Tour& tour) {
  EnergyBreakdown b;
  Point at = inst.depot;
  for (const Stop& s : tour.stops) {
    const Point next = inst.clusters[s.cluster][s.node];
    b.uav_flight += leg_energy(p, at, next);
    b.uav_collect += collection_energy(p, inst.cluster_size());
    b.ground_intra += ground_intra_energy(p, inst.clusters[s.cluster], s.node);
    b.ground_ch_tx += ch_uplink_energy(p, inst.cluster_size());
    at = next;
  }
  b.uav_flight += leg_energy(p, at, inst.depot);
  b.total_weighted = p.omega * (b.ground_intra + b.ground_ch_tx) + (1 - p.omega) * (b.uav_flight + b.uav_collect);
  return b;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("uavgtsp_bench_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

int cli(const std::string& args, const std::string& out_file = "") {
  std::string cmd = std::string(UAVGTSP_CLI_PATH) + " " + args;
  cmd += out_file.empty() ? " >/dev/null 2>&1" : " >" + out_file + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("floats carry nine significant digits") {
  CHECK(format_float(1234.56789012) == "1234.56789");
  CHECK(format_float(0.000123456789123) == "0.000123456789");
  CHECK(format_float(1.0) == "1");
  CHECK(format_float(std::nan("")) == "nan");
  CHECK(format_float(INFINITY) == "inf");
  CHECK(format_float(-INFINITY) == "-inf");
}

TEST_CASE("every report CSV row recomputes from (instance, tour, params)") {
  const std::string header = report_csv_header();
  const auto cols = split(header);
  REQUIRE(cols.size() == 15);
  CHECK(cols.front() == "schema_version");
  CHECK(cols.back() == "tour");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GenerateOptions opt;
    opt.seed = seed;
    opt.num_clusters = 3 + seed % 4;
    const Instance inst = generate_instance(opt);
    EnergyParams p;
    p.omega = 0.1 * static_cast<double>(seed);
    for (const SolveReport& rep : {solve_exact(inst, p), solve_greedy(inst, p)}) {
      const auto f = split(report_csv_row("i" + std::to_string(seed), inst, rep));
      REQUIRE(f.size() == cols.size());
      CHECK(f[0] == std::to_string(kCsvSchemaVersion));
      CHECK(f[2] == rep.solver);
      CHECK(std::stoul(f[3]) == inst.num_clusters());
      CHECK(std::stod(f[5]) == doctest::Approx(p.omega).epsilon(1e-9));
      CHECK(f[7] == params_fingerprint(p));
      const Tour tour = parse_tour(f[14]);
      CHECK(tour == rep.tour);
      const EnergyBreakdown b = recompute(p, inst, tour);
      const double expect[5] = {b.total_weighted, b.ground_intra, b.ground_ch_tx, b.uav_flight, b.uav_collect};
      for (int c = 0; c < 5; ++c) {
        const double printed = std::stod(f[8 + c]);
        CAPTURE(cols[8 + c]);
        CHECK(std::abs(printed - expect[c]) <= print_resolution(expect[c]) + 1e-9 * std::abs(expect[c]));
      }
    }
  }
}

TEST_CASE("comparison and sweep CSV shapes") {
  std::vector<Instance> instances;
  for (std::uint64_t s = 0; s < 4; ++s) {
    GenerateOptions opt;
    opt.seed = s;
    opt.num_clusters = 3 + s % 2;
    opt.cluster_size = 5;
    instances.push_back(generate_instance(opt));
  }
  AcoConfig aco;
  aco.n_iterations = 5;
  const EnergyParams p;
  const ComparisonTable t = evaluate(instances, p, {"greedy"}, aco, nullptr);
  const auto rows = lines_of(comparison_csv(t));
  REQUIRE(rows.size() == 1 + instances.size() + 1);
  CHECK(rows.front() == "instance,energy_exact,ratio_exact,seconds_exact,energy_greedy,ratio_greedy,seconds_greedy");
  CHECK(split(rows.back()).front() == "mean");

  const auto omega = omega_sweep(instances, p, {0.0, 0.9}, {"greedy"}, aco, nullptr);
  REQUIRE(omega.size() == 4);  // 2 omegas x 2 distinct K
  CHECK(omega[0].omega == 0.0);
  CHECK(omega[0].num_clusters == 3);
  CHECK(omega[1].num_clusters == 4);
  CHECK(omega[3].omega == 0.9);
  for (const SweepPoint& pt : omega) {
    CHECK(pt.instances == 2);
    CHECK(pt.mean_ratio.at("exact") == 1.0);
    CHECK(pt.mean_ratio.at("greedy") >= 1.0 - 1e-9);
  }
  const auto sweep_rows = lines_of(sweep_csv(omega, {"exact", "greedy"}));
  CHECK(sweep_rows.size() == 5);
  CHECK(split(sweep_rows.front())[0] == "schema_version");
}

TEST_CASE("plot geometry: K+1 segments, heads in their clusters, length matches the flight energy") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GenerateOptions opt;
    opt.seed = seed;
    opt.num_clusters = 2 + seed % 6;
    const Instance inst = generate_instance(opt);
    EnergyParams p;
    p.omega = 0.0;
    const SolveReport rep = solve_exact(inst, p);
    const PlotGeometry g = plot_geometry(inst, rep.tour);
    CHECK(g.segments() == inst.num_clusters() + 1);
    CHECK(g.polyline.front() == inst.depot);
    CHECK(g.polyline.back() == inst.depot);
    for (const Stop& h : g.heads) {
      const Point at = g.polyline[1 + (&h - g.heads.data())];
      const auto& members = inst.clusters[h.cluster];
      CHECK(std::find(members.begin(), members.end(), at) != members.end());
    }
    const double per_meter = move_power(p, p.v_uav) / p.v_uav;
    CHECK(g.length() == doctest::Approx(rep.energy.uav_flight / per_meter).epsilon(1e-12));

    const std::string svg = render_svg(inst, rep);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    std::size_t heads = 0;
    for (std::size_t at = svg.find("class=\"head\""); at != std::string::npos;
         at = svg.find("class=\"head\"", at + 1))
      ++heads;
    CHECK(heads == inst.num_clusters());
  }
  GenerateOptions opt;
  const Instance inst = generate_instance(opt);
  const SolveReport rep = solve_greedy(inst, EnergyParams{});
  CHECK_THROWS_AS(write_svg(inst, rep, "/nonexistent/dir/tour.svg"), IoError);
}

TEST_CASE("settings keys, config text and errors") {
  RunSettings s;
  apply_setting(s, "omega", "0.25");
  apply_setting(s, "aco.ants", "12");
  apply_setting(s, "train.batch_size", "8");
  CHECK(s.energy.omega == 0.25);
  CHECK(s.aco.n_ants == 12);
  CHECK(s.train.batch_size == 8);
  CHECK_THROWS_AS(apply_setting(s, "omegaa", "1"), ParseError);
  CHECK_THROWS_AS(apply_setting(s, "aco.ants", "-3"), ParseError);
  CHECK_THROWS_AS(apply_setting(s, "train.actor_lr", "fast"), ParseError);

  apply_config_text(s, "# comment\nomega = 0.75  # trailing\n\naco.iterations=9\n");
  CHECK(s.energy.omega == 0.75);
  CHECK(s.train.energy.omega == 0.75);
  CHECK(s.aco.n_iterations == 9);
  CHECK_THROWS_WITH_AS(apply_config_text(s, "omega = 0.1\nnonsense\n"), doctest::Contains("line 2"), ParseError);

  const auto keys = setting_keys();
  for (const std::string& k : {"omega", "aco.seed", "train.steps", "train.workers"})
    CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
  for (const std::string& k : keys) {
    if (k == "train.checkpoint" || k == "train.log") continue;  // path-valued
    RunSettings probe;
    CHECK_THROWS_AS(apply_setting(probe, k, "not-a-number"), ParseError);
  }
}

TEST_CASE("corpus generation and listing") {
  TempDir dir("corpus");
  GenerateOptions opt;
  opt.seed = 3;
  CHECK(generate_corpus(opt, 0, dir.path.string()).empty());
  CHECK(list_instance_files(dir.path.string()).empty());
  const auto paths = generate_corpus(opt, 3, dir.path.string());
  CHECK(paths.size() == 3);
  CHECK(list_instance_files(dir.path.string()) == paths);
  GenerateOptions child = opt;
  child.seed = derive_seed(opt.seed, 1);
  CHECK(load_instance(paths[1]) == generate_instance(child));
  CHECK_THROWS_AS(list_instance_files(dir / "missing"), IoError);
}

TEST_CASE("cli: generate is deterministic; count=0 writes nothing") {
  TempDir dir("cli_gen");
  CHECK(cli("generate --count 0 --out-dir " + (dir / "empty")) == 0);
  CHECK((!fs::exists(dir / "empty") || fs::is_empty(dir / "empty")));
  CHECK(cli("generate --count 3 -K 5 -N 4 --seed 9 --out-dir " + (dir / "a")) == 0);
  CHECK(cli("generate --count 3 -K 5 -N 4 --seed 9 --out-dir " + (dir / "b")) == 0);
  for (const std::string& f : {"instance_0000.json", "instance_0001.json", "instance_0002.json"}) {
    CHECK(read_file(dir.path / "a" / f) == read_file(dir.path / "b" / f));
  }
  CHECK(load_instance((dir.path / "a" / "instance_0002.json").string()).num_clusters() == 5);
}

TEST_CASE("cli: exit codes") {
  TempDir dir("cli_codes");
  REQUIRE(cli("generate --count 1 -K 3 -N 3 --seed 1 --out-dir " + (dir / "c")) == 0);
  const std::string inst = dir / "c/instance_0000.json";

  CHECK(cli("") == 2);
  CHECK(cli("generate --clusters 0") == 2);
  CHECK(cli("generate --bogus") == 2);
  CHECK(cli("solve --instance " + inst + " --solver simplex") == 2);
  CHECK(cli("solve --instance " + inst + " --solver drl") == 2);
  CHECK(cli("solve") == 2);
  CHECK(cli("solve --instance " + inst + " --omega 1.5") == 3);
  CHECK(cli("solve --instance " + inst + " --set omegaa=1") == 3);

  {
    Instance bad = load_instance(inst);
    bad.clusters[1] = bad.clusters[0];
    bad.centers[1] = bad.centers[0];
    std::ofstream(dir / "overlap.json") << instance_to_json(bad);
  }
  CHECK(cli("solve --instance " + (dir / "overlap.json")) == 3);
  std::ofstream(dir / "truncated.json") << read_file(inst).substr(0, 40);
  CHECK(cli("solve --instance " + (dir / "truncated.json")) == 3);

  GenerateOptions big;
  big.num_clusters = 17;
  big.cluster_size = 2;
  big.zeta = 20.0;
  save_instance(generate_instance(big), dir / "big.json");
  CHECK(cli("solve --instance " + (dir / "big.json") + " --solver exact") == 4);

  CHECK(cli("solve --instance " + (dir / "missing.json")) == 5);
  CHECK(cli("plot --instance " + inst + " --out /nonexistent/dir/t.svg") == 5);
  CHECK(cli("solve --instance " + inst + " --config " + (dir / "nope.cfg")) == 5);
}

TEST_CASE("cli: solve is reproducible and the config file has the last word") {
  TempDir dir("cli_solve");
  REQUIRE(cli("generate --count 2 -K 4 -N 5 --seed 2 --out-dir " + (dir / "c")) == 0);
  const std::string args = "solve --corpus " + (dir / "c") + " --solver exact --solver greedy --out ";
  REQUIRE(cli(args + (dir / "a.csv")) == 0);
  REQUIRE(cli(args + (dir / "b.csv")) == 0);
  auto strip_clock = [](const std::string& text) {
    std::string out;
    for (const auto& line : lines_of(text)) {
      auto f = split(line);
      f[13].clear();
      for (const auto& x : f) out += x + ",";
      out += "\n";
    }
    return out;
  };
  const std::string a = read_file(dir.path / "a.csv");
  CHECK(lines_of(a).size() == 5);
  CHECK(strip_clock(a) == strip_clock(read_file(dir.path / "b.csv")));

  std::ofstream(dir / "run.cfg") << "omega = 0.7\n";
  REQUIRE(cli("solve --instance " + (dir / "c/instance_0000.json") + " --omega 0.2 --set omega=0.4 --config " +
                  (dir / "run.cfg") + " --out " + (dir / "o.csv")) == 0);
  CHECK(split(lines_of(read_file(dir.path / "o.csv"))[1])[5] == "0.7");
  REQUIRE(cli("solve --instance " + (dir / "c/instance_0000.json") + " --omega 0.2 --set omega=0.4 --out " +
              (dir / "o.csv")) == 0);
  CHECK(split(lines_of(read_file(dir.path / "o.csv"))[1])[5] == "0.4");
}

TEST_CASE("cli: train, then drl through solve, evaluate, compare and plot") {
  TempDir dir("cli_train");
  const std::string ck = dir / "ck.json";
  const std::string train = "train --steps 2 --batch-size 2 -K 3 -N 3 --embed-dim 4 --eval-every 1 "
                            "--eval-instances 2 --checkpoint " + ck;
  REQUIRE(cli(train + " --log " + (dir / "log.csv")) == 0);
  REQUIRE(fs::exists(ck));
  CHECK(load_checkpoint(ck).step == 2);
  CHECK(lines_of(read_file(dir.path / "log.csv")).size() == 4);
  CHECK(cli("train --steps 1") == 2);  // --checkpoint is required

  REQUIRE(cli("generate --count 2 -K 3 -N 3 --seed 4 --out-dir " + (dir / "c")) == 0);
  CHECK(cli("solve --corpus " + (dir / "c") + " --solver drl --checkpoint " + ck + " --out " + (dir / "s.csv")) == 0);
  CHECK(split(lines_of(read_file(dir.path / "s.csv"))[1])[2] == "drl");
  CHECK(cli("evaluate --corpus " + (dir / "c") + " --checkpoint " + ck + " --iterations 5 --out " +
            (dir / "e.csv")) == 0);
  CHECK(lines_of(read_file(dir.path / "e.csv")).size() == 4);
  CHECK(cli("compare --corpus " + (dir / "c") + " --iterations 5 --omegas 0,0.5 --out-dir " + (dir / "cmp")) == 0);
  for (const std::string& f : {"omega_sweep.csv", "k_sweep.csv", "ratios.csv"}) CHECK(fs::exists(dir.path / "cmp" / f));
  CHECK(cli("plot --instance " + (dir / "c/instance_0000.json") + " --solver drl --checkpoint " + ck + " --out " +
            (dir / "t.svg")) == 0);
  CHECK(read_file(dir.path / "t.svg").find("class=\"tour\"") != std::string::npos);
  CHECK(cli("solve --corpus " + (dir / "c") + " --solver greedy --plot-dir " + (dir / "plots")) == 0);
  CHECK(fs::exists(dir.path / "plots" / "instance_0001_greedy.svg"));
}
