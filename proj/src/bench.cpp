#include "uavgtsp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uavgtsp/errors.hpp"
#include "uavgtsp/instances.hpp"
#include "uavgtsp/rng.hpp"

namespace uavgtsp {

namespace fs = std::filesystem;

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string report_csv_header() {
  return "schema_version,instance,solver,K,N,omega,seed,params_hash,total_weighted,"
         "ground_intra,ground_ch_tx,uav_flight,uav_collect,wall_clock,tour";
}

std::string report_csv_row(const std::string& instance, const Instance& inst,
                           const SolveReport& r) {
  std::ostringstream os;
  os << kCsvSchemaVersion << ',' << instance << ',' << r.solver << ',' << inst.num_clusters()
     << ',' << inst.cluster_size() << ',' << format_float(r.omega) << ',' << r.seed << ','
     << r.params_hash << ',' << format_float(r.energy.total_weighted) << ','
     << format_float(r.energy.ground_intra) << ',' << format_float(r.energy.ground_ch_tx) << ','
     << format_float(r.energy.uav_flight) << ',' << format_float(r.energy.uav_collect) << ','
     << format_float(r.wall_clock) << ',' << format_tour(r.tour);
  return os.str();
}

std::string comparison_csv(const ComparisonTable& table) {
  std::ostringstream os;
  os << "instance";
  for (const auto& s : table.solvers) os << ",energy_" << s << ",ratio_" << s << ",seconds_" << s;
  os << '\n';
  for (const auto& row : table.rows) {
    os << row.label;
    for (const auto& s : table.solvers) {
      os << ',' << format_float(row.energy.at(s)) << ',' << format_float(row.ratio.at(s)) << ','
         << format_float(row.seconds.at(s));
    }
    os << '\n';
  }
  return os.str();
}

namespace {

SweepPoint summarize(const ComparisonTable& table, std::size_t k, double omega, std::size_t count) {
  SweepPoint p;
  p.num_clusters = k;
  p.omega = omega;
  p.instances = count;
  p.mean_ratio = table.summary().ratio;
  p.mean_seconds = table.summary().seconds;
  return p;
}

}  // namespace

std::vector<SweepPoint> omega_sweep(const std::vector<Instance>& instances,
                                    const EnergyParams& energy, const std::vector<double>& omegas,
                                    const std::vector<std::string>& solvers, const AcoConfig& aco,
                                    const PolicyParams* policy) {
  std::vector<SweepPoint> out;
  for (double w : omegas) {
    EnergyParams p = energy;
    p.omega = w;
    p.validate();
    for (auto& group : k_sweep(instances, p, solvers, aco, policy)) out.push_back(std::move(group));
  }
  return out;
}

std::vector<SweepPoint> k_sweep(const std::vector<Instance>& instances, const EnergyParams& energy,
                                const std::vector<std::string>& solvers, const AcoConfig& aco,
                                const PolicyParams* policy) {
  std::map<std::size_t, std::vector<Instance>> groups;
  for (const auto& inst : instances) groups[inst.num_clusters()].push_back(inst);
  std::vector<SweepPoint> out;
  for (const auto& [k, group] : groups) {
    const ComparisonTable table = evaluate(group, energy, solvers, aco, policy);
    out.push_back(summarize(table, k, energy.omega, group.size()));
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points,
                      const std::vector<std::string>& solvers) {
  std::vector<std::string> names{"exact"};
  for (const auto& s : solvers) {
    if (s != "exact") names.push_back(s);
  }
  std::ostringstream os;
  os << "schema_version,K,omega,instances";
  for (const auto& s : names) os << ",ratio_" << s << ",seconds_" << s;
  os << '\n';
  for (const auto& p : points) {
    os << kCsvSchemaVersion << ',' << p.num_clusters << ',' << format_float(p.omega) << ','
       << p.instances;
    for (const auto& s : names) {
      os << ',' << format_float(p.mean_ratio.at(s)) << ',' << format_float(p.mean_seconds.at(s));
    }
    os << '\n';
  }
  return os.str();
}

std::vector<std::string> list_instance_files(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("instance_") && name.ends_with(".json")) {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> generate_corpus(const GenerateOptions& options, std::size_t count,
                                         const std::string& dir) {
  std::vector<std::string> paths;
  if (count == 0) return paths;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  for (std::size_t i = 0; i < count; ++i) {
    GenerateOptions opt = options;
    opt.seed = derive_seed(options.seed, i);
    char name[48];
    std::snprintf(name, sizeof name, "instance_%04zu.json", i);
    const std::string path = (fs::path(dir) / name).string();
    save_instance(generate_instance(opt), path);
    paths.push_back(path);
  }
  return paths;
}

double PlotGeometry::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) total += distance(polyline[i - 1], polyline[i]);
  return total;
}

PlotGeometry plot_geometry(const Instance& instance, const Tour& tour) {
  validate_tour(instance, tour);
  PlotGeometry g;
  g.polyline.push_back(instance.depot);
  for (const Stop& s : tour.stops) {
    g.polyline.push_back(instance.clusters[s.cluster][s.node]);
    g.heads.push_back(s);
  }
  g.polyline.push_back(instance.depot);
  return g;
}

std::string render_svg(const Instance& instance, const SolveReport& report) {
  const PlotGeometry g = plot_geometry(instance, report.tour);
  const double size = instance.area_size;
  const double margin = 0.05 * size;
  // Flip y so the origin sits bottom-left.
  auto px = [&](double x) { return format_float(x + margin); };
  auto py = [&](double y) { return format_float(size - y + margin); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << format_float(size + 2 * margin)
     << ' ' << format_float(size + 2 * margin) << "\" width=\"800\" height=\"800\">\n";
  os << "<title>" << report.solver << " tour, weighted energy "
     << format_float(report.energy.total_weighted) << " J</title>\n";
  os << "<rect x=\"" << px(0) << "\" y=\"" << py(size) << "\" width=\"" << format_float(size)
     << "\" height=\"" << format_float(size) << "\" fill=\"none\" stroke=\"#999\"/>\n";
  for (std::size_t c = 0; c < instance.num_clusters(); ++c) {
    const Point ctr = instance.centers[c];
    os << "<g class=\"cluster\" id=\"cluster-" << c << "\">\n";
    os << "<rect x=\"" << px(ctr.x - instance.zeta) << "\" y=\"" << py(ctr.y + instance.zeta)
       << "\" width=\"" << format_float(2 * instance.zeta) << "\" height=\""
       << format_float(2 * instance.zeta) << "\" fill=\"none\" stroke=\"#4a7\" stroke-dasharray=\"6 4\"/>\n";
    for (Point p : instance.clusters[c]) {
      os << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y)
         << "\" r=\"4\" fill=\"#4a7\"/>\n";
    }
    os << "</g>\n";
  }
  os << "<polyline class=\"tour\" fill=\"none\" stroke=\"#c33\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < g.polyline.size(); ++i) {
    os << (i ? " " : "") << px(g.polyline[i].x) << ',' << py(g.polyline[i].y);
  }
  os << "\"/>\n";
  for (const Stop& s : g.heads) {
    const Point p = instance.clusters[s.cluster][s.node];
    os << "<circle class=\"head\" data-cluster=\"" << s.cluster << "\" data-node=\"" << s.node
       << "\" cx=\"" << px(p.x) << "\" cy=\"" << py(p.y)
       << "\" r=\"9\" fill=\"none\" stroke=\"#c33\" stroke-width=\"3\"/>\n";
  }
  os << "<rect class=\"depot\" x=\"" << px(instance.depot.x - 12) << "\" y=\""
     << py(instance.depot.y + 12) << "\" width=\"24\" height=\"24\" fill=\"#236\"/>\n";
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

void write_svg(const Instance& instance, const SolveReport& report, const std::string& path) {
  write_text_file(path, render_svg(instance, report));
}

namespace {

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ParseError("setting " + key + ": bad number '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  if (!text.empty() && text[0] != '-') {
    try {
      v = std::stoull(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
  }
  if (used == 0 || used != text.size()) {
    throw ParseError("setting " + key + ": bad non-negative integer '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ParseError("setting " + key + ": expected true/false, got '" + text + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::vector<std::string> kAcoKeys{"aco.ants", "aco.iterations", "aco.evaporation",
                                        "aco.alpha", "aco.beta", "aco.seed"};
const std::vector<std::string> kTrainKeys{
    "train.batch_size", "train.steps",       "train.clusters",   "train.cluster_size",
    "train.zeta",       "train.actor_lr",    "train.critic_lr",  "train.seed",
    "train.embed_dim",  "train.eval_every",  "train.eval_instances", "train.checkpoint_every",
    "train.checkpoint", "train.log",         "train.resume",     "train.workers",
    "train.max_grad_norm"};

}  // namespace

std::vector<std::string> setting_keys() {
  std::vector<std::string> keys = energy_param_keys();
  keys.insert(keys.end(), kAcoKeys.begin(), kAcoKeys.end());
  keys.insert(keys.end(), kTrainKeys.begin(), kTrainKeys.end());
  return keys;
}

void apply_setting(RunSettings& s, const std::string& key, const std::string& value) {
  auto& a = s.aco;
  auto& t = s.train;
  if (key == "aco.ants") a.n_ants = parse_uint(key, value);
  else if (key == "aco.iterations") a.n_iterations = parse_uint(key, value);
  else if (key == "aco.evaporation") a.evaporation = parse_double(key, value);
  else if (key == "aco.alpha") a.pheromone_weight = parse_double(key, value);
  else if (key == "aco.beta") a.visibility_weight = parse_double(key, value);
  else if (key == "aco.seed") a.rng_seed = parse_uint(key, value);
  else if (key == "train.batch_size") t.batch_size = parse_uint(key, value);
  else if (key == "train.steps") t.n_steps = parse_uint(key, value);
  else if (key == "train.clusters") t.num_clusters = parse_uint(key, value);
  else if (key == "train.cluster_size") t.cluster_size = parse_uint(key, value);
  else if (key == "train.zeta") t.zeta = parse_double(key, value);
  else if (key == "train.actor_lr") t.actor_lr = parse_double(key, value);
  else if (key == "train.critic_lr") t.critic_lr = parse_double(key, value);
  else if (key == "train.seed") t.seed = parse_uint(key, value);
  else if (key == "train.embed_dim") t.embed_dim = parse_uint(key, value);
  else if (key == "train.eval_every") t.eval_every = parse_uint(key, value);
  else if (key == "train.eval_instances") t.eval_instances = parse_uint(key, value);
  else if (key == "train.checkpoint_every") t.checkpoint_every = parse_uint(key, value);
  else if (key == "train.checkpoint") t.checkpoint_path = value;
  else if (key == "train.log") t.log_path = value;
  else if (key == "train.resume") t.resume = parse_bool(key, value);
  else if (key == "train.workers") t.workers = parse_uint(key, value);
  else if (key == "train.max_grad_norm") t.max_grad_norm = parse_double(key, value);
  else {
    const auto keys = energy_param_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ParseError("unknown setting '" + key + "'");
    }
    set_energy_param(s.energy, key, parse_double(key, value));
  }
}

void apply_config_text(RunSettings& settings, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(number) + ": expected key = value");
    }
    try {
      apply_setting(settings, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  settings.train.energy = settings.energy;
}

void apply_config_file(RunSettings& settings, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(settings, buf.str());
}

}  // namespace uavgtsp
