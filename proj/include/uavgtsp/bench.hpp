#pragma once

// Result files and sweeps: report CSVs, solver comparisons over a corpus,
// and SVG renderings of a tour.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uavgtsp/heuristics.hpp"
#include "uavgtsp/instances.hpp"
#include "uavgtsp/policy.hpp"
#include "uavgtsp/report.hpp"
#include "uavgtsp/training.hpp"

namespace uavgtsp {

inline constexpr int kCsvSchemaVersion = 1;

// %.9g; "nan"/"inf" spelled out.
std::string format_float(double v);

// Report CSV, one row per (instance, solver):
//   schema_version, instance, solver, K, N, omega, seed, params_hash,
//   total_weighted, ground_intra, ground_ch_tx, uav_flight, uav_collect,
//   wall_clock, tour
// `tour` uses format_tour ("cluster:node|...").
std::string report_csv_header();
std::string report_csv_row(const std::string& instance, const Instance& inst,
                           const SolveReport& report);

// Per-instance comparison table: instance, then energy_<s>, ratio_<s> and
// seconds_<s> for each solver; the last row is the "mean" summary.
std::string comparison_csv(const ComparisonTable& table);

struct SweepPoint {
  std::size_t num_clusters = 0;
  double omega = 0.0;
  std::size_t instances = 0;
  std::map<std::string, double> mean_ratio;
  std::map<std::string, double> mean_seconds;
};

// Evaluates `instances` once per omega (other parameters from `energy`).
std::vector<SweepPoint> omega_sweep(const std::vector<Instance>& instances,
                                    const EnergyParams& energy, const std::vector<double>& omegas,
                                    const std::vector<std::string>& solvers, const AcoConfig& aco,
                                    const PolicyParams* policy);

// Groups instances by K and evaluates each group at energy.omega. Points
// come out in increasing K.
std::vector<SweepPoint> k_sweep(const std::vector<Instance>& instances, const EnergyParams& energy,
                                const std::vector<std::string>& solvers, const AcoConfig& aco,
                                const PolicyParams* policy);

// Columns: schema_version, K, omega, instances, then ratio_<s> and seconds_<s>.
std::string sweep_csv(const std::vector<SweepPoint>& points, const std::vector<std::string>& solvers);

// Instance files `instance_XXXX.json` under `dir`, sorted by name.
std::vector<std::string> list_instance_files(const std::string& dir);

// Writes `count` instances with seeds derive_seed(options.seed, i). Returns
// the paths written.
std::vector<std::string> generate_corpus(const GenerateOptions& options, std::size_t count,
                                         const std::string& dir);

// What the plot draws, separated from the SVG text so it can be checked.
struct PlotGeometry {
  std::vector<Point> polyline;  // depot, the K hovering points in tour order, depot
  std::vector<Stop> heads;      // highlighted cluster heads, tour order
  std::size_t segments() const { return polyline.empty() ? 0 : polyline.size() - 1; }
  double length() const;
};

PlotGeometry plot_geometry(const Instance& instance, const Tour& tour);
// Self-contained SVG: cluster boxes and nodes, highlighted heads, the depot
// and the closed tour.
std::string render_svg(const Instance& instance, const SolveReport& report);
// Throws IoError when the file cannot be written.
void write_svg(const Instance& instance, const SolveReport& report, const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

// Everything a CLI run can be configured with.
struct RunSettings {
  EnergyParams energy;
  AcoConfig aco;
  TrainConfig train;
};

// Sets one key: an EnergyParams key, "aco.<field>" or "train.<field>".
// Throws ParseError on an unknown key or a malformed value.
void apply_setting(RunSettings& settings, const std::string& key, const std::string& value);
// "key = value" lines, '#' starts a comment. Applied over whatever the
// settings already hold.
void apply_config_text(RunSettings& settings, const std::string& text);
void apply_config_file(RunSettings& settings, const std::string& path);
std::vector<std::string> setting_keys();

}  // namespace uavgtsp
