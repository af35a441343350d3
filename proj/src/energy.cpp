#include "uavgtsp/energy.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>

#include "uavgtsp/errors.hpp"

namespace uavgtsp {

namespace {

struct ParamKey {
  const char* name;
  double EnergyParams::*field;
};

constexpr std::array<ParamKey, 26> kKeys{{
    {"eta", &EnergyParams::eta},
    {"beta", &EnergyParams::beta},
    {"path_loss_exponent", &EnergyParams::path_loss_exponent},
    {"carrier_freq", &EnergyParams::carrier_freq},
    {"light_speed", &EnergyParams::light_speed},
    {"mu_los_db", &EnergyParams::mu_los_db},
    {"mu_nlos_db", &EnergyParams::mu_nlos_db},
    {"ch_tx_power", &EnergyParams::ch_tx_power},
    {"bandwidth", &EnergyParams::bandwidth},
    {"noise_density_dbm_hz", &EnergyParams::noise_density_dbm_hz},
    {"altitude", &EnergyParams::altitude},
    {"uav_mass", &EnergyParams::uav_mass},
    {"gravity", &EnergyParams::gravity},
    {"prop_radius", &EnergyParams::prop_radius},
    {"prop_count", &EnergyParams::prop_count},
    {"air_density", &EnergyParams::air_density},
    {"p_full", &EnergyParams::p_full},
    {"p_static", &EnergyParams::p_static},
    {"v_full", &EnergyParams::v_full},
    {"v_uav", &EnergyParams::v_uav},
    {"p_com", &EnergyParams::p_com},
    {"e_elec", &EnergyParams::e_elec},
    {"eps_fs", &EnergyParams::eps_fs},
    {"eps_mp", &EnergyParams::eps_mp},
    {"msg_bits", &EnergyParams::msg_bits},
    {"omega", &EnergyParams::omega},
}};

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void EnergyParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string("energy param ") + name + " must be > 0");
    }
  };
  positive(eta, "eta");
  positive(path_loss_exponent, "path_loss_exponent");
  positive(carrier_freq, "carrier_freq");
  positive(light_speed, "light_speed");
  positive(ch_tx_power, "ch_tx_power");
  positive(bandwidth, "bandwidth");
  positive(altitude, "altitude");
  positive(uav_mass, "uav_mass");
  positive(gravity, "gravity");
  positive(prop_radius, "prop_radius");
  positive(prop_count, "prop_count");
  positive(air_density, "air_density");
  positive(p_full, "p_full");
  positive(v_full, "v_full");
  positive(v_uav, "v_uav");
  positive(p_com, "p_com");
  positive(e_elec, "e_elec");
  positive(eps_fs, "eps_fs");
  positive(eps_mp, "eps_mp");
  positive(msg_bits, "msg_bits");
  if (!(beta >= 0.0)) throw ValidationError("energy param beta must be >= 0");
  if (!(mu_los_db >= 0.0) || !(mu_nlos_db >= 0.0)) {
    throw ValidationError("energy params mu_los_db/mu_nlos_db must be >= 0");
  }
  if (!(p_static >= 0.0)) throw ValidationError("energy param p_static must be >= 0");
  if (!std::isfinite(noise_density_dbm_hz)) {
    throw ValidationError("energy param noise_density_dbm_hz must be finite");
  }
  if (v_uav > v_full) throw ValidationError("energy param v_uav must not exceed v_full");
  if (!(omega >= 0.0 && omega <= 1.0)) throw ValidationError("omega must lie in [0, 1]");
}

double elevation_deg(const EnergyParams& p) {
  // The hover point is straight above the CH, so d_k == H.
  const double d = p.altitude;
  return std::asin(p.altitude / d) * 180.0 / std::numbers::pi;
}

double los_probability(const EnergyParams& p) {
  const double tau = elevation_deg(p);
  return 1.0 / (1.0 + p.eta * std::exp(-p.beta * (tau - p.eta)));
}

double avg_path_loss_db(const EnergyParams& p) {
  const double p_los = los_probability(p);
  const double free_space = 10.0 * p.path_loss_exponent *
                            std::log10(4.0 * std::numbers::pi * p.carrier_freq * p.altitude /
                                       p.light_speed);
  return p_los * (free_space + p.mu_los_db) + (1.0 - p_los) * (free_space + p.mu_nlos_db);
}

double data_rate(const EnergyParams& p) {
  const double loss = db_to_linear(avg_path_loss_db(p));
  const double noise_w =
      db_to_linear(p.noise_density_dbm_hz + 10.0 * std::log10(p.bandwidth)) * 1e-3;
  return p.bandwidth * std::log2(1.0 + p.ch_tx_power / (loss * noise_w));
}

double move_power(const EnergyParams& p, double v) {
  if (!(v >= 0.0 && v <= p.v_full)) {
    throw DomainError("move_power: speed " + std::to_string(v) + " outside [0, v_full]");
  }
  const double weight = p.uav_mass * p.gravity;
  const double induced = std::sqrt(weight * weight * weight /
                                   (2.0 * std::numbers::pi * p.prop_radius * p.prop_radius *
                                    p.prop_count * p.air_density));
  return induced + (p.p_full - p.p_static) / p.v_full * v + p.p_static;
}

double hover_power(const EnergyParams& p) { return move_power(p, 0.0); }

double cluster_payload_bits(const EnergyParams& p, std::size_t cluster_size) {
  return static_cast<double>(cluster_size - 1) * p.msg_bits;
}

double collection_energy(const EnergyParams& p, std::size_t cluster_size) {
  return cluster_payload_bits(p, cluster_size) / data_rate(p) * (hover_power(p) + p.p_com);
}

double leg_energy(const EnergyParams& p, Point from, Point to) {
  return distance(from, to) / p.v_uav * move_power(p, p.v_uav);
}

double crossover_distance(const EnergyParams& p) { return std::sqrt(p.eps_fs / p.eps_mp); }

double member_tx_energy(const EnergyParams& p, double d) {
  const double amp = d <= crossover_distance(p) ? p.eps_fs * d * d : p.eps_mp * d * d * d * d;
  return p.msg_bits * p.e_elec + p.msg_bits * amp;
}

double ch_rx_energy(const EnergyParams& p) { return p.msg_bits * p.e_elec; }

double ch_uplink_energy(const EnergyParams& p, std::size_t cluster_size) {
  return p.ch_tx_power * cluster_payload_bits(p, cluster_size) / data_rate(p);
}

double ground_intra_energy(const EnergyParams& p, const Cluster& cluster, std::size_t ch) {
  const Point head = cluster.at(ch);
  double total = 0.0;
  for (std::size_t n = 0; n < cluster.size(); ++n) {
    if (n == ch) continue;
    total += member_tx_energy(p, distance(cluster[n], head)) + ch_rx_energy(p);
  }
  return total;
}

double ground_cluster_energy(const EnergyParams& p, const Cluster& cluster, std::size_t ch) {
  return ground_intra_energy(p, cluster, ch) + ch_uplink_energy(p, cluster.size());
}

double recompose(const EnergyBreakdown& b, double omega) {
  return omega * (b.ground_intra + b.ground_ch_tx) +
         (1.0 - omega) * (b.uav_flight + b.uav_collect);
}

EnergyBreakdown total_weighted_energy(const EnergyParams& p, const Instance& instance,
                                      const Tour& tour) {
  validate_tour(instance, tour);
  EnergyBreakdown b;
  const std::size_t n = instance.cluster_size();
  const double collect = collection_energy(p, n);
  const double uplink = ch_uplink_energy(p, n);
  Point at = instance.depot;
  for (const Stop& s : tour.stops) {
    const Cluster& cluster = instance.clusters[s.cluster];
    const Point head = cluster[s.node];
    b.uav_flight += leg_energy(p, at, head);
    b.uav_collect += collect;
    b.ground_intra += ground_intra_energy(p, cluster, s.node);
    b.ground_ch_tx += uplink;
    at = head;
  }
  b.uav_flight += leg_energy(p, at, instance.depot);
  b.total_weighted = recompose(b, p.omega);
  return b;
}

WeightedCosts::WeightedCosts(const EnergyParams& params, const Instance& instance)
    : params_(params),
      instance_(&instance),
      num_clusters_(instance.num_clusters()),
      cluster_size_(instance.cluster_size()) {
  params_.validate();
  leg_energy_per_meter_ = move_power(params_, params_.v_uav) / params_.v_uav;
  const double collect = collection_energy(params_, cluster_size_);
  const double w = params_.omega;
  vertex_.resize(num_clusters_ * cluster_size_);
  for (std::size_t k = 0; k < num_clusters_; ++k) {
    for (std::size_t v = 0; v < cluster_size_; ++v) {
      vertex_[k * cluster_size_ + v] =
          w * ground_cluster_energy(params_, instance.clusters[k], v) + (1.0 - w) * collect;
    }
  }
}

std::vector<std::string> energy_param_keys() {
  std::vector<std::string> keys;
  for (const auto& k : kKeys) keys.emplace_back(k.name);
  return keys;
}

bool set_energy_param(EnergyParams& p, const std::string& key, double value) {
  for (const auto& k : kKeys) {
    if (key == k.name) {
      p.*(k.field) = value;
      return true;
    }
  }
  return false;
}

std::string to_config_text(const EnergyParams& p) {
  std::ostringstream out;
  out << "# uavgtsp energy parameters, SI units\n";
  char buf[64];
  for (const auto& k : kKeys) {
    std::snprintf(buf, sizeof buf, "%.17g", p.*(k.field));
    out << k.name << " = " << buf << "\n";
  }
  return out.str();
}

EnergyParams parse_energy_config(const std::string& text, EnergyParams base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("energy config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    double parsed = 0.0;
    try {
      std::size_t used = 0;
      parsed = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ParseError("energy config line " + std::to_string(line_no) + ": bad number '" +
                       value + "' for " + key);
    }
    if (!set_energy_param(base, key, parsed)) {
      throw ParseError("energy config line " + std::to_string(line_no) + ": unknown key '" +
                       key + "'");
    }
  }
  base.validate();
  return base;
}

EnergyParams load_energy_config(const std::string& path, EnergyParams base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open energy config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_energy_config(buf.str(), base);
}

void save_energy_config(const EnergyParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write energy config " + path);
  out << to_config_text(p);
  if (!out) throw IoError("write failed for " + path);
}

std::string params_fingerprint(const EnergyParams& p) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : to_config_text(p)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace uavgtsp
