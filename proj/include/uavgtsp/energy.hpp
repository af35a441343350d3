#pragma once

// Physical energy models for the UAV-aided clustered IoT network and the
// weighted joint objective.
//
// Geometry: the UAV hovers at altitude H directly above each cluster head,
// so the air-to-ground link is vertical (elevation 90 degrees) and the
// channel quantities are the same for every cluster head. Flight legs are
// horizontal distances between hover points.

#include <cstddef>
#include <string>
#include <vector>

#include "uavgtsp/problem.hpp"

namespace uavgtsp {

// All constants in SI units unless the name says otherwise. README lists the
// unit interpretation behind the less obvious defaults.
struct EnergyParams {
  // Air-to-ground channel.
  double eta = 10.0;
  double beta = 0.03;
  double path_loss_exponent = 3.0;
  double carrier_freq = 2e9;    // Hz
  double light_speed = 3e8;     // m/s
  double mu_los_db = 1.0;
  double mu_nlos_db = 20.0;
  double ch_tx_power = 0.12589254117941673;  // W (21 dBm)
  double bandwidth = 1e6;                     // Hz
  double noise_density_dbm_hz = -174.0;
  double altitude = 50.0;  // m

  // Rotary-wing propulsion.
  double uav_mass = 0.5;  // kg
  double gravity = 9.8;
  double prop_radius = 0.2;  // m
  double prop_count = 4.0;
  double air_density = 1.225;  // kg/m^3
  double p_full = 5.0;         // W
  double p_static = 0.0;       // W
  double v_full = 15.0;        // m/s
  double v_uav = 15.0;         // m/s
  double p_com = 0.0126;       // W

  // First-order radio model for intra-cluster traffic.
  double e_elec = 50e-9;      // J/bit
  double eps_fs = 10e-12;     // J/bit/m^2
  double eps_mp = 0.0013e-12; // J/bit/m^4
  double msg_bits = 8e6;      // bits per member message

  double omega = 0.5;

  // Throws ValidationError on out-of-range values.
  void validate() const;

  bool operator==(const EnergyParams&) const = default;
};

struct EnergyBreakdown {
  double ground_intra = 0.0;  // member transmit + CH receive
  double ground_ch_tx = 0.0;  // CH uplink to the UAV
  double uav_flight = 0.0;
  double uav_collect = 0.0;
  double total_weighted = 0.0;
};

// Elevation angle of the UAV seen from the CH, degrees (90 when hovering overhead).
double elevation_deg(const EnergyParams& p);
double los_probability(const EnergyParams& p);
double avg_path_loss_db(const EnergyParams& p);
// Achievable CH -> UAV rate, bits/s.
double data_rate(const EnergyParams& p);

// Propulsion power at speed v; throws DomainError outside [0, v_full].
double move_power(const EnergyParams& p, double v);
double hover_power(const EnergyParams& p);

// Bits a CH uplinks for a cluster of `cluster_size` nodes.
double cluster_payload_bits(const EnergyParams& p, std::size_t cluster_size);
// UAV hover + receive energy while collecting one cluster.
double collection_energy(const EnergyParams& p, std::size_t cluster_size);
double leg_energy(const EnergyParams& p, Point from, Point to);

// Free-space / multipath crossover distance of the radio model, m.
double crossover_distance(const EnergyParams& p);
// Energy for one member at distance d to send its message to the CH.
double member_tx_energy(const EnergyParams& p, double d);
double ch_rx_energy(const EnergyParams& p);
double ch_uplink_energy(const EnergyParams& p, std::size_t cluster_size);
// Member transmit plus CH receive energy for the whole cluster.
double ground_intra_energy(const EnergyParams& p, const Cluster& cluster, std::size_t ch);
double ground_cluster_energy(const EnergyParams& p, const Cluster& cluster, std::size_t ch);

// Evaluates the weighted objective of a complete closed tour. Throws
// ValidationError if the tour is not a valid single loop over all clusters.
EnergyBreakdown total_weighted_energy(const EnergyParams& p, const Instance& instance,
                                      const Tour& tour);

double recompose(const EnergyBreakdown& b, double omega);

// Per-instance cost tables shared by every solver. The weighted energy of a
// tour splits into a cost for entering each chosen node (flight leg plus the
// node's vertex cost) and a final return leg, which is what makes the
// dynamic program and the constructive heuristics exact on the same model.
class WeightedCosts {
 public:
  WeightedCosts(const EnergyParams& params, const Instance& instance);

  std::size_t num_clusters() const { return num_clusters_; }
  std::size_t cluster_size() const { return cluster_size_; }
  const EnergyParams& params() const { return params_; }
  const Instance& instance() const { return *instance_; }

  Point node_point(std::size_t cluster, std::size_t node) const {
    return instance_->clusters[cluster][node];
  }
  // omega * ground + (1 - omega) * collection for choosing `node` as CH.
  double vertex_cost(std::size_t cluster, std::size_t node) const {
    return vertex_[cluster * cluster_size_ + node];
  }
  double weighted_leg(Point from, Point to) const {
    return (1.0 - params_.omega) * leg_energy_per_meter_ * distance(from, to);
  }
  // Cost of flying from `from` to node (cluster, node) and serving it there.
  double entry_cost(Point from, std::size_t cluster, std::size_t node) const {
    return weighted_leg(from, node_point(cluster, node)) + vertex_cost(cluster, node);
  }
  double return_cost(Point from) const { return weighted_leg(from, instance_->depot); }

 private:
  EnergyParams params_;
  const Instance* instance_;
  std::size_t num_clusters_;
  std::size_t cluster_size_;
  double leg_energy_per_meter_;
  std::vector<double> vertex_;
};

// Flat "key = value" config text. Unknown keys and bad numbers throw
// ParseError naming the line.
std::string to_config_text(const EnergyParams& p);
EnergyParams parse_energy_config(const std::string& text, EnergyParams base = {});
EnergyParams load_energy_config(const std::string& path, EnergyParams base = {});
void save_energy_config(const EnergyParams& p, const std::string& path);
// Sets one key; returns false if the key is unknown.
bool set_energy_param(EnergyParams& p, const std::string& key, double value);
std::vector<std::string> energy_param_keys();
// FNV-1a of the config text, hex.
std::string params_fingerprint(const EnergyParams& p);

}  // namespace uavgtsp
