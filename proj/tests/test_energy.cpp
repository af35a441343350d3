#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "uavgtsp/energy.hpp"
#include "uavgtsp/errors.hpp"
#include "uavgtsp/instances.hpp"
#include "uavgtsp/rng.hpp"

using namespace uavgtsp;

// Values for the default parameters evaluated independently of the library
// (double-precision scripted evaluation of the closed forms) and frozen.
namespace oracle {
constexpr double kLos = 0.5243344860;       // 1 / (1 + 10 e^-2.4)
constexpr double kFreeSpaceDb = 108.6626583;  // 30 log10(4 pi 2e9 50 / 3e8)
constexpr double kPathLossDb = 118.7003030;  // + 1 * P_LoS + 20 * P_NLoS
constexpr double kRate = 5.448074182e6;    // 1e6 log2(1 + 10^(16.2997 / 10))
constexpr double kHover = 9.774085870;        // sqrt(4.9^3 / (2 pi 0.04 4 1.225))
constexpr double kCrossover = 87.70580193;    // sqrt(10 / 0.0013)
}  // namespace oracle

TEST_CASE("channel quantities match hand evaluation") {
  const EnergyParams p;
  CHECK(elevation_deg(p) == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(std::abs(los_probability(p) - 0.5244) < 1e-3);
  CHECK(los_probability(p) == doctest::Approx(oracle::kLos).epsilon(1e-9));
  CHECK(std::abs(avg_path_loss_db(p) - 118.7) < 0.2);
  CHECK(avg_path_loss_db(p) == doctest::Approx(oracle::kPathLossDb).epsilon(1e-9));
  CHECK(data_rate(p) == doctest::Approx(oracle::kRate).epsilon(1e-9));
  CHECK(std::abs(data_rate(p) / 5.4e6 - 1.0) < 0.1);
}

TEST_CASE("channel limit cases") {
  EnergyParams p;
  p.beta = 1e6;  // beta -> infinity
  CHECK(los_probability(p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(avg_path_loss_db(p) == doctest::Approx(oracle::kFreeSpaceDb + p.mu_los_db).epsilon(1e-9));

  p.beta = 0.0;
  CHECK(los_probability(p) == doctest::Approx(1.0 / 11.0).epsilon(1e-15));

  EnergyParams q;
  q.mu_los_db = q.mu_nlos_db = 0.0;
  CHECK(avg_path_loss_db(q) == doctest::Approx(oracle::kFreeSpaceDb).epsilon(1e-9));
}

TEST_CASE("rate scales linearly in bandwidth at fixed SNR and vanishes with SNR") {
  const EnergyParams p;
  EnergyParams wide = p;
  wide.bandwidth *= 2.0;
  wide.ch_tx_power *= 2.0;  // noise power doubled too, SNR unchanged
  CHECK(data_rate(wide) == doctest::Approx(2.0 * data_rate(p)).epsilon(1e-12));

  EnergyParams quiet = p;
  quiet.ch_tx_power = 1e-30;
  CHECK(data_rate(quiet) < 1e-6);
}

TEST_CASE("propulsion power") {
  EnergyParams p;
  CHECK(std::abs(move_power(p, 0.0) - 9.77) < 0.05);
  CHECK(hover_power(p) == doctest::Approx(oracle::kHover).epsilon(1e-9));
  CHECK(move_power(p, 15.0) == doctest::Approx(hover_power(p) + 5.0).epsilon(1e-15));
  CHECK_THROWS_AS(move_power(p, -0.1), DomainError);
  CHECK_THROWS_AS(move_power(p, 15.01), DomainError);
  EnergyParams s = p;
  s.p_static = 2.0;
  CHECK(move_power(s, 0.0) == doctest::Approx(hover_power(p) + 2.0).epsilon(1e-15));
}

TEST_CASE("collection energy") {
  EnergyParams p;
  const double r = data_rate(p);
  CHECK(collection_energy(p, 2) ==
        doctest::Approx(p.msg_bits / r * (hover_power(p) + p.p_com)).epsilon(1e-14));
  CHECK(collection_energy(p, 20) ==
        doctest::Approx(19.0 * 8e6 / oracle::kRate * (oracle::kHover + 0.0126)).epsilon(1e-3));

  EnergyParams one_second = p;
  one_second.p_com = 0.0;
  one_second.msg_bits = r;  // D_k = rate * 1 s for N = 2
  CHECK(collection_energy(one_second, 2) == doctest::Approx(hover_power(p)).epsilon(1e-14));
}

TEST_CASE("leg energy") {
  const EnergyParams p;
  CHECK(leg_energy(p, {3, 4}, {3, 4}) == 0.0);
  CHECK(std::abs(leg_energy(p, {0, 0}, {150, 0}) - 147.7) < 1.0);
  CHECK(leg_energy(p, {0, 0}, {90, 120}) ==
        doctest::Approx(10.0 * (oracle::kHover + 5.0)).epsilon(1e-4));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Point a{rng.uniform(0, 1000), rng.uniform(0, 1000)};
    const Point b{rng.uniform(0, 1000), rng.uniform(0, 1000)};
    const Point c{rng.uniform(0, 1000), rng.uniform(0, 1000)};
    CHECK(leg_energy(p, a, c) <= leg_energy(p, a, b) + leg_energy(p, b, c) + 1e-9);
  }
}

TEST_CASE("radio model") {
  const EnergyParams p;
  CHECK(std::abs(crossover_distance(p) - 87.7) < 0.1);
  CHECK(crossover_distance(p) == doctest::Approx(oracle::kCrossover).epsilon(1e-9));
  CHECK(member_tx_energy(p, 0.0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(ch_rx_energy(p) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(member_tx_energy(p, 50.0) == doctest::Approx(0.6).epsilon(1e-12));
  // Multipath regime beyond d0: 0.4 + 8e6 * 1.3e-15 * 100^4.
  CHECK(member_tx_energy(p, 100.0) == doctest::Approx(0.4 + 8e6 * 0.0013e-12 * 1e8).epsilon(1e-12));
  // Continuous at the crossover.
  const double d0 = crossover_distance(p);
  CHECK(member_tx_energy(p, d0 * (1 - 1e-12)) ==
        doctest::Approx(member_tx_energy(p, d0 * (1 + 1e-12))).epsilon(1e-9));
}

TEST_CASE("ground cluster energy sums members, receptions and the uplink") {
  const EnergyParams p;
  const Cluster cluster{{0, 0}, {30, 40}, {0, 100}};
  // CH = node 0: members at 50 m (free space) and 100 m (multipath).
  const double members = member_tx_energy(p, 50.0) + member_tx_energy(p, 100.0);
  const double rx = 2 * p.msg_bits * p.e_elec;
  CHECK(ground_intra_energy(p, cluster, 0) == doctest::Approx(members + rx).epsilon(1e-14));
  const double uplink = p.ch_tx_power * 2 * p.msg_bits / data_rate(p);
  CHECK(ch_uplink_energy(p, 3) == doctest::Approx(uplink).epsilon(1e-14));
  CHECK(ground_cluster_energy(p, cluster, 0) == doctest::Approx(members + rx + uplink).epsilon(1e-14));
}

namespace {

Instance two_cluster_symmetric() {
  Instance inst;
  inst.depot = {500, 0};
  inst.centers = {{300, 500}, {700, 500}};
  inst.clusters = {{{300, 500}, {320, 520}}, {{700, 500}, {680, 520}}};
  return inst;
}

}  // namespace

TEST_CASE("weighted objective") {
  EnergyParams p;
  GenerateOptions opt;
  opt.seed = 77;
  const Instance inst = generate_instance(opt);
  Tour tour;
  for (std::size_t c = 0; c < inst.num_clusters(); ++c) tour.stops.push_back({c, c % 3});

  const EnergyBreakdown b = total_weighted_energy(p, inst, tour);
  CHECK(b.total_weighted == doctest::Approx(recompose(b, p.omega)).epsilon(1e-12));
  CHECK(b.total_weighted ==
        doctest::Approx(0.5 * (b.ground_intra + b.ground_ch_tx) + 0.5 * (b.uav_flight + b.uav_collect))
            .epsilon(1e-12));

  // Independent recomputation of the flight term over the closed loop.
  double flight = 0.0;
  Point at = inst.depot;
  for (const Stop& s : tour.stops) {
    flight += leg_energy(p, at, inst.clusters[s.cluster][s.node]);
    at = inst.clusters[s.cluster][s.node];
  }
  flight += leg_energy(p, at, inst.depot);
  CHECK(b.uav_flight == doctest::Approx(flight).epsilon(1e-12));
  CHECK(b.uav_collect ==
        doctest::Approx(inst.num_clusters() * collection_energy(p, inst.cluster_size())).epsilon(1e-12));

  p.omega = 1.0;
  const EnergyBreakdown g = total_weighted_energy(p, inst, tour);
  CHECK(g.total_weighted == doctest::Approx(g.ground_intra + g.ground_ch_tx).epsilon(1e-12));
  p.omega = 0.0;
  const EnergyBreakdown u = total_weighted_energy(p, inst, tour);
  CHECK(u.total_weighted == doctest::Approx(u.uav_flight + u.uav_collect).epsilon(1e-12));

  Tour missing = tour;
  missing.stops.pop_back();
  CHECK_THROWS_AS(total_weighted_energy(p, inst, missing), ValidationError);
  Tour repeated = tour;
  repeated.stops.back().cluster = 0;
  CHECK_THROWS_AS(total_weighted_energy(p, inst, repeated), ValidationError);
}

TEST_CASE("objective is invariant under reversing the visiting order") {
  const EnergyParams p;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GenerateOptions opt;
    opt.seed = seed;
    const Instance inst = generate_instance(opt);
    Tour tour;
    for (std::size_t c = 0; c < inst.num_clusters(); ++c) tour.stops.push_back({c, (c + seed) % 20});
    Tour reversed{{tour.stops.rbegin(), tour.stops.rend()}};
    CHECK(total_weighted_energy(p, inst, tour).total_weighted ==
          doctest::Approx(total_weighted_energy(p, inst, reversed).total_weighted).epsilon(1e-12));
  }
  const Instance sym = two_cluster_symmetric();
  const Tour a{{{0, 0}, {1, 0}}}, b{{{1, 0}, {0, 0}}};
  CHECK(total_weighted_energy(p, sym, a).total_weighted ==
        doctest::Approx(total_weighted_energy(p, sym, b).total_weighted).epsilon(1e-14));
}

TEST_CASE("flight energy strictly decreases with speed") {
  GenerateOptions opt;
  opt.seed = 5;
  const Instance inst = generate_instance(opt);
  Tour tour;
  for (std::size_t c = 0; c < inst.num_clusters(); ++c) tour.stops.push_back({c, 0});
  double prev = std::numeric_limits<double>::infinity();
  for (double v : {5.0, 10.0, 15.0}) {
    EnergyParams p;
    p.v_uav = v;
    const double flight = total_weighted_energy(p, inst, tour).uav_flight;
    CHECK(flight < prev);
    prev = flight;
  }
}

TEST_CASE("weighted cost tables agree with the direct formulas") {
  const EnergyParams p;
  GenerateOptions opt;
  opt.seed = 9;
  const Instance inst = generate_instance(opt);
  const WeightedCosts costs(p, inst);
  const Point from{123, 456};
  for (std::size_t c = 0; c < inst.num_clusters(); ++c) {
    for (std::size_t n = 0; n < inst.cluster_size(); ++n) {
      const double direct = 0.5 * ground_cluster_energy(p, inst.clusters[c], n) +
                            0.5 * (leg_energy(p, from, inst.clusters[c][n]) +
                                   collection_energy(p, inst.cluster_size()));
      CHECK(costs.entry_cost(from, c, n) == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("parameter validation") {
  EnergyParams p;
  p.validate();
  p.omega = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.v_uav = 20.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.uav_mass = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.p_static = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("config text round trip and errors") {
  EnergyParams p;
  p.omega = 0.3;
  p.altitude = 61.25;
  p.eps_mp = 1.7e-15;
  const EnergyParams back = parse_energy_config(to_config_text(p));
  CHECK(back == p);
  CHECK(params_fingerprint(back) == params_fingerprint(p));
  CHECK(params_fingerprint(EnergyParams{}) != params_fingerprint(p));

  const EnergyParams partial = parse_energy_config("# comment\n omega = 0.9 \n\nv_uav=10\n");
  CHECK(partial.omega == 0.9);
  CHECK(partial.v_uav == 10.0);
  CHECK(partial.altitude == EnergyParams{}.altitude);

  CHECK_THROWS_AS(parse_energy_config("omega = abc\n"), ParseError);
  CHECK_THROWS_AS(parse_energy_config("not_a_key = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_energy_config("omega 0.3\n"), ParseError);
  CHECK_THROWS_WITH_AS(parse_energy_config("omega = 0.5\nbogus = 2\n"),
                       doctest::Contains("line 2"), ParseError);
  CHECK(energy_param_keys().size() == 26);

  const auto path = (std::filesystem::temp_directory_path() / "uavgtsp_energy.cfg").string();
  save_energy_config(p, path);
  CHECK(load_energy_config(path) == p);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_energy_config("/nonexistent/dir/x.cfg"), IoError);
}
