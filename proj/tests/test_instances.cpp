#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uavgtsp/errors.hpp"
#include "uavgtsp/instances.hpp"

using namespace uavgtsp;

namespace {

// Independent restatement of the instance invariants.
bool satisfies_invariants(const Instance& inst, const GenerateOptions& opt) {
  if (inst.num_clusters() != opt.num_clusters || inst.centers.size() != opt.num_clusters) return false;
  for (std::size_t k = 0; k < inst.num_clusters(); ++k) {
    const Point c = inst.centers[k];
    if (!(c.x - opt.zeta > 0 && c.x + opt.zeta < opt.area_size)) return false;
    if (!(c.y - opt.zeta > 0 && c.y + opt.zeta < opt.area_size)) return false;
    if (inst.clusters[k].size() != opt.cluster_size) return false;
    for (const Point& p : inst.clusters[k]) {
      if (std::abs(p.x - c.x) > opt.zeta || std::abs(p.y - c.y) > opt.zeta) return false;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const Point d = inst.centers[j];
      const bool apart = std::abs(c.x - d.x) >= 2 * opt.zeta || std::abs(c.y - d.y) >= 2 * opt.zeta;
      if (!apart) return false;
    }
  }
  return true;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("uavgtsp_test_" + name);
}

}  // namespace

TEST_CASE("generation is deterministic in the options") {
  GenerateOptions opt;
  opt.seed = 1234;
  CHECK(generate_instance(opt) == generate_instance(opt));
  GenerateOptions other = opt;
  other.seed = 1235;
  CHECK_FALSE(generate_instance(opt) == generate_instance(other));
}

TEST_CASE("default instance matches the 1 km area with the depot at (500, 0)") {
  const Instance inst = generate_instance(GenerateOptions{});
  CHECK(inst.area_size == 1000.0);
  CHECK(inst.depot == Point{500.0, 0.0});
  CHECK(inst.num_clusters() == 4);
  CHECK(inst.cluster_size() == 20);
}

TEST_CASE("generated instances satisfy the invariants over 1000 seeds") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    GenerateOptions opt;
    opt.seed = seed;
    opt.num_clusters = 1 + seed % 10;
    opt.cluster_size = 2 + seed % 5;
    const Instance inst = generate_instance(opt);
    CAPTURE(seed);
    REQUIRE(satisfies_invariants(inst, opt));
    CHECK_NOTHROW(validate_instance(inst));
  }
}

TEST_CASE("infeasible packing raises a generation error") {
  GenerateOptions opt;
  opt.num_clusters = 30;  // 30 boxes of 200 m cannot fit in 1 km^2
  opt.retry_budget = 2000;
  CHECK_THROWS_AS(generate_instance(opt), GenerationError);
  GenerateOptions bad;
  bad.cluster_size = 1;
  CHECK_THROWS_AS(generate_instance(bad), ValidationError);
}

TEST_CASE("save and load round-trip bit-exactly") {
  GenerateOptions opt;
  opt.seed = 99;
  opt.num_clusters = 7;
  const Instance inst = generate_instance(opt);
  CHECK(instance_from_json(instance_to_json(inst)) == inst);
  const auto path = temp_file("roundtrip.json");
  save_instance(inst, path.string());
  CHECK(load_instance(path.string()) == inst);
  std::filesystem::remove(path);
}

TEST_CASE("loading rejects overlapping clusters, malformed and truncated files") {
  GenerateOptions opt;
  opt.seed = 5;
  const Instance inst = generate_instance(opt);
  const std::string text = instance_to_json(inst);

  nlohmann::json j = nlohmann::json::parse(text);
  j["clusters"][1] = j["clusters"][0];
  j["centers"][1] = j["centers"][0];
  CHECK_THROWS_AS(instance_from_json(j.dump()), ValidationError);

  CHECK_THROWS_AS(instance_from_json(text.substr(0, text.size() / 2)), ParseError);
  CHECK_THROWS_AS(instance_from_json(""), ParseError);

  nlohmann::json missing = nlohmann::json::parse(text);
  missing.erase("depot");
  CHECK_THROWS_AS(instance_from_json(missing.dump()), ParseError);

  nlohmann::json wrong = nlohmann::json::parse(text);
  wrong["clusters"][0][0] = "x";
  CHECK_THROWS_AS(instance_from_json(wrong.dump()), ParseError);

  CHECK_THROWS_AS(load_instance("/nonexistent/dir/instance.json"), IoError);
}

TEST_CASE("tour text form round-trips and rejects garbage") {
  Tour t;
  t.stops = {{2, 0}, {0, 13}, {1, 4}};
  CHECK(format_tour(t) == "2:0|0:13|1:4");
  CHECK(parse_tour(format_tour(t)) == t);
  CHECK_THROWS_AS(parse_tour("2:0|x"), ParseError);
}

TEST_CASE("validate_tour enforces one visit per cluster") {
  GenerateOptions opt;
  opt.num_clusters = 3;
  opt.cluster_size = 3;
  const Instance inst = generate_instance(opt);
  Tour ok;
  ok.stops = {{1, 0}, {0, 2}, {2, 1}};
  CHECK_NOTHROW(validate_tour(inst, ok));
  Tour bad_node = ok;
  bad_node.stops[0].node = 3;
  CHECK_THROWS_AS(validate_tour(inst, bad_node), ValidationError);
  Tour twice = ok;
  twice.stops[2].cluster = 1;
  CHECK_THROWS_AS(validate_tour(inst, twice), ValidationError);
}
