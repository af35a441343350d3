#include "uavgtsp/instances.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uavgtsp/errors.hpp"
#include "uavgtsp/rng.hpp"

namespace uavgtsp {

namespace {

using nlohmann::json;

// Consecutive failed draws after which the partial layout is discarded.
constexpr std::size_t kJamLimit = 1000;

bool box_fits(Point c, const GenerateOptions& o) {
  return c.x - o.zeta > 0.0 && c.x + o.zeta < o.area_size && c.y - o.zeta > 0.0 &&
         c.y + o.zeta < o.area_size;
}

bool boxes_overlap(Point a, Point b, double zeta) {
  return std::abs(a.x - b.x) < 2.0 * zeta && std::abs(a.y - b.y) < 2.0 * zeta;
}

json point_json(Point p) { return json::array({p.x, p.y}); }

Point point_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError("instance field " + where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(std::string("instance field '") + name + "' missing");
  return *it;
}

double number_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number()) throw ParseError(std::string("instance field '") + name + "' not a number");
  return v.get<double>();
}

std::uint64_t unsigned_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number_unsigned()) {
    throw ParseError(std::string("instance field '") + name + "' not an unsigned integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace

Instance generate_instance(const GenerateOptions& o) {
  if (o.num_clusters < 1) throw ValidationError("need at least one cluster");
  if (o.cluster_size < 2) throw ValidationError("clusters need at least 2 nodes");
  if (!(o.zeta > 0.0)) throw ValidationError("zeta must be > 0");
  if (!(o.area_size > 2.0 * o.zeta)) throw GenerationError("area too small for one cluster box");

  Rng rng(o.seed);
  std::vector<Point> centers;
  std::size_t draws = 0;
  std::size_t since_success = 0;
  while (centers.size() < o.num_clusters) {
    if (draws++ >= o.retry_budget) {
      throw GenerationError("could not place " + std::to_string(o.num_clusters) +
                            " disjoint clusters with zeta=" + std::to_string(o.zeta) + " in " +
                            std::to_string(o.retry_budget) + " draws");
    }
    Point c{rng.uniform() * o.area_size, rng.uniform() * o.area_size};
    bool ok = box_fits(c, o);
    for (std::size_t i = 0; ok && i < centers.size(); ++i) ok = !boxes_overlap(c, centers[i], o.zeta);
    if (ok) {
      centers.push_back(c);
      since_success = 0;
    } else if (++since_success >= kJamLimit) {
      centers.clear();
      since_success = 0;
    }
  }

  Instance in;
  in.depot = o.depot;
  in.centers = centers;
  in.zeta = o.zeta;
  in.area_size = o.area_size;
  in.seed = o.seed;
  for (Point c : centers) {
    Cluster cluster(o.cluster_size);
    for (Point& p : cluster) {
      p.x = rng.uniform(c.x - o.zeta, c.x + o.zeta);
      p.y = rng.uniform(c.y - o.zeta, c.y + o.zeta);
    }
    in.clusters.push_back(std::move(cluster));
  }
  return in;
}

std::string instance_to_json(const Instance& in) {
  json j;
  j["format"] = "uavgtsp-instance";
  j["version"] = kInstanceFormatVersion;
  j["seed"] = in.seed;
  j["K"] = in.num_clusters();
  j["N"] = in.cluster_size();
  j["zeta"] = in.zeta;
  j["area_size"] = in.area_size;
  j["depot"] = point_json(in.depot);
  j["centers"] = json::array();
  for (Point c : in.centers) j["centers"].push_back(point_json(c));
  j["clusters"] = json::array();
  for (const Cluster& cluster : in.clusters) {
    json nodes = json::array();
    for (Point p : cluster) nodes.push_back(point_json(p));
    j["clusters"].push_back(std::move(nodes));
  }
  return j.dump(1) + "\n";
}

Instance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("instance file: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("instance file: top level is not an object");
  const json& format = field(j, "format");
  if (!format.is_string() || format.get<std::string>() != "uavgtsp-instance") {
    throw ParseError("instance field 'format' is not 'uavgtsp-instance'");
  }
  if (unsigned_field(j, "version") != static_cast<std::uint64_t>(kInstanceFormatVersion)) {
    throw ParseError("unsupported instance version");
  }

  Instance in;
  in.seed = unsigned_field(j, "seed");
  const std::uint64_t k = unsigned_field(j, "K");
  const std::uint64_t n = unsigned_field(j, "N");
  in.zeta = number_field(j, "zeta");
  in.area_size = number_field(j, "area_size");
  in.depot = point_from(field(j, "depot"), "depot");

  const json& centers = field(j, "centers");
  const json& clusters = field(j, "clusters");
  if (!centers.is_array() || centers.size() != k) {
    throw ParseError("instance field 'centers': expected " + std::to_string(k) + " points");
  }
  if (!clusters.is_array() || clusters.size() != k) {
    throw ParseError("instance field 'clusters': expected " + std::to_string(k) + " clusters");
  }
  for (std::size_t c = 0; c < k; ++c) {
    in.centers.push_back(point_from(centers[c], "centers[" + std::to_string(c) + "]"));
    const json& nodes = clusters[c];
    if (!nodes.is_array() || nodes.size() != n) {
      throw ParseError("instance field 'clusters[" + std::to_string(c) + "]': expected " +
                       std::to_string(n) + " nodes");
    }
    Cluster cluster;
    for (std::size_t v = 0; v < n; ++v) {
      cluster.push_back(point_from(
          nodes[v], "clusters[" + std::to_string(c) + "][" + std::to_string(v) + "]"));
    }
    in.clusters.push_back(std::move(cluster));
  }
  validate_instance(in);
  return in;
}

void save_instance(const Instance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write instance file " + path);
  out << instance_to_json(instance);
  if (!out) throw IoError("write failed for " + path);
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open instance file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return instance_from_json(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace uavgtsp
