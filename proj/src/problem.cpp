#include "uavgtsp/problem.hpp"

#include <sstream>

#include "uavgtsp/errors.hpp"

namespace uavgtsp {

void validate_tour(const Instance& instance, const Tour& tour) {
  const std::size_t k = instance.num_clusters();
  if (tour.stops.size() != k) {
    throw ValidationError("tour has " + std::to_string(tour.stops.size()) + " stops for " +
                          std::to_string(k) + " clusters");
  }
  std::vector<bool> seen(k, false);
  for (const Stop& s : tour.stops) {
    if (s.cluster >= k) {
      throw ValidationError("tour visits unknown cluster " + std::to_string(s.cluster));
    }
    if (seen[s.cluster]) {
      throw ValidationError("tour visits cluster " + std::to_string(s.cluster) + " twice");
    }
    seen[s.cluster] = true;
    if (s.node >= instance.clusters[s.cluster].size()) {
      throw ValidationError("cluster " + std::to_string(s.cluster) + " has no node " +
                            std::to_string(s.node));
    }
  }
}

void validate_instance(const Instance& in) {
  const std::size_t k = in.num_clusters();
  if (k == 0) throw ValidationError("instance has no clusters");
  if (in.centers.size() != k) {
    throw ValidationError("instance has " + std::to_string(in.centers.size()) +
                          " cluster centers for " + std::to_string(k) + " clusters");
  }
  if (!(in.zeta > 0.0)) throw ValidationError("zeta must be > 0");
  if (!(in.area_size > 0.0)) throw ValidationError("area_size must be > 0");
  const std::size_t n = in.cluster_size();
  if (n < 2) throw ValidationError("clusters need at least 2 nodes");
  for (std::size_t c = 0; c < k; ++c) {
    const Point center = in.centers[c];
    if (!(center.x - in.zeta > 0.0 && center.x + in.zeta < in.area_size &&
          center.y - in.zeta > 0.0 && center.y + in.zeta < in.area_size)) {
      throw ValidationError("cluster " + std::to_string(c) + " box leaves the target area");
    }
    if (in.clusters[c].size() != n) {
      throw ValidationError("cluster " + std::to_string(c) + " has " +
                            std::to_string(in.clusters[c].size()) + " nodes, expected " +
                            std::to_string(n));
    }
    for (std::size_t v = 0; v < n; ++v) {
      const Point p = in.clusters[c][v];
      if (p.x < center.x - in.zeta || p.x > center.x + in.zeta || p.y < center.y - in.zeta ||
          p.y > center.y + in.zeta) {
        throw ValidationError("node " + std::to_string(v) + " of cluster " + std::to_string(c) +
                              " lies outside its box");
      }
    }
    for (std::size_t o = 0; o < c; ++o) {
      const Point other = in.centers[o];
      if (std::abs(center.x - other.x) < 2.0 * in.zeta &&
          std::abs(center.y - other.y) < 2.0 * in.zeta) {
        throw ValidationError("clusters " + std::to_string(o) + " and " + std::to_string(c) +
                              " overlap");
      }
    }
  }
  if (in.depot.x < 0.0 || in.depot.x > in.area_size || in.depot.y < 0.0 ||
      in.depot.y > in.area_size) {
    throw ValidationError("depot lies outside the target area");
  }
}

std::string format_tour(const Tour& tour) {
  std::string out;
  for (std::size_t i = 0; i < tour.stops.size(); ++i) {
    if (i) out += '|';
    out += std::to_string(tour.stops[i].cluster) + ":" + std::to_string(tour.stops[i].node);
  }
  return out;
}

Tour parse_tour(const std::string& text) {
  Tour tour;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, '|')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ParseError("bad tour stop '" + item + "'");
    try {
      tour.stops.push_back({std::stoul(item.substr(0, colon)), std::stoul(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ParseError("bad tour stop '" + item + "'");
    }
  }
  return tour;
}

}  // namespace uavgtsp
