#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace uavgtsp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

using Cluster = std::vector<Point>;

// A base station plus K equally sized clusters of ground nodes, in meters.
struct Instance {
  Point depot{500.0, 0.0};
  std::vector<Point> centers;  // box center of each cluster
  std::vector<Cluster> clusters;
  double zeta = 100.0;        // half-width of each cluster's box
  double area_size = 1000.0;  // side of the square target area
  std::uint64_t seed = 0;

  std::size_t num_clusters() const { return clusters.size(); }
  // Nodes per cluster (clusters are homogeneous).
  std::size_t cluster_size() const { return clusters.empty() ? 0 : clusters.front().size(); }

  bool operator==(const Instance&) const = default;
};

// Visit of one cluster with its chosen cluster head.
struct Stop {
  std::size_t cluster = 0;
  std::size_t node = 0;

  bool operator==(const Stop&) const = default;
  auto operator<=>(const Stop&) const = default;
};

// Closed UAV tour: depot -> stops[0] -> ... -> stops[K-1] -> depot. The depot
// is implicit at both ends.
struct Tour {
  std::vector<Stop> stops;

  bool operator==(const Tour&) const = default;
};

// Throws ValidationError unless the tour visits every cluster exactly once
// with a node index inside that cluster. With an implicit depot at both ends
// this is the in-degree, out-degree and no-subtour condition of the problem.
void validate_tour(const Instance& instance, const Tour& tour);

// Structural checks on an instance: box membership, pairwise disjoint boxes,
// bounds, homogeneous N >= 2. Throws ValidationError.
void validate_instance(const Instance& instance);

// "c:n|c:n|..." form used in CSV output.
std::string format_tour(const Tour& tour);
Tour parse_tour(const std::string& text);

}  // namespace uavgtsp
