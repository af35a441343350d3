#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "uavgtsp/problem.hpp"

namespace uavgtsp {

struct GenerateOptions {
  std::size_t num_clusters = 4;
  std::size_t cluster_size = 20;
  double zeta = 100.0;
  std::uint64_t seed = 0;
  double area_size = 1000.0;
  Point depot{500.0, 0.0};
  // Total center draws allowed before giving up.
  std::size_t retry_budget = 10000;
};

// Cluster centers are drawn uniformly over the square area and redrawn until
// the box fits strictly inside the area and misses every earlier box; nodes
// are then uniform inside each box. Deterministic in the options. Throws
// GenerationError when the retry budget runs out, ValidationError on bad options.
Instance generate_instance(const GenerateOptions& options);

inline constexpr int kInstanceFormatVersion = 1;

// JSON file: {"format", "version", "seed", "K", "N", "zeta", "area_size",
// "depot": [x, y], "centers": [[x, y], ...], "clusters": [[[x, y], ...], ...]}.
std::string instance_to_json(const Instance& instance);
// Throws ParseError (with the offending field) or ValidationError.
Instance instance_from_json(const std::string& text);
void save_instance(const Instance& instance, const std::string& path);
Instance load_instance(const std::string& path);

}  // namespace uavgtsp
