#pragma once

#include <random>
#include <string>

#include <json.hpp>

#include "oracles.hpp"
#include "signalopt/netmodel.hpp"

namespace fixture {

using nlohmann::json;

// Two parallel links from centroid O to centroid D.
inline json two_link_doc(double demand, double t1, double s1, double t2, double s2) {
  return {
      {"nodes", {{{"id", "O"}, {"kind", "centroid"}, {"x", 0}, {"y", 0}},
                 {{"id", "D"}, {"kind", "centroid"}, {"x", 1}, {"y", 0}}}},
      {"links",
       {{{"id", "a"}, {"from", "O"}, {"to", "D"}, {"free_flow_time_s", t1}, {"capacity_vph", s1}, {"lanes", 2}},
        {{"id", "b"}, {"from", "O"}, {"to", "D"}, {"free_flow_time_s", t2}, {"capacity_vph", s2}, {"lanes", 2}}}},
      {"movements", json::array()},
      {"centroids", {"O", "D"}},
      {"demand", {{{"from", "O"}, {"to", "D"}, {"vph", demand}}}},
  };
}

inline signalopt::Network two_link(double demand, double t1, double s1, double t2, double s2) {
  return signalopt::load_network(two_link_doc(demand, t1, s1, t2, s2).dump());
}

// One signalised junction J with two phases. A -> C crosses on phase 1,
// B -> D on phase 2. No route choice, so flows equal demand.
struct Toy {
  double demand_ac = 2000, demand_bd = 1200;
  double approach_time = 30, exit_time = 20;
  double approach_capacity = 3600, exit_capacity = 3600;
  double cycle = 90;

  json doc() const {
    return {
        {"nodes", {{{"id", "J"}, {"kind", "signalized"}, {"x", 0}, {"y", 0}},
                   {{"id", "A"}, {"kind", "centroid"}, {"x", -1}, {"y", 0}},
                   {{"id", "B"}, {"kind", "centroid"}, {"x", 0}, {"y", -1}},
                   {{"id", "C"}, {"kind", "centroid"}, {"x", 1}, {"y", 0}},
                   {{"id", "D"}, {"kind", "centroid"}, {"x", 0}, {"y", 1}}}},
        {"links",
         {{{"id", "A-J"}, {"from", "A"}, {"to", "J"}, {"free_flow_time_s", approach_time}, {"capacity_vph", approach_capacity}, {"lanes", 2}},
          {{"id", "B-J"}, {"from", "B"}, {"to", "J"}, {"free_flow_time_s", approach_time}, {"capacity_vph", approach_capacity}, {"lanes", 2}},
          {{"id", "J-C"}, {"from", "J"}, {"to", "C"}, {"free_flow_time_s", exit_time}, {"capacity_vph", exit_capacity}, {"lanes", 2}},
          {{"id", "J-D"}, {"from", "J"}, {"to", "D"}, {"free_flow_time_s", exit_time}, {"capacity_vph", exit_capacity}, {"lanes", 2}}}},
        {"movements",
         {{{"in_link", "A-J"}, {"out_link", "J-C"}, {"turn", "through"}},
          {{"in_link", "B-J"}, {"out_link", "J-D"}, {"turn", "through"}}}},
        {"centroids", {"A", "B", "C", "D"}},
        {"demand", {{{"from", "A"}, {"to", "C"}, {"vph", demand_ac}},
                    {{"from", "B"}, {"to", "D"}, {"vph", demand_bd}}}},
        {"signals",
         {{{"junction", "J"}, {"cycle_s", cycle},
           {"phases", {{{"movements", {0}}}, {{"movements", {1}}}}},
           {"initial_durations_s", {cycle / 2, cycle / 2}}}}},
    };
  }

  signalopt::Network network() const { return signalopt::load_network(doc().dump()); }

  // Closed-form total travel time (veh h) for phase-1 duration d1.
  double ttt(double d1) const {
    const double l1 = d1 / cycle, l2 = (cycle - d1) / cycle;
    const double v =
        demand_ac * oracle::bpr(approach_time, approach_capacity, demand_ac, l1) +
        demand_bd * oracle::bpr(approach_time, approach_capacity, demand_bd, l2) +
        demand_ac * oracle::bpr(exit_time, exit_capacity, demand_ac, 1.0) +
        demand_bd * oracle::bpr(exit_time, exit_capacity, demand_bd, 1.0);
    return v / 3600.0;
  }
};

// Random point on the simplex {d_k >= lo, sum d_k = total}, built from
// sorted uniforms; deliberately not the library's sampler.
inline std::vector<double> random_durations(std::mt19937_64& rng, std::size_t n, double total,
                                            double lo) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> cuts{0.0, 1.0};
  for (std::size_t i = 0; i + 1 < n; ++i) cuts.push_back(u(rng));
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> d;
  const double free = total - lo * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) d.push_back(lo + free * (cuts[i + 1] - cuts[i]));
  return d;
}

}  // namespace fixture
