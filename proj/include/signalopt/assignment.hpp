#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "signalopt/netmodel.hpp"

namespace signalopt {

// BPR-type link cost on the green-limited capacity lambda * S:
//   t = t0 * (1 + alpha * (v / (lambda * S))^beta)
struct CostParams {
  double alpha = 0.15;
  double beta = 4.0;
};

struct SolverOptions {
  double gap_tolerance = 1e-4;
  int max_iterations = 500;
  // Keep Frank-Wolfe path weights so route flows can be reported.
  bool track_routes = false;
};

struct RouteFlow {
  std::vector<std::size_t> links;
  double flow = 0.0;  // veh/h
};

struct AssignmentResult {
  std::vector<double> link_flows;  // veh/h, indexed like Network::links()
  double relative_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  double total_travel_time = 0.0;  // vehicle-hours
  double beckmann_value = 0.0;     // sum of cost integrals, veh*s/h
  std::vector<double> beckmann_history;  // one value per flow update, starting at the initial loading
  // Present when SolverOptions::track_routes; one entry per positive OD
  // entry in OdMatrix::positive() order.
  std::vector<std::vector<RouteFlow>> route_flows;
};

double link_travel_time(const Link& link, double flow, double lambda, const CostParams& p);

// Integral of link_travel_time over [0, flow].
double beckmann_term(const Link& link, double flow, double lambda, const CostParams& p);

struct ShortestPaths {
  std::vector<double> link_cost;  // cost to the end of each link, inf if unreached
  std::vector<std::size_t> predecessor;  // previous link, npos at the origin

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Label-setting search over links from centroid `origin`, honouring turn
// movements. Equal-cost labels keep the lexicographically smaller link-id
// sequence.
ShortestPaths shortest_paths(const Network& net, std::span<const double> costs,
                             std::size_t origin);
// Path to `destination` as a link sequence; throws InputError if unreachable.
std::vector<std::size_t> extract_path(const Network& net, const ShortestPaths& tree,
                                      std::size_t destination);

// Loads each OD demand onto one shortest path under `costs`.
std::vector<double> all_or_nothing(const Network& net, std::span<const double> costs,
                                   const OdMatrix& od);

// User equilibrium by bi-conjugate Frank-Wolfe with exact (bisection) line
// search.
// Non-convergence is reported through `converged`, not thrown.
AssignmentResult solve_ue(const Network& net, std::span<const double> lambdas,
                          const CostParams& params = {}, const SolverOptions& opts = {});

std::vector<double> link_travel_times(const Network& net, std::span<const double> flows,
                                      std::span<const double> lambdas, const CostParams& p);

// Sum of flow * travel time in vehicle-hours over the one-hour horizon.
double total_travel_time(const Network& net, std::span<const double> flows,
                         std::span<const double> lambdas, const CostParams& p);
double total_travel_time(const AssignmentResult& r, const Network& net,
                         std::span<const double> lambdas, const CostParams& p);

struct CapacityViolation {
  std::size_t link = 0;
  double flow = 0.0;
  double green_capacity = 0.0;  // lambda * S
  double ratio = 0.0;           // flow / green_capacity
};

// Links whose flow exceeds lambda * S.
std::vector<CapacityViolation> capacity_check(const Network& net, std::span<const double> flows,
                                              std::span<const double> lambdas);

}  // namespace signalopt
