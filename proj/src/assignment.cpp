#include "signalopt/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <string>

namespace signalopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kLineSearchSteps = 48;
constexpr double kMaxConjugateWeight = 0.99;

inline double power(double r, double beta) {
  if (beta == 4.0) {
    const double r2 = r * r;
    return r2 * r2;
  }
  return std::pow(r, beta);
}

void check_lambda(const Link& link, double lambda) {
  if (!(lambda > 0.0))
    throw InputError("link '" + link.id + "': green split must be positive");
}

// Precomputed adjacency shared by every search in one solve.
class Router {
 public:
  explicit Router(const Network& net) : net_(net) {
    const auto links = net.links();
    succ_.reserve(links.size());
    for (std::size_t a = 0; a < links.size(); ++a) succ_.push_back(net.successors(a));
    entering_.assign(net.nodes().size(), {});
    for (std::size_t a = 0; a < links.size(); ++a) entering_[links[a].to].push_back(a);
  }

  void run(std::span<const double> costs, std::size_t origin, ShortestPaths& tree) const {
    const auto n = succ_.size();
    tree.link_cost.assign(n, kInf);
    tree.predecessor.assign(n, ShortestPaths::npos);
    using Label = std::pair<double, std::size_t>;
    std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
    for (auto a : net_.outgoing(origin)) relax(tree, heap, ShortestPaths::npos, a, costs[a]);
    while (!heap.empty()) {
      auto [cost, a] = heap.top();
      heap.pop();
      if (cost > tree.link_cost[a]) continue;
      for (auto b : succ_[a]) relax(tree, heap, a, b, cost + costs[b]);
    }
  }

  // Cheapest link ending at `destination`, npos if none is reached.
  std::size_t entry(const ShortestPaths& tree, std::size_t destination) const {
    std::size_t best = ShortestPaths::npos;
    for (auto a : entering_[destination]) {
      const double c = tree.link_cost[a];
      if (c == kInf) continue;
      if (best == ShortestPaths::npos || c < tree.link_cost[best] ||
          (c == tree.link_cost[best] && path_less(tree, a, best, ShortestPaths::npos)))
        best = a;
    }
    return best;
  }

  void path(const ShortestPaths& tree, std::size_t last, std::vector<std::size_t>& out) const {
    out.clear();
    for (auto a = last; a != ShortestPaths::npos; a = tree.predecessor[a]) out.push_back(a);
    std::reverse(out.begin(), out.end());
  }

 private:
  template <class Heap>
  void relax(ShortestPaths& tree, Heap& heap, std::size_t from, std::size_t to,
             double cost) const {
    auto& current = tree.link_cost[to];
    if (cost < current) {
      current = cost;
      tree.predecessor[to] = from;
      heap.emplace(cost, to);
    } else if (cost == current && tree.predecessor[to] != from &&
               path_less(tree, from, tree.predecessor[to], to)) {
      tree.predecessor[to] = from;
    }
  }

  // Compares the id sequences path(a) + [tail] and path(b) + [tail].
  bool path_less(const ShortestPaths& tree, std::size_t a, std::size_t b,
                 std::size_t tail) const {
    std::vector<std::size_t> pa, pb;
    path(tree, a, pa);
    path(tree, b, pb);
    if (tail != ShortestPaths::npos) {
      pa.push_back(tail);
      pb.push_back(tail);
    }
    return std::lexicographical_compare(
        pa.begin(), pa.end(), pb.begin(), pb.end(),
        [&](std::size_t x, std::size_t y) { return net_.link(x).id < net_.link(y).id; });
  }

  const Network& net_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<std::vector<std::size_t>> entering_;
};

struct OriginGroup {
  std::size_t origin;
  std::vector<std::size_t> entries;  // indices into the positive OD list
};

std::vector<OriginGroup> group_by_origin(std::span<const OdEntry> demand) {
  std::vector<OriginGroup> groups;
  for (std::size_t i = 0; i < demand.size(); ++i) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.origin == demand[i].origin; });
    if (it == groups.end()) {
      groups.push_back({demand[i].origin, {}});
      it = groups.end() - 1;
    }
    it->entries.push_back(i);
  }
  return groups;
}

// Loads `demand` on shortest paths; optionally stores each entry's path.
void load(const Network& net, const Router& router, std::span<const double> costs,
          std::span<const OdEntry> demand, const std::vector<OriginGroup>& groups,
          std::vector<double>& flows, std::vector<std::vector<std::size_t>>* paths) {
  flows.assign(net.links().size(), 0.0);
  ShortestPaths tree;
  for (const auto& g : groups) {
    router.run(costs, g.origin, tree);
    for (auto i : g.entries) {
      const auto& e = demand[i];
      const auto last = router.entry(tree, e.destination);
      if (last == ShortestPaths::npos)
        throw InputError("no path from '" + net.node(e.origin).id + "' to '" +
                         net.node(e.destination).id + "'");
      for (auto a = last; a != ShortestPaths::npos; a = tree.predecessor[a])
        flows[a] += e.demand;
      if (paths) router.path(tree, last, (*paths)[i]);
    }
  }
}

// d t / d v
double cost_slope(const Link& link, double flow, double lambda, const CostParams& p) {
  const double cap = lambda * link.capacity;
  const double r = flow / cap;
  return link.free_flow_time * p.alpha * p.beta * std::pow(r, p.beta - 1.0) / cap;
}

double beckmann_total(const Network& net, std::span<const double> flows,
                      std::span<const double> lambdas, const CostParams& p) {
  double s = 0.0;
  for (std::size_t a = 0; a < flows.size(); ++a)
    s += beckmann_term(net.link(a), flows[a], lambdas[a], p);
  return s;
}

}  // namespace

double link_travel_time(const Link& link, double flow, double lambda, const CostParams& p) {
  check_lambda(link, lambda);
  const double r = flow / (lambda * link.capacity);
  return link.free_flow_time * (1.0 + p.alpha * power(r, p.beta));
}

double beckmann_term(const Link& link, double flow, double lambda, const CostParams& p) {
  check_lambda(link, lambda);
  const double r = flow / (lambda * link.capacity);
  return link.free_flow_time * flow * (1.0 + p.alpha * power(r, p.beta) / (p.beta + 1.0));
}

ShortestPaths shortest_paths(const Network& net, std::span<const double> costs,
                             std::size_t origin) {
  Router router(net);
  ShortestPaths tree;
  router.run(costs, origin, tree);
  return tree;
}

std::vector<std::size_t> extract_path(const Network& net, const ShortestPaths& tree,
                                      std::size_t destination) {
  Router router(net);
  const auto last = router.entry(tree, destination);
  if (last == ShortestPaths::npos)
    throw InputError("no path to '" + net.node(destination).id + "'");
  std::vector<std::size_t> out;
  router.path(tree, last, out);
  return out;
}

std::vector<double> all_or_nothing(const Network& net, std::span<const double> costs,
                                   const OdMatrix& od) {
  for (double c : costs)
    if (!(c > 0.0) || !std::isfinite(c))
      throw InputError("all-or-nothing costs must be positive and finite");
  const auto demand = od.positive();
  Router router(net);
  std::vector<double> flows;
  load(net, router, costs, demand, group_by_origin(demand), flows, nullptr);
  return flows;
}

std::vector<double> link_travel_times(const Network& net, std::span<const double> flows,
                                      std::span<const double> lambdas, const CostParams& p) {
  std::vector<double> t(flows.size());
  for (std::size_t a = 0; a < flows.size(); ++a)
    t[a] = link_travel_time(net.link(a), flows[a], lambdas[a], p);
  return t;
}

double total_travel_time(const Network& net, std::span<const double> flows,
                         std::span<const double> lambdas, const CostParams& p) {
  double s = 0.0;
  for (std::size_t a = 0; a < flows.size(); ++a)
    s += flows[a] * link_travel_time(net.link(a), flows[a], lambdas[a], p);
  return s / 3600.0;
}

double total_travel_time(const AssignmentResult& r, const Network& net,
                         std::span<const double> lambdas, const CostParams& p) {
  return total_travel_time(net, r.link_flows, lambdas, p);
}

AssignmentResult solve_ue(const Network& net, std::span<const double> lambdas,
                          const CostParams& params, const SolverOptions& opts) {
  if (!(opts.gap_tolerance > 0.0)) throw InputError("gap tolerance must be positive");
  if (opts.max_iterations < 1) throw InputError("max_iterations must be >= 1");
  const auto links = net.links();
  const auto n = links.size();
  if (lambdas.size() != n) throw InputError("one green split per link is required");
  for (std::size_t a = 0; a < n; ++a) check_lambda(links[a], lambdas[a]);

  const auto demand = net.od().positive();
  const auto groups = group_by_origin(demand);
  const Router router(net);

  AssignmentResult result;
  std::vector<std::vector<std::size_t>> paths(opts.track_routes ? demand.size() : 0);
  std::vector<std::map<std::vector<std::size_t>, double>> route_weights(paths.size());
  auto* path_out = opts.track_routes ? &paths : nullptr;

  std::vector<double> cost(n), flows, target;
  for (std::size_t a = 0; a < n; ++a) cost[a] = links[a].free_flow_time;
  load(net, router, cost, demand, groups, flows, path_out);
  for (std::size_t i = 0; i < paths.size(); ++i) route_weights[i][paths[i]] = demand[i].demand;
  result.beckmann_history.push_back(beckmann_total(net, flows, lambdas, params));

  // Bi-conjugate Frank-Wolfe: the search target is a convex combination of
  // the new all-or-nothing point and the previous two targets, chosen so
  // successive directions are conjugate under the diagonal cost Hessian.
  // `history` counts usable previous targets (0 after a full step).
  std::vector<double> anchor(n), before(n), next(n), direction(n);
  using Weights = std::vector<std::map<std::vector<std::size_t>, double>>;
  Weights anchor_weights(paths.size()), before_weights(paths.size());
  int history = 0;
  double last_step = 1.0;
  for (int it = 1;; ++it) {
    for (std::size_t a = 0; a < n; ++a)
      cost[a] = link_travel_time(links[a], flows[a], lambdas[a], params);
    load(net, router, cost, demand, groups, target, path_out);

    double current = 0.0, bound = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      current += cost[a] * flows[a];
      bound += cost[a] * target[a];
    }
    result.iterations = it;
    result.relative_gap = current > 0.0 ? std::max(0.0, (current - bound) / current) : 0.0;
    if (result.relative_gap <= opts.gap_tolerance) {
      result.converged = true;
      break;
    }
    if (it >= opts.max_iterations) break;

    // weights on target, anchor (previous target), before (the one prior)
    double w_new = 1.0, w_anchor = 0.0, w_before = 0.0;
    if (history >= 2) {
      double mu_num = 0.0, mu_den = 0.0, nu_num = 0.0, nu_den = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        const double h = cost_slope(links[a], flows[a], lambdas[a], params);
        const double prev = last_step * anchor[a] - flows[a] + (1.0 - last_step) * before[a];
        const double last = anchor[a] - flows[a];
        const double fw = target[a] - flows[a];
        mu_num += prev * h * fw;
        mu_den += prev * h * (before[a] - anchor[a]);
        nu_num += last * h * fw;
        nu_den += last * h * last;
      }
      const double mu = mu_den != 0.0 ? std::max(0.0, -mu_num / mu_den) : 0.0;
      const double nu =
          nu_den != 0.0 ? std::max(0.0, -nu_num / nu_den + mu * last_step / (1.0 - last_step)) : 0.0;
      w_new = 1.0 / (1.0 + mu + nu);
      w_anchor = nu * w_new;
      w_before = mu * w_new;
    } else if (history == 1) {
      double num = 0.0, den = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        const double h = cost_slope(links[a], flows[a], lambdas[a], params);
        const double prev = anchor[a] - flows[a];
        num += prev * h * (target[a] - flows[a]);
        den += prev * h * (target[a] - anchor[a]);
      }
      w_anchor = den != 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
      w_new = 1.0 - w_anchor;
    }
    if (w_new < 1.0 - kMaxConjugateWeight) {
      const double scale = kMaxConjugateWeight / (w_anchor + w_before);
      w_anchor *= scale;
      w_before *= scale;
      w_new = 1.0 - kMaxConjugateWeight;
    }

    std::vector<std::size_t> active;
    auto set_direction = [&] {
      active.clear();
      for (std::size_t a = 0; a < n; ++a) {
        next[a] = w_new * target[a] + w_anchor * anchor[a] + w_before * before[a];
        direction[a] = next[a] - flows[a];
        if (direction[a] != 0.0) active.push_back(a);
      }
    };
    auto slope = [&](double theta) {
      double g = 0.0;
      for (auto a : active)
        g += direction[a] *
             link_travel_time(links[a], flows[a] + theta * direction[a], lambdas[a], params);
      return g;
    };
    set_direction();
    bool restarted = false;
    if (w_new < 1.0 && !(slope(0.0) < 0.0)) {
      // not a descent direction: restart from the plain all-or-nothing target
      w_new = 1.0;
      w_anchor = w_before = 0.0;
      set_direction();
      restarted = true;
    }

    // Exact line search: root of the directional derivative on [0, 1].
    double step = 1.0;
    if (slope(1.0) > 0.0) {
      double lo = 0.0, hi = 1.0;
      for (int k = 0; k < kLineSearchSteps; ++k) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? hi : lo) = mid;
      }
      step = lo;
    }
    for (auto a : active) flows[a] = std::max(0.0, flows[a] + step * direction[a]);
    before.swap(anchor);
    anchor.swap(next);
    last_step = step;
    history = step < 1.0 ? (restarted ? 1 : std::min(history + 1, 2)) : 0;

    if (opts.track_routes) {
      for (std::size_t i = 0; i < paths.size(); ++i) {
        Weights::value_type s;
        for (const auto& [p, f] : anchor_weights[i]) s[p] += w_anchor * f;
        for (const auto& [p, f] : before_weights[i]) s[p] += w_before * f;
        s[paths[i]] += w_new * demand[i].demand;
        std::erase_if(s, [](const auto& kv) { return kv.second <= 0.0; });
        before_weights[i] = std::move(anchor_weights[i]);
        anchor_weights[i] = std::move(s);
        auto& w = route_weights[i];
        for (auto& [p, f] : w) f *= 1.0 - step;
        for (const auto& [p, f] : anchor_weights[i]) w[p] += step * f;
        std::erase_if(w, [](const auto& kv) { return kv.second <= 0.0; });
      }
    }
    result.beckmann_history.push_back(beckmann_total(net, flows, lambdas, params));
  }

  result.link_flows = std::move(flows);
  result.beckmann_value = result.beckmann_history.back();
  result.total_travel_time = total_travel_time(net, result.link_flows, lambdas, params);
  for (auto& w : route_weights) {
    std::vector<RouteFlow> routes;
    for (auto& [p, f] : w) routes.push_back({p, f});
    result.route_flows.push_back(std::move(routes));
  }
  return result;
}

std::vector<CapacityViolation> capacity_check(const Network& net, std::span<const double> flows,
                                              std::span<const double> lambdas) {
  std::vector<CapacityViolation> out;
  for (std::size_t a = 0; a < flows.size(); ++a) {
    const double cap = lambdas[a] * net.link(a).capacity;
    if (flows[a] > cap) out.push_back({a, flows[a], cap, flows[a] / cap});
  }
  return out;
}

}  // namespace signalopt
