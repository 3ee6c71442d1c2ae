#include "signalopt/signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace signalopt {

namespace {

std::string fmt_seconds(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void check_plan(const SignalPlan& plan) {
  if (plan.phases.empty()) throw InputError("signal plan without phases");
  double sum = 0.0;
  for (const auto& p : plan.phases) {
    if (!(p.duration > 0.0) || !std::isfinite(p.duration))
      throw InputError("phase duration must be positive");
    sum += p.duration;
  }
  if (std::abs(sum - plan.cycle) > kCycleTolerance)
    throw InputError("invalid plan: phase durations sum to " + fmt_seconds(sum) +
                     " s but the cycle is " + fmt_seconds(plan.cycle) + " s");
}

}  // namespace

std::vector<double> SignalPlan::durations() const {
  std::vector<double> out;
  out.reserve(phases.size());
  for (const auto& p : phases) out.push_back(p.duration);
  return out;
}

std::vector<double> phase_splits(const SignalPlan& plan) {
  check_plan(plan);
  std::vector<double> splits;
  splits.reserve(plan.phases.size());
  for (const auto& p : plan.phases) splits.push_back(p.duration / plan.cycle);
  return splits;
}

std::vector<double> link_green_splits(const Network& net, std::span<const SignalPlan> plans) {
  const auto links = net.links();
  std::vector<double> lambda(links.size(), 0.0);
  std::vector<std::size_t> stamp(links.size(), 0);
  std::size_t phase_serial = 0;
  for (const auto& plan : plans) {
    const auto splits = phase_splits(plan);
    for (std::size_t k = 0; k < plan.phases.size(); ++k) {
      ++phase_serial;
      for (auto m : plan.phases[k].green_movements) {
        const auto in = net.movements()[m].in_link;
        // a phase counts once per link however many of its movements it serves
        if (stamp[in] == phase_serial) continue;
        stamp[in] = phase_serial;
        lambda[in] += splits[k];
      }
    }
  }
  for (std::size_t a = 0; a < links.size(); ++a) {
    if (!links[a].signal_controlled) {
      lambda[a] = 1.0;
    } else if (lambda[a] <= 0.0) {
      throw InputError("signal-controlled link '" + links[a].id +
                       "' receives green in no phase");
    } else {
      lambda[a] = std::min(lambda[a], 1.0);
    }
  }
  return lambda;
}

double link_green_split(const Network& net, std::span<const SignalPlan> plans,
                        std::size_t link) {
  const auto& l = net.link(link);
  if (!l.signal_controlled) return 1.0;
  double lambda = 0.0;
  for (const auto& plan : plans) {
    if (plan.junction != l.to) continue;
    const auto splits = phase_splits(plan);
    for (std::size_t k = 0; k < plan.phases.size(); ++k) {
      const auto& moves = plan.phases[k].green_movements;
      bool grants = std::any_of(moves.begin(), moves.end(), [&](std::size_t m) {
        return net.movements()[m].in_link == link;
      });
      if (grants) lambda += splits[k];
    }
  }
  if (lambda <= 0.0)
    throw InputError("signal-controlled link '" + l.id + "' receives green in no phase");
  return std::min(lambda, 1.0);
}

// ---------------------------------------------------------------------------

ChromosomeLayout::ChromosomeLayout(std::vector<JunctionSegment> segments, double min_green)
    : segments_(std::move(segments)), min_green_(min_green) {
  if (!(min_green_ >= 0.0)) throw InputError("min_green must be non-negative");
  std::size_t offset = 0;
  for (auto& s : segments_) {
    if (s.phase_count == 0) throw InputError("junction segment without phases");
    if (s.cycle < static_cast<double>(s.phase_count) * min_green_)
      throw InputError("infeasible layout: cycle " + fmt_seconds(s.cycle) + " s cannot hold " +
                       std::to_string(s.phase_count) + " phases of " + fmt_seconds(min_green_) +
                       " s");
    s.offset = offset;
    offset += s.phase_count;
  }
  gene_count_ = offset;
}

ChromosomeLayout ChromosomeLayout::from_network(const Network& net, double min_green) {
  std::vector<JunctionSegment> segments;
  const auto controls = net.controls();
  for (std::size_t c = 0; c < controls.size(); ++c)
    segments.push_back({controls[c].junction, c, 0, controls[c].phases.size(), controls[c].cycle});
  return ChromosomeLayout(std::move(segments), min_green);
}

std::vector<SignalPlan> decode_chromosome(std::span<const double> genes,
                                          const ChromosomeLayout& layout,
                                          const Network& net) {
  if (genes.size() != layout.gene_count())
    throw InputError("chromosome has " + std::to_string(genes.size()) +
                     " genes, layout expects " + std::to_string(layout.gene_count()));
  std::vector<SignalPlan> plans;
  plans.reserve(layout.segments().size());
  for (std::size_t j = 0; j < layout.segments().size(); ++j) {
    const auto& seg = layout.segments()[j];
    const auto values = layout.segment(genes, j);
    const double sum = segment_sum(values);
    if (std::abs(sum - seg.cycle) > kCycleTolerance)
      throw InputError("junction '" + net.node(seg.junction).id + "': durations sum to " +
                       fmt_seconds(sum) + " s, cycle is " + fmt_seconds(seg.cycle) + " s");
    const auto& control = net.controls()[seg.control];
    SignalPlan plan{seg.junction, seg.cycle, {}};
    for (std::size_t k = 0; k < seg.phase_count; ++k)
      plan.phases.push_back({values[k], control.phases.at(k).movements});
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<double> encode_plans(std::span<const SignalPlan> plans) {
  std::vector<double> genes;
  for (const auto& p : plans)
    for (const auto& ph : p.phases) genes.push_back(ph.duration);
  return genes;
}

std::vector<SignalPlan> initial_plans(const Network& net) {
  std::vector<SignalPlan> plans;
  for (const auto& c : net.controls()) {
    SignalPlan plan{c.junction, c.cycle, {}};
    const double even = c.cycle / static_cast<double>(c.phases.size());
    for (std::size_t k = 0; k < c.phases.size(); ++k) {
      const double d = c.initial_durations.empty() ? even : c.initial_durations[k];
      plan.phases.push_back({d, c.phases[k].movements});
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

// ---------------------------------------------------------------------------

double segment_sum(std::span<const double> durations) {
  double s = 0.0;
  for (double d : durations) s += d;
  return s;
}

void close_cycle(std::span<double> d, double cycle, std::size_t index) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double s = segment_sum(d);
  if (s == cycle) return;
  d[index] += cycle - s;
  for (int step = 0; step < 256; ++step) {
    s = segment_sum(d);
    if (s == cycle) return;
    d[index] = std::nextafter(d[index], s < cycle ? inf : -inf);
  }
  // Rounding of later partial sums skipped over the target; the final gene
  // always admits an exact fit.
  const std::size_t last = d.size() - 1;
  for (int step = 0; step < 256; ++step) {
    const double head = segment_sum(d.first(last));
    d[last] = cycle - head;
    s = segment_sum(d);
    if (s == cycle) return;
    d[last] = std::nextafter(d[last], s < cycle ? inf : -inf);
    if (segment_sum(d) == cycle) return;
  }
}

std::vector<double> repair(std::span<const double> durations, double cycle, double min_green) {
  const auto n = durations.size();
  if (n == 0) throw InputError("repair: no durations");
  if (cycle < static_cast<double>(n) * min_green)
    throw InputError("infeasible layout: cycle " + fmt_seconds(cycle) + " s cannot hold " +
                     std::to_string(n) + " phases of " + fmt_seconds(min_green) + " s");
  for (double d : durations)
    if (!std::isfinite(d)) throw InputError("repair: non-finite duration");

  constexpr double slack = 1e-9;
  const bool feasible =
      std::all_of(durations.begin(), durations.end(),
                  [&](double d) { return d >= min_green - slack; }) &&
      segment_sum(durations) == cycle;
  std::vector<double> out(durations.begin(), durations.end());
  if (feasible) return out;

  double surplus = 0.0;
  for (auto& d : out) {
    d = std::max(d, min_green);
    surplus += d - min_green;
  }
  const double target = cycle - static_cast<double>(n) * min_green;
  for (auto& d : out) {
    d = surplus > 0.0 ? min_green + (d - min_green) * (target / surplus)
                      : min_green + target / static_cast<double>(n);
  }
  const auto largest =
      static_cast<std::size_t>(std::max_element(out.begin(), out.end()) - out.begin());
  close_cycle(out, cycle, largest);
  return out;
}

std::vector<long> display_durations(std::span<const double> durations, double cycle) {
  const long total = std::lround(cycle);
  std::vector<long> out;
  std::vector<std::pair<double, std::size_t>> remainders;
  long assigned = 0;
  for (std::size_t k = 0; k < durations.size(); ++k) {
    const double f = std::floor(durations[k]);
    out.push_back(static_cast<long>(f));
    assigned += out.back();
    remainders.emplace_back(durations[k] - f, k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i, ++assigned)
    ++out[remainders[i].second];
  return out;
}

}  // namespace signalopt
