#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "signalopt/netmodel.hpp"

namespace signalopt {

inline constexpr double kDefaultMinGreen = 3.0;
// Per-junction cycle sums of a chromosome must match within this tolerance.
inline constexpr double kCycleTolerance = 1e-6;

struct Phase {
  double duration = 0.0;  // seconds, amber counted as green
  std::vector<std::size_t> green_movements;
};

struct SignalPlan {
  std::size_t junction = 0;
  double cycle = 90.0;
  std::vector<Phase> phases;

  std::vector<double> durations() const;
};

// Fraction of the cycle given to each phase; sums to one.
std::vector<double> phase_splits(const SignalPlan& plan);

// Link green split: sum of the splits of every phase granting green to a
// movement leaving `link`. Links not under signal control get 1.
double link_green_split(const Network& net, std::span<const SignalPlan> plans,
                        std::size_t link);
std::vector<double> link_green_splits(const Network& net, std::span<const SignalPlan> plans);

// How a chromosome is cut into per-junction segments.
struct JunctionSegment {
  std::size_t junction = 0;  // node index
  std::size_t control = 0;   // index into Network::controls()
  std::size_t offset = 0;    // first gene
  std::size_t phase_count = 0;
  double cycle = 90.0;
};

class ChromosomeLayout {
 public:
  ChromosomeLayout() = default;
  ChromosomeLayout(std::vector<JunctionSegment> segments, double min_green);

  // One segment per signal control of `net`, in document order. Throws if
  // any junction cannot host min_green in every phase.
  static ChromosomeLayout from_network(const Network& net, double min_green = kDefaultMinGreen);

  std::span<const JunctionSegment> segments() const { return segments_; }
  std::size_t gene_count() const { return gene_count_; }
  double min_green() const { return min_green_; }

  std::span<double> segment(std::span<double> genes, std::size_t j) const {
    return genes.subspan(segments_[j].offset, segments_[j].phase_count);
  }
  std::span<const double> segment(std::span<const double> genes, std::size_t j) const {
    return genes.subspan(segments_[j].offset, segments_[j].phase_count);
  }

 private:
  std::vector<JunctionSegment> segments_;
  std::size_t gene_count_ = 0;
  double min_green_ = kDefaultMinGreen;
};

// Splits a flat duration vector into per-junction plans. Durations are
// copied verbatim.
std::vector<SignalPlan> decode_chromosome(std::span<const double> genes,
                                          const ChromosomeLayout& layout,
                                          const Network& net);
std::vector<double> encode_plans(std::span<const SignalPlan> plans);

// The field plans stored with the network's signal controls.
std::vector<SignalPlan> initial_plans(const Network& net);

// Clamp to min_green, then rescale the surplus above min_green so the
// durations sum to `cycle`. Feasible input is returned unchanged.
std::vector<double> repair(std::span<const double> durations, double cycle, double min_green);

// Left-to-right sum, the reference summation for all cycle checks.
double segment_sum(std::span<const double> durations);

// Adjusts durations[index] until segment_sum(durations) == cycle bit for bit.
void close_cycle(std::span<double> durations, double cycle, std::size_t index);

// Integer seconds for display: floor each duration, then hand out the
// remaining seconds by largest fractional part (ties to the earlier phase).
std::vector<long> display_durations(std::span<const double> durations, double cycle);

}  // namespace signalopt
