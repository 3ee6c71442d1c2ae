#pragma once

#include <span>
#include <string>
#include <vector>

#include "signalopt/io.hpp"
#include "signalopt/netmodel.hpp"

namespace signalopt {

struct SvgFile {
  std::string name;  // file name, no directory
  std::string content;
};

// One scatter per (junction, phase): phase duration against fitness, one
// colour per generation. Throws "no generations" on an empty trace and
// needs trace.layout to be filled in.
std::vector<SvgFile> convergence_plots(const TraceData& trace, const Provenance& p);

// Network drawn at node coordinates; parallel links between the same pair
// of nodes are merged, stroke width follows flow, colour follows v/(lambda*S).
SvgFile flow_map(const Network& net, std::span<const FlowRow> flows, const Provenance& p);

}  // namespace signalopt
