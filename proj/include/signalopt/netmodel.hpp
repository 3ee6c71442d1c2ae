#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "signalopt/errors.hpp"

namespace signalopt {

enum class NodeKind { signalized, junction, centroid };
enum class Turn { through, left, right };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Turn turn);
NodeKind parse_node_kind(std::string_view text);
Turn parse_turn(std::string_view text);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::junction;
  double x = 0.0;  // plotting only
  double y = 0.0;
};

struct Link {
  std::string id;
  std::size_t from = 0;
  std::size_t to = 0;
  double free_flow_time = 0.0;  // seconds
  double capacity = 0.0;        // veh/h
  int lanes = 1;
  bool signal_controlled = false;  // derived: downstream node is signalized
};

struct Movement {
  std::size_t in_link = 0;
  std::size_t out_link = 0;
  Turn turn = Turn::through;
};

struct OdEntry {
  std::size_t origin = 0;  // node index of a centroid
  std::size_t destination = 0;
  double demand = 0.0;  // veh/h
};

// Origin-destination demand keyed by centroid node index. Entries with zero
// demand are kept so that printed tables round-trip.
class OdMatrix {
 public:
  OdMatrix() = default;
  explicit OdMatrix(std::vector<OdEntry> entries);

  double demand(std::size_t origin, std::size_t destination) const;
  double total() const;
  double row_total(std::size_t origin) const;
  double column_total(std::size_t destination) const;

  std::span<const OdEntry> entries() const { return entries_; }
  // Entries with demand > 0, in insertion order.
  std::vector<OdEntry> positive() const;

 private:
  std::vector<OdEntry> entries_;
};

// Fixed part of a junction's signal control: phase -> granted movements,
// cycle length and the plan currently in the field.
struct PhaseSpec {
  std::vector<std::size_t> movements;  // indices into Network::movements()
};

struct JunctionControl {
  std::size_t junction = 0;  // node index
  double cycle = 90.0;
  std::vector<PhaseSpec> phases;
  std::vector<double> initial_durations;
};

// Immutable road network. All cross references are resolved to indices at
// construction; the constructor throws InputError on any invariant breach.
class Network {
 public:
  Network(std::vector<Node> nodes, std::vector<Link> links,
          std::vector<Movement> movements, OdMatrix od,
          std::vector<JunctionControl> controls = {});

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Link> links() const { return links_; }
  std::span<const Movement> movements() const { return movements_; }
  std::span<const std::size_t> centroids() const { return centroids_; }
  std::span<const JunctionControl> controls() const { return controls_; }
  const OdMatrix& od() const { return od_; }

  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const Link& link(std::size_t i) const { return links_.at(i); }

  std::optional<std::size_t> find_node(std::string_view id) const;
  std::optional<std::size_t> find_link(std::string_view id) const;
  std::size_t node_index(std::string_view id) const;  // throws InputError
  std::size_t link_index(std::string_view id) const;  // throws InputError

  std::span<const std::size_t> outgoing(std::size_t node) const {
    return outgoing_[node];
  }
  // Movement indices whose in_link is `link`.
  std::span<const std::size_t> movements_from(std::size_t link) const {
    return movements_from_[link];
  }
  // Links reachable directly after traversing `link`. If the link has
  // movement records the successors are exactly their out_links; otherwise
  // every link leaving its downstream node. Links ending at a centroid have
  // no successors.
  std::vector<std::size_t> successors(std::size_t link) const;

  // Copy with one link's capacity replaced; everything else identical.
  Network with_capacity(std::size_t link, double capacity) const;
  // Copy with a different demand table.
  Network with_demand(OdMatrix od) const;

 private:
  void index_and_validate();

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<Movement> movements_;
  OdMatrix od_;
  std::vector<JunctionControl> controls_;

  std::vector<std::size_t> centroids_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::vector<std::size_t>> movements_from_;
  std::unordered_map<std::string, std::size_t> node_by_id_;
  std::unordered_map<std::string, std::size_t> link_by_id_;
};

// True if some turn-respecting path leads from centroid `origin` to
// centroid `destination`.
bool reachable(const Network& net, std::size_t origin, std::size_t destination);

// Loop-free (no repeated node) routes as link sequences, ordered by
// free-flow time and then by link-id sequence; at most `max_routes`.
// Exhaustive depth-first search: intended for small networks.
std::vector<std::vector<std::size_t>> enumerate_routes(const Network& net,
                                                       std::size_t origin,
                                                       std::size_t destination,
                                                       std::size_t max_routes);

// Parses and validates a network document (JSON text).
Network load_network(std::string_view document);
Network load_network_file(const std::string& path);
std::string dump_network(const Network& net);

// The 2x2 signalized grid with eight perimeter centroids and the 8x8 demand
// table of the case study.
Network build_testbed();

namespace testbed {
// Designated incident location: the two-lane through group on the
// I4 -> I2 section of route 2 between centroids 7 and 3.
inline constexpr std::string_view incident_link = "I4-I2:T";
inline constexpr std::string_view route_origin = "7";
inline constexpr std::string_view route_destination = "3";
}  // namespace testbed

}  // namespace signalopt
