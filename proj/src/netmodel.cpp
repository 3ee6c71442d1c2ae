#include "signalopt/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <utility>

namespace signalopt {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::signalized:
      return "signalized";
    case NodeKind::junction:
      return "junction";
    case NodeKind::centroid:
      return "centroid";
  }
  return "junction";
}

std::string_view to_string(Turn turn) {
  switch (turn) {
    case Turn::through:
      return "through";
    case Turn::left:
      return "left";
    case Turn::right:
      return "right";
  }
  return "through";
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "signalized" || text == "signalized-intersection") return NodeKind::signalized;
  if (text == "junction" || text == "plain-junction") return NodeKind::junction;
  if (text == "centroid" || text == "centroid-connector") return NodeKind::centroid;
  throw InputError("unknown node kind '" + std::string(text) + "'");
}

Turn parse_turn(std::string_view text) {
  if (text == "through") return Turn::through;
  if (text == "left") return Turn::left;
  if (text == "right") return Turn::right;
  throw InputError("unknown turn '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

OdMatrix::OdMatrix(std::vector<OdEntry> entries) : entries_(std::move(entries)) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : entries_) {
    if (!(e.demand >= 0.0) || !std::isfinite(e.demand))
      throw InputError("negative or non-finite demand");
    if (e.origin == e.destination && e.demand != 0.0)
      throw InputError("non-zero diagonal demand");
    if (!seen.emplace(e.origin, e.destination).second)
      throw InputError("duplicate demand entry");
  }
}

double OdMatrix::demand(std::size_t origin, std::size_t destination) const {
  for (const auto& e : entries_)
    if (e.origin == origin && e.destination == destination) return e.demand;
  return 0.0;
}

double OdMatrix::total() const {
  return std::accumulate(entries_.begin(), entries_.end(), 0.0,
                         [](double s, const OdEntry& e) { return s + e.demand; });
}

double OdMatrix::row_total(std::size_t origin) const {
  double s = 0.0;
  for (const auto& e : entries_)
    if (e.origin == origin) s += e.demand;
  return s;
}

double OdMatrix::column_total(std::size_t destination) const {
  double s = 0.0;
  for (const auto& e : entries_)
    if (e.destination == destination) s += e.demand;
  return s;
}

std::vector<OdEntry> OdMatrix::positive() const {
  std::vector<OdEntry> out;
  for (const auto& e : entries_)
    if (e.demand > 0.0) out.push_back(e);
  return out;
}

// ---------------------------------------------------------------------------

Network::Network(std::vector<Node> nodes, std::vector<Link> links,
                 std::vector<Movement> movements, OdMatrix od,
                 std::vector<JunctionControl> controls)
    : nodes_(std::move(nodes)),
      links_(std::move(links)),
      movements_(std::move(movements)),
      od_(std::move(od)),
      controls_(std::move(controls)) {
  index_and_validate();
}

void Network::index_and_validate() {
  node_by_id_.clear();
  link_by_id_.clear();
  centroids_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!node_by_id_.emplace(nodes_[i].id, i).second)
      throw InputError("duplicate node id '" + nodes_[i].id + "'");
    if (nodes_[i].kind == NodeKind::centroid) centroids_.push_back(i);
  }

  outgoing_.assign(nodes_.size(), {});
  for (std::size_t i = 0; i < links_.size(); ++i) {
    auto& l = links_[i];
    if (!link_by_id_.emplace(l.id, i).second)
      throw InputError("duplicate link id '" + l.id + "'");
    if (l.from >= nodes_.size() || l.to >= nodes_.size())
      throw InputError("link '" + l.id + "': missing node reference");
    if (l.from == l.to) throw InputError("link '" + l.id + "': from equals to");
    if (!(l.capacity > 0.0)) throw InputError("link '" + l.id + "': non-positive capacity");
    if (!(l.free_flow_time > 0.0))
      throw InputError("link '" + l.id + "': non-positive free-flow time");
    if (l.lanes < 1) throw InputError("link '" + l.id + "': lanes must be >= 1");
    l.signal_controlled = nodes_[l.to].kind == NodeKind::signalized;
    outgoing_[l.from].push_back(i);
  }

  movements_from_.assign(links_.size(), {});
  for (std::size_t m = 0; m < movements_.size(); ++m) {
    const auto& mv = movements_[m];
    if (mv.in_link >= links_.size() || mv.out_link >= links_.size())
      throw InputError("movement " + std::to_string(m) + ": missing link reference");
    if (links_[mv.in_link].to != links_[mv.out_link].from)
      throw InputError("movement " + std::to_string(m) + ": links '" +
                       links_[mv.in_link].id + "' and '" + links_[mv.out_link].id +
                       "' do not meet");
    movements_from_[mv.in_link].push_back(m);
  }

  for (const auto& e : od_.entries()) {
    if (e.origin >= nodes_.size() || e.destination >= nodes_.size())
      throw InputError("demand: missing node reference");
    if (nodes_[e.origin].kind != NodeKind::centroid ||
        nodes_[e.destination].kind != NodeKind::centroid)
      throw InputError("demand between non-centroid nodes '" + nodes_[e.origin].id +
                       "' -> '" + nodes_[e.destination].id + "'");
  }

  std::set<std::size_t> controlled;
  for (const auto& c : controls_) {
    if (c.junction >= nodes_.size()) throw InputError("signal: missing node reference");
    const auto& jid = nodes_[c.junction].id;
    if (nodes_[c.junction].kind != NodeKind::signalized)
      throw InputError("signal at non-signalized node '" + jid + "'");
    if (!controlled.insert(c.junction).second)
      throw InputError("duplicate signal for junction '" + jid + "'");
    if (c.phases.empty()) throw InputError("signal '" + jid + "': no phases");
    if (!(c.cycle > 0.0)) throw InputError("signal '" + jid + "': non-positive cycle");
    for (const auto& p : c.phases) {
      if (p.movements.empty())
        throw InputError("signal '" + jid + "': phase without green movements");
      for (auto m : p.movements) {
        if (m >= movements_.size())
          throw InputError("signal '" + jid + "': missing movement reference");
        if (links_[movements_[m].in_link].to != c.junction)
          throw InputError("signal '" + jid + "': movement " + std::to_string(m) +
                           " belongs to another junction");
      }
    }
    if (!c.initial_durations.empty() && c.initial_durations.size() != c.phases.size())
      throw InputError("signal '" + jid + "': initial durations do not match phases");
  }

  for (const auto& e : od_.entries()) {
    if (e.demand > 0.0 && !reachable(*this, e.origin, e.destination))
      throw InputError("demand between unreachable centroids '" + nodes_[e.origin].id +
                       "' -> '" + nodes_[e.destination].id + "'");
  }
}

std::optional<std::size_t> Network::find_node(std::string_view id) const {
  auto it = node_by_id_.find(std::string(id));
  if (it == node_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Network::find_link(std::string_view id) const {
  auto it = link_by_id_.find(std::string(id));
  if (it == link_by_id_.end()) return std::nullopt;
  return it->second;
}

std::size_t Network::node_index(std::string_view id) const {
  if (auto i = find_node(id)) return *i;
  throw InputError("missing node reference '" + std::string(id) + "'");
}

std::size_t Network::link_index(std::string_view id) const {
  if (auto i = find_link(id)) return *i;
  throw InputError("missing link reference '" + std::string(id) + "'");
}

std::vector<std::size_t> Network::successors(std::size_t link) const {
  const auto& l = links_[link];
  if (nodes_[l.to].kind == NodeKind::centroid) return {};
  const auto& moves = movements_from_[link];
  if (!moves.empty()) {
    std::vector<std::size_t> out;
    out.reserve(moves.size());
    for (auto m : moves) out.push_back(movements_[m].out_link);
    return out;
  }
  return outgoing_[l.to];
}

Network Network::with_capacity(std::size_t link, double capacity) const {
  Network copy = *this;
  copy.links_.at(link).capacity = capacity;
  if (!(capacity > 0.0))
    throw InputError("link '" + copy.links_[link].id + "': non-positive capacity");
  return copy;
}

Network Network::with_demand(OdMatrix od) const {
  return Network(nodes_, links_, movements_, std::move(od), controls_);
}

// ---------------------------------------------------------------------------

bool reachable(const Network& net, std::size_t origin, std::size_t destination) {
  std::vector<char> seen(net.links().size(), 0);
  std::deque<std::size_t> queue;
  for (auto l : net.outgoing(origin)) {
    seen[l] = 1;
    queue.push_back(l);
  }
  while (!queue.empty()) {
    auto l = queue.front();
    queue.pop_front();
    if (net.link(l).to == destination) return true;
    for (auto next : net.successors(l)) {
      if (!seen[next]) {
        seen[next] = 1;
        queue.push_back(next);
      }
    }
  }
  return false;
}

namespace {

struct RouteCandidate {
  double time;
  std::vector<std::size_t> links;
};

bool id_sequence_less(const Network& net, const std::vector<std::size_t>& a,
                      const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(),
      [&](std::size_t x, std::size_t y) { return net.link(x).id < net.link(y).id; });
}

}  // namespace

std::vector<std::vector<std::size_t>> enumerate_routes(const Network& net,
                                                       std::size_t origin,
                                                       std::size_t destination,
                                                       std::size_t max_routes) {
  if (max_routes == 0) return {};
  if (!reachable(net, origin, destination))
    throw InputError("no path from '" + net.node(origin).id + "' to '" +
                     net.node(destination).id + "'");

  std::vector<RouteCandidate> found;
  std::vector<std::size_t> path;
  std::vector<char> on_path(net.nodes().size(), 0);
  on_path[origin] = 1;

  auto visit = [&](auto&& self, std::size_t link, double time) -> void {
    const auto& l = net.link(link);
    if (on_path[l.to]) return;
    path.push_back(link);
    time += l.free_flow_time;
    if (l.to == destination) {
      found.push_back({time, path});
    } else {
      on_path[l.to] = 1;
      for (auto next : net.successors(link)) self(self, next, time);
      on_path[l.to] = 0;
    }
    path.pop_back();
  };
  for (auto l : net.outgoing(origin)) visit(visit, l, 0.0);

  std::sort(found.begin(), found.end(), [&](const auto& a, const auto& b) {
    if (a.time != b.time) return a.time < b.time;
    return id_sequence_less(net, a.links, b.links);
  });
  if (found.size() > max_routes) found.resize(max_routes);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(found.size());
  for (auto& r : found) out.push_back(std::move(r.links));
  return out;
}

}  // namespace signalopt
