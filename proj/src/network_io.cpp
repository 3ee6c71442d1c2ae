#include <fstream>
#include <sstream>

#include <json.hpp>

#include "signalopt/netmodel.hpp"

namespace signalopt {

using nlohmann::json;

namespace {

// Ids may be written as strings or integers ("7" and 7 are the same node).
std::string id_of(const json& v, const char* what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw InputError(std::string("invalid ") + what + " id");
}

const json& require(const json& obj, const char* key, const char* ctx) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw InputError(std::string(ctx) + ": missing field '" + key + "'");
  return *it;
}

double number(const json& obj, const char* key, const char* ctx) {
  const auto& v = require(obj, key, ctx);
  if (!v.is_number()) throw InputError(std::string(ctx) + ": field '" + key + "' is not a number");
  return v.get<double>();
}

}  // namespace

Network load_network(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("network document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("network document must be a JSON object");

  std::vector<std::string> centroid_ids;
  if (auto it = doc.find("centroids"); it != doc.end())
    for (const auto& c : *it) centroid_ids.push_back(id_of(c, "centroid"));

  std::vector<Node> nodes;
  std::unordered_map<std::string, std::size_t> node_at;
  for (const auto& n : require(doc, "nodes", "network")) {
    Node node;
    node.id = id_of(require(n, "id", "node"), "node");
    bool listed = std::find(centroid_ids.begin(), centroid_ids.end(), node.id) != centroid_ids.end();
    if (auto k = n.find("kind"); k != n.end()) {
      node.kind = parse_node_kind(k->get<std::string>());
      if (listed && node.kind != NodeKind::centroid)
        throw InputError("node '" + node.id + "' listed as centroid but has kind '" +
                         k->get<std::string>() + "'");
    } else {
      node.kind = listed ? NodeKind::centroid : NodeKind::junction;
    }
    node.x = n.value("x", 0.0);
    node.y = n.value("y", 0.0);
    node_at.emplace(node.id, nodes.size());
    nodes.push_back(std::move(node));
  }
  for (const auto& c : centroid_ids)
    if (!node_at.count(c)) throw InputError("missing node reference '" + c + "' in centroids");

  auto resolve_node = [&](const json& v, const std::string& ctx) {
    auto id = id_of(v, "node");
    auto it = node_at.find(id);
    if (it == node_at.end())
      throw InputError(ctx + ": missing node reference '" + id + "'");
    return it->second;
  };

  std::vector<Link> links;
  std::unordered_map<std::string, std::size_t> link_at;
  for (const auto& l : require(doc, "links", "network")) {
    Link link;
    link.id = id_of(require(l, "id", "link"), "link");
    const std::string ctx = "link '" + link.id + "'";
    link.from = resolve_node(require(l, "from", ctx.c_str()), ctx);
    link.to = resolve_node(require(l, "to", ctx.c_str()), ctx);
    link.free_flow_time = number(l, "free_flow_time_s", ctx.c_str());
    link.capacity = number(l, "capacity_vph", ctx.c_str());
    link.lanes = l.value("lanes", 1);
    link_at.emplace(link.id, links.size());
    links.push_back(std::move(link));
  }

  auto resolve_link = [&](const json& v, const char* ctx) {
    auto id = id_of(v, "link");
    auto it = link_at.find(id);
    if (it == link_at.end())
      throw InputError(std::string(ctx) + ": missing link reference '" + id + "'");
    return it->second;
  };

  std::vector<Movement> movements;
  if (auto it = doc.find("movements"); it != doc.end()) {
    for (const auto& m : *it) {
      Movement mv;
      mv.in_link = resolve_link(require(m, "in_link", "movement"), "movement");
      mv.out_link = resolve_link(require(m, "out_link", "movement"), "movement");
      mv.turn = parse_turn(m.value("turn", std::string("through")));
      movements.push_back(mv);
    }
  }

  std::vector<OdEntry> demand;
  if (auto it = doc.find("demand"); it != doc.end()) {
    for (const auto& d : *it) {
      OdEntry e;
      e.origin = resolve_node(require(d, "from", "demand"), "demand");
      e.destination = resolve_node(require(d, "to", "demand"), "demand");
      e.demand = number(d, "vph", "demand");
      demand.push_back(e);
    }
  }

  std::vector<JunctionControl> controls;
  if (auto it = doc.find("signals"); it != doc.end()) {
    for (const auto& s : *it) {
      JunctionControl c;
      c.junction = resolve_node(require(s, "junction", "signal"), "signal");
      c.cycle = s.value("cycle_s", 90.0);
      for (const auto& p : require(s, "phases", "signal")) {
        PhaseSpec phase;
        for (const auto& ref : require(p, "movements", "phase")) {
          if (!ref.is_number_integer() || ref.get<long long>() < 0 ||
              static_cast<std::size_t>(ref.get<long long>()) >= movements.size())
            throw InputError("phase: missing movement reference");
          phase.movements.push_back(ref.get<std::size_t>());
        }
        c.phases.push_back(std::move(phase));
      }
      if (auto d = s.find("initial_durations_s"); d != s.end())
        c.initial_durations = d->get<std::vector<double>>();
      controls.push_back(std::move(c));
    }
  }

  return Network(std::move(nodes), std::move(links), std::move(movements),
                 OdMatrix(std::move(demand)), std::move(controls));
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open network file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_network(buf.str());
}

std::string dump_network(const Network& net) {
  json doc;
  doc["nodes"] = json::array();
  doc["centroids"] = json::array();
  for (const auto& n : net.nodes()) {
    doc["nodes"].push_back({{"id", n.id}, {"kind", std::string(to_string(n.kind))},
                            {"x", n.x}, {"y", n.y}});
    if (n.kind == NodeKind::centroid) doc["centroids"].push_back(n.id);
  }
  doc["links"] = json::array();
  for (const auto& l : net.links())
    doc["links"].push_back({{"id", l.id},
                            {"from", net.node(l.from).id},
                            {"to", net.node(l.to).id},
                            {"free_flow_time_s", l.free_flow_time},
                            {"capacity_vph", l.capacity},
                            {"lanes", l.lanes}});
  doc["movements"] = json::array();
  for (const auto& m : net.movements())
    doc["movements"].push_back({{"in_link", net.link(m.in_link).id},
                                {"out_link", net.link(m.out_link).id},
                                {"turn", std::string(to_string(m.turn))}});
  doc["demand"] = json::array();
  for (const auto& e : net.od().entries())
    doc["demand"].push_back({{"from", net.node(e.origin).id},
                             {"to", net.node(e.destination).id},
                             {"vph", e.demand}});
  doc["signals"] = json::array();
  for (const auto& c : net.controls()) {
    json phases = json::array();
    for (const auto& p : c.phases) phases.push_back({{"movements", p.movements}});
    json s = {{"junction", net.node(c.junction).id}, {"cycle_s", c.cycle}, {"phases", phases}};
    if (!c.initial_durations.empty()) s["initial_durations_s"] = c.initial_durations;
    doc["signals"].push_back(std::move(s));
  }
  return doc.dump(2);
}

}  // namespace signalopt
