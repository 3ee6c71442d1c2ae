#include <array>
#include <optional>

#include "signalopt/netmodel.hpp"

namespace signalopt {

namespace {

// Compass directions, clockwise.
enum Dir : int { north = 0, east = 1, south = 2, west = 3 };

constexpr double kLinkTime = 30.0;        // 500 m at 60 km/h
constexpr double kLaneCapacity = 1800.0;  // veh/h/lane
constexpr int kThroughLanes = 2;
constexpr int kBayLanes = 1;
constexpr double kCycle = 90.0;

// Demand table, veh/h, rows = origin centroid 1..8, columns = destination.
constexpr std::array<std::array<double, 8>, 8> kDemand = {{
    {0, 150, 150, 150, 150, 100, 100, 150},
    {150, 0, 100, 100, 100, 150, 150, 100},
    {150, 100, 0, 150, 100, 100, 100, 150},
    {100, 150, 100, 0, 150, 100, 150, 150},
    {150, 100, 100, 150, 0, 150, 150, 100},
    {100, 100, 100, 100, 0, 0, 150, 100},
    {100, 150, 750, 150, 150, 100, 0, 150},
    {100, 150, 150, 100, 150, 100, 100, 0},
}};

struct Approach {
  // Neighbour in each direction: intersection index (0..3) or centroid
  // number (1..8).
  std::optional<int> intersection;
  int centroid = 0;
};

// I1 I2 on the top row, I3 I4 below; centroids numbered clockwise from the
// west side of I1.
constexpr std::array<std::array<Approach, 4>, 4> kGrid = {{
    {{{std::nullopt, 2}, {1, 0}, {2, 0}, {std::nullopt, 1}}},  // I1
    {{{std::nullopt, 3}, {std::nullopt, 4}, {3, 0}, {0, 0}}},  // I2
    {{{0, 0}, {3, 0}, {std::nullopt, 7}, {std::nullopt, 8}}},  // I3
    {{{1, 0}, {std::nullopt, 5}, {std::nullopt, 6}, {2, 0}}},  // I4
}};

constexpr std::array<std::array<double, 2>, 4> kIntersectionXY = {{
    {0, 1}, {1, 1}, {0, 0}, {1, 0}}};
constexpr std::array<std::array<double, 2>, 8> kCentroidXY = {{
    {-1, 1}, {0, 2}, {1, 2}, {2, 1}, {2, 0}, {1, -1}, {0, -1}, {-1, 0}}};

std::string intersection_id(int i) { return "I" + std::to_string(i + 1); }
std::string neighbour_id(const Approach& a) {
  return a.intersection ? intersection_id(*a.intersection) : std::to_string(a.centroid);
}

char turn_code(Turn t) {
  switch (t) {
    case Turn::left:
      return 'L';
    case Turn::right:
      return 'R';
    case Turn::through:
      break;
  }
  return 'T';
}

constexpr std::array<Turn, 3> kTurns = {Turn::left, Turn::through, Turn::right};

// Left-hand traffic: turning right means heading one step clockwise.
std::optional<Turn> turn_between(int from_dir, int exit_dir) {
  const int heading = (from_dir + 2) % 4;
  if (exit_dir == heading) return Turn::through;
  if (exit_dir == (heading + 1) % 4) return Turn::right;
  if (exit_dir == (heading + 3) % 4) return Turn::left;
  return std::nullopt;  // U-turn
}

bool north_south(int dir) { return dir == north || dir == south; }

// Phase membership of an (approach axis, turn) pair.
//   P1: N/S through + left     P2: E/W through + left
//   P3: E/W right + N/S left   P4: N/S right + E/W left
std::array<bool, 4> phases_for(int from_dir, Turn t) {
  const bool ns = north_south(from_dir);
  switch (t) {
    case Turn::through:
      return {ns, !ns, false, false};
    case Turn::left:
      return ns ? std::array<bool, 4>{true, false, true, false}
                : std::array<bool, 4>{false, true, false, true};
    case Turn::right:
      return ns ? std::array<bool, 4>{false, false, false, true}
                : std::array<bool, 4>{false, false, true, false};
  }
  return {};
}

}  // namespace

Network build_testbed() {
  std::vector<Node> nodes;
  for (int i = 0; i < 4; ++i)
    nodes.push_back({intersection_id(i), NodeKind::signalized, kIntersectionXY[i][0],
                     kIntersectionXY[i][1]});
  for (int c = 0; c < 8; ++c)
    nodes.push_back({std::to_string(c + 1), NodeKind::centroid, kCentroidXY[c][0],
                     kCentroidXY[c][1]});
  auto node_of = [](const std::string& id) -> std::size_t {
    if (id[0] == 'I') return static_cast<std::size_t>(id[1] - '1');
    return 4 + static_cast<std::size_t>(std::stoi(id) - 1);
  };

  std::vector<Link> links;
  auto add_link = [&](const std::string& from, const std::string& to, std::string id,
                      int lanes) {
    Link l;
    l.id = std::move(id);
    l.from = node_of(from);
    l.to = node_of(to);
    l.free_flow_time = kLinkTime;
    l.lanes = lanes;
    l.capacity = lanes * kLaneCapacity;
    links.push_back(std::move(l));
    return links.size() - 1;
  };

  // approach[i][d][turn]: lane-group link entering intersection i from
  // direction d.
  std::array<std::array<std::array<std::size_t, 3>, 4>, 4> approach{};
  // exit_to_centroid[i][d]: link leaving intersection i towards a centroid.
  std::array<std::array<std::size_t, 4>, 4> exit_to_centroid{};

  for (int i = 0; i < 4; ++i) {
    for (int d = 0; d < 4; ++d) {
      const auto from = neighbour_id(kGrid[i][d]);
      const auto to = intersection_id(i);
      for (std::size_t t = 0; t < 3; ++t) {
        const int lanes = kTurns[t] == Turn::through ? kThroughLanes : kBayLanes;
        approach[i][d][t] = add_link(from, to, from + "-" + to + ":" + turn_code(kTurns[t]), lanes);
      }
    }
  }
  for (int i = 0; i < 4; ++i)
    for (int d = 0; d < 4; ++d)
      if (!kGrid[i][d].intersection) {
        const auto c = neighbour_id(kGrid[i][d]);
        exit_to_centroid[i][d] = add_link(intersection_id(i), c, intersection_id(i) + "-" + c,
                                          kThroughLanes);
      }

  std::vector<Movement> movements;
  std::vector<JunctionControl> controls;
  for (int i = 0; i < 4; ++i) {
    JunctionControl control;
    control.junction = static_cast<std::size_t>(i);
    control.cycle = kCycle;
    control.phases.resize(4);
    control.initial_durations.assign(4, kCycle / 4);
    for (int d = 0; d < 4; ++d) {
      for (std::size_t t = 0; t < 3; ++t) {
        const Turn turn = kTurns[t];
        int exit_dir = -1;
        for (int e = 0; e < 4; ++e)
          if (turn_between(d, e) == turn) exit_dir = e;
        const auto& target = kGrid[i][exit_dir];
        std::vector<std::size_t> outs;
        if (target.intersection) {
          // Entering the neighbour from the opposite side.
          const int back = (exit_dir + 2) % 4;
          for (auto l : approach[*target.intersection][back]) outs.push_back(l);
        } else {
          outs.push_back(exit_to_centroid[i][exit_dir]);
        }
        const auto phases = phases_for(d, turn);
        for (auto out : outs) {
          const auto m = movements.size();
          movements.push_back({approach[i][d][t], out, turn});
          for (std::size_t p = 0; p < 4; ++p)
            if (phases[p]) control.phases[p].movements.push_back(m);
        }
      }
    }
    controls.push_back(std::move(control));
  }

  std::vector<OdEntry> demand;
  for (std::size_t o = 0; o < 8; ++o)
    for (std::size_t dst = 0; dst < 8; ++dst)
      demand.push_back({4 + o, 4 + dst, kDemand[o][dst]});

  return Network(std::move(nodes), std::move(links), std::move(movements),
                 OdMatrix(std::move(demand)), std::move(controls));
}

}  // namespace signalopt
