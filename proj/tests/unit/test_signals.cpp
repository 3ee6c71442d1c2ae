#include <random>
#include <set>

#include "doctest.h"
#include "../support/check.hpp"
#include "../support/fixtures.hpp"
#include "signalopt/signals.hpp"

using namespace signalopt;
using doctest::Approx;

namespace {

// Toy junction with four phases; phases 1 and 4 serve A -> C, 2 and 3 serve
// B -> D.
Network four_phase_toy() {
  auto doc = fixture::Toy{}.doc();
  doc["signals"][0]["phases"] = {{{"movements", {0}}}, {{"movements", {1}}},
                                 {{"movements", {1}}}, {{"movements", {0}}}};
  doc["signals"][0]["initial_durations_s"] = {22.5, 22.5, 22.5, 22.5};
  return load_network(doc.dump());
}

SignalPlan plan_of(const Network& net, std::size_t control, std::vector<double> d) {
  auto plans = initial_plans(net);
  auto p = plans.at(control);
  for (std::size_t k = 0; k < d.size(); ++k) p.phases[k].duration = d[k];
  return p;
}

// Reference: add the split of every phase that grants green to a
// movement whose in_link is `a`.
double lambda_oracle(const Network& net, const std::vector<SignalPlan>& plans, std::size_t a) {
  if (!net.link(a).signal_controlled) return 1.0;
  double s = 0.0;
  for (const auto& p : plans)
    for (const auto& ph : p.phases) {
      bool hit = false;
      for (auto m : ph.green_movements) hit = hit || net.movements()[m].in_link == a;
      if (hit) s += ph.duration / p.cycle;
    }
  return s;
}

}  // namespace

TEST_CASE("phase splits") {
  const auto net = four_phase_toy();
  const auto s = phase_splits(plan_of(net, 0, {18, 22, 12, 38}));
  REQUIRE(s.size() == 4);
  CHECK(s[0] == Approx(0.2).epsilon(1e-12));
  CHECK(s[1] == Approx(22.0 / 90).epsilon(1e-12));
  CHECK(s[2] == Approx(12.0 / 90).epsilon(1e-12));
  CHECK(s[3] == Approx(38.0 / 90).epsilon(1e-12));
  for (double v : phase_splits(plan_of(net, 0, {22.5, 22.5, 22.5, 22.5}))) CHECK(v == 0.25);
  CHECK_THROWS_CONTAINING(InputError, phase_splits(plan_of(net, 0, {18, 22, 12, 37})),
                          "invalid plan");
  CHECK_THROWS_AS(phase_splits(plan_of(net, 0, {-1, 23, 30, 38})), InputError);
}

TEST_CASE("link green split") {
  const auto net = four_phase_toy();
  const std::vector<SignalPlan> plans{plan_of(net, 0, {18, 22, 12, 38})};
  CHECK(link_green_split(net, plans, net.link_index("A-J")) == Approx(56.0 / 90).epsilon(1e-12));
  CHECK(link_green_split(net, plans, net.link_index("B-J")) == Approx(34.0 / 90).epsilon(1e-12));
  CHECK(link_green_split(net, plans, net.link_index("J-C")) == 1.0);

  // green in every phase
  auto doc = fixture::Toy{}.doc();
  doc["signals"][0]["phases"] = {{{"movements", {0, 1}}}, {{"movements", {0}}}};
  const auto all = load_network(doc.dump());
  CHECK(link_green_split(all, initial_plans(all), all.link_index("A-J")) == Approx(1.0).epsilon(1e-15));

  // a controlled approach that never gets green
  doc["signals"][0]["phases"] = {{{"movements", {0}}}, {{"movements", {0}}}};
  const auto starved = load_network(doc.dump());
  CHECK_THROWS_CONTAINING(InputError,
                          link_green_split(starved, initial_plans(starved), starved.link_index("B-J")),
                          "green in no phase");
}

TEST_CASE("property: random plans keep splits summing to one and the lambda bounds") {
  const auto net = build_testbed();
  const auto layout = ChromosomeLayout::from_network(net);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> genes;
    for (const auto& seg : layout.segments()) {
      auto d = fixture::random_durations(rng, seg.phase_count, seg.cycle, layout.min_green());
      close_cycle(d, seg.cycle, d.size() - 1);
      genes.insert(genes.end(), d.begin(), d.end());
    }
    const auto plans = decode_chromosome(genes, layout, net);
    for (const auto& p : plans) {
      double s = 0.0;
      for (double v : phase_splits(p)) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
    const auto lambdas = link_green_splits(net, plans);
    for (std::size_t a = 0; a < net.links().size(); ++a) {
      CHECK(lambdas[a] == Approx(lambda_oracle(net, plans, a)).epsilon(1e-12));
      CHECK(lambdas[a] > 0.0);
      CHECK(lambdas[a] <= 1.0);
      // at least the largest single phase that serves it
      if (net.link(a).signal_controlled)
        for (const auto& p : plans)
          for (const auto& ph : p.phases)
            for (auto m : ph.green_movements)
              if (net.movements()[m].in_link == a) CHECK(lambdas[a] >= ph.duration / p.cycle - 1e-15);
    }
    CHECK(encode_plans(plans) == genes);
  }
}

TEST_CASE("decode rejects bad chromosomes") {
  const auto net = build_testbed();
  const auto layout = ChromosomeLayout::from_network(net);
  std::vector<double> s1{18, 22, 12, 38, 20, 19, 15, 36, 17, 12, 17, 44, 30, 22, 9, 29};
  const auto plans = decode_chromosome(s1, layout, net);
  REQUIRE(plans.size() == 4);
  CHECK(plans[0].durations() == std::vector<double>{18, 22, 12, 38});
  std::vector<double> s3{31, 22, 13, 24, 29, 23, 17, 21, 30, 21, 18, 21, 29, 38, 9, 14};
  CHECK(decode_chromosome(s3, layout, net)[3].durations() == std::vector<double>{29, 38, 9, 14});
  s1.pop_back();
  CHECK_THROWS_AS(decode_chromosome(s1, layout, net), InputError);
  s1.push_back(30);
  CHECK_THROWS_AS(decode_chromosome(s1, layout, net), InputError);
}

TEST_CASE("repair") {
  const std::vector<double> ok{18, 22, 12, 38};
  CHECK(repair(ok, 90, 3) == ok);
  const auto r = repair(std::vector<double>{0, 30, 30, 30}, 90, 3);
  CHECK(r[0] == 3.0);
  CHECK(r[1] == Approx(29.0).epsilon(1e-12));
  CHECK(r[2] == Approx(29.0).epsilon(1e-12));
  CHECK(r[3] == Approx(29.0).epsilon(1e-12));
  CHECK(segment_sum(r) == 90.0);
  CHECK_THROWS_CONTAINING(InputError, repair(std::vector<double>{1, 2, 3, 4}, 10, 3),
                          "infeasible layout");
  CHECK_THROWS_AS(repair(std::vector<double>{NAN, 30, 30, 30}, 90, 3), InputError);
}

TEST_CASE("property: repair lands on the simplex and is idempotent") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20.0, 80.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<double> d(n);
    for (auto& v : d) v = u(rng);
    const double cycle = 60 + trial % 61;
    const auto r = repair(d, cycle, 3);
    CHECK(segment_sum(r) == cycle);
    for (double v : r) CHECK(v >= 3.0 - 1e-9);
    CHECK(repair(r, cycle, 3) == r);
  }
}

TEST_CASE("layout validation") {
  CHECK_THROWS_CONTAINING(InputError,
                          ChromosomeLayout({{0, 0, 0, 4, 10.0}}, 3.0), "infeasible layout");
  const auto net = fixture::Toy{}.network();
  const auto l = ChromosomeLayout::from_network(net, 45.0);  // degenerate: both phases forced to 45
  CHECK(l.gene_count() == 2);
  CHECK_THROWS_AS(ChromosomeLayout::from_network(net, 45.5), InputError);
}

TEST_CASE("display rounding keeps the cycle") {
  const auto d = display_durations(std::vector<double>{18.4, 22.4, 12.6, 36.6}, 90);
  CHECK(d == std::vector<long>{18, 22, 13, 37});
  long s = 0;
  for (auto v : display_durations(std::vector<double>{22.5, 22.5, 22.5, 22.5}, 90)) s += v;
  CHECK(s == 90);
}
