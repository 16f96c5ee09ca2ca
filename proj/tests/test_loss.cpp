// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pyric/loss.hpp"
#include "pyric/rng.hpp"

using namespace pyric;

TEST_CASE("hard counts: hand-enumerated 2x2 table") {
  const std::vector<double> index{1.0, 3.0, 5.0, 7.0};
  const std::vector<std::uint8_t> obs{0, 0, 1, 1};
  const ConfusionCounts c = hard_counts(index, obs, 4.0);
  CHECK(c.hits == 2.0);
  CHECK(c.misses == 0.0);
  CHECK(c.false_alarms == 0.0);
  CHECK(c.correct_negatives == 2.0);
  CHECK(!c.soft);
  CHECK(c.observed_positives() == 2.0);
  CHECK(c.observed_negatives() == 2.0);
}

TEST_CASE("hard counts: threshold above the maximum yields no alerts") {
  const std::vector<double> index{1.0, 3.0, 5.0};
  const std::vector<std::uint8_t> obs{1, 0, 1};
  const ConfusionCounts c = hard_counts(index, obs, 100.0);
  CHECK(c.hits == 0.0);
  CHECK(c.false_alarms == 0.0);
  CHECK(c.misses == 2.0);
  CHECK(c.correct_negatives == 1.0);
}

TEST_CASE("hard counts: perfect forecast has no misses or false alarms") {
  const std::vector<double> index{9.0, 1.0, 8.0, 2.0};
  const std::vector<std::uint8_t> obs{1, 0, 1, 0};
  const ConfusionCounts c = hard_counts(index, obs, 5.0);
  CHECK(c.misses == 0.0);
  CHECK(c.false_alarms == 0.0);
}

TEST_CASE("counts reject empty or misaligned series") {
  const std::vector<double> empty_i;
  const std::vector<std::uint8_t> empty_o;
  CHECK_THROWS_AS(hard_counts(empty_i, empty_o, 0.0), DomainError);
  const std::vector<double> one{1.0};
  const std::vector<std::uint8_t> two{0, 1};
  CHECK_THROWS_AS(hard_counts(one, two, 0.0), DomainError);
}

TEST_CASE("soft counts: all-at-threshold gives half weight everywhere") {
  const std::vector<double> index{2.0, 2.0, 2.0, 2.0};
  const std::vector<std::uint8_t> obs{1, 1, 0, 1};
  const ConfusionCounts c = soft_counts(index, obs, 2.0, 7.0);
  CHECK(c.soft);
  CHECK(c.hits == doctest::Approx(1.5));   // 0.5 * three fires
  CHECK(c.misses == doctest::Approx(1.5));
  CHECK(c.false_alarms == doctest::Approx(0.5));
  CHECK(c.correct_negatives == doctest::Approx(0.5));
}

TEST_CASE("soft counts: hand-computed sigmoid sums at beta = 5") {
  const std::vector<double> index{0.0, 1.0, 2.0};
  const std::vector<std::uint8_t> obs{0, 1, 1};
  const ConfusionCounts c = soft_counts(index, obs, 1.5, 5.0);
  auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  CHECK(c.false_alarms == doctest::Approx(sig(5.0 * (0.0 - 1.5))));
  CHECK(c.hits ==
        doctest::Approx(sig(5.0 * (1.0 - 1.5)) + sig(5.0 * (2.0 - 1.5))));
  CHECK(c.hits + c.misses == doctest::Approx(2.0));
}

TEST_CASE("soft counts converge to hard counts as beta grows") {
  Rng rng(5150, "beta");
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> index;
    std::vector<std::uint8_t> obs;
    const double threshold = 5.0;
    for (int i = 0; i < 40; ++i) {
      double v = rng.uniform(0.0, 10.0);
      if (std::fabs(v - threshold) < 0.5) v += 1.0; // bounded away
      index.push_back(v);
      obs.push_back(rng.bernoulli(0.3) ? 1 : 0);
    }
    const ConfusionCounts hard = hard_counts(index, obs, threshold);
    double prev_gap = std::numeric_limits<double>::infinity();
    for (const double beta : {10.0, 100.0, 1000.0}) {
      const ConfusionCounts soft = soft_counts(index, obs, threshold, beta);
      const double gap = std::fabs(soft.hits - hard.hits) +
                         std::fabs(soft.misses - hard.misses) +
                         std::fabs(soft.false_alarms - hard.false_alarms) +
                         std::fabs(soft.correct_negatives -
                                   hard.correct_negatives);
      CHECK(gap <= prev_gap + 1e-12);
      prev_gap = gap;
    }
    CHECK(prev_gap <= 1e-3); // beta = 1000, half a unit from the threshold
  }
}

TEST_CASE("EDI: identities from the definition") {
  // H = F -> 0 (random forecast)
  ConfusionCounts c{30.0, 70.0, 30.0, 70.0, false};
  CHECK(edi(c).value == doctest::Approx(0.0));

  // perfect forecast limit
  ConfusionCounts perfect{100.0, 0.0, 0.0, 100.0, false};
  const EdiScore p = edi(perfect);
  CHECK(p.value == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(p.degenerate); // rates needed flooring

  // printed-formula fixture: H = 0.8, F = 0.1
  ConfusionCounts fx{80.0, 20.0, 10.0, 90.0, false};
  const EdiScore s = edi(fx);
  CHECK(s.value == doctest::Approx(0.8233036222501059).epsilon(1e-12));
  CHECK(!s.degenerate);
}

TEST_CASE("EDI: antisymmetric under swapping the table roles") {
  Rng rng(321, "swap");
  for (int i = 0; i < 100; ++i) {
    const double h = rng.uniform(1.0, 99.0);
    const double m = 100.0 - h;
    const double f = rng.uniform(1.0, 99.0);
    const double cn = 100.0 - f;
    const EdiScore a = edi(ConfusionCounts{h, m, f, cn, false});
    const EdiScore b = edi(ConfusionCounts{f, cn, h, m, false});
    CHECK(a.value == doctest::Approx(-b.value).epsilon(1e-12));
  }
}

TEST_CASE("EDI: invariant under uniform rescaling of the counts") {
  Rng rng(654, "scale");
  for (int i = 0; i < 100; ++i) {
    const ConfusionCounts c{rng.uniform(1.0, 50.0), rng.uniform(1.0, 50.0),
                            rng.uniform(1.0, 50.0), rng.uniform(1.0, 50.0),
                            false};
    const double k = rng.uniform(0.1, 25.0);
    const ConfusionCounts scaled{k * c.hits, k * c.misses, k * c.false_alarms,
                                 k * c.correct_negatives, false};
    CHECK(edi(c).value == doctest::Approx(edi(scaled).value).epsilon(1e-10));
  }
}

TEST_CASE("EDI: value always inside [-1, 1]") {
  Rng rng(987, "range");
  for (int i = 0; i < 300; ++i) {
    const ConfusionCounts c{rng.uniform(0.0, 50.0), rng.uniform(0.0, 50.0),
                            rng.uniform(0.0, 50.0), rng.uniform(0.0, 50.0),
                            false};
    if (c.observed_positives() <= 0.0 || c.observed_negatives() <= 0.0)
      continue;
    const EdiScore s = edi(c);
    CHECK(s.value >= -1.0);
    CHECK(s.value <= 1.0);
  }
}

TEST_CASE("EDI: no observed fires is an explicit error, never a number") {
  ConfusionCounts c{0.0, 0.0, 3.0, 7.0, false};
  CHECK_THROWS_AS(edi(c), DegenerateDataError);
  ConfusionCounts n{3.0, 7.0, 0.0, 0.0, false};
  CHECK_THROWS_AS(edi(n), DegenerateDataError);
  ConfusionCounts ok{1.0, 0.0, 0.0, 1.0, false};
  CHECK_THROWS_AS(edi(ok, 0.7), DomainError); // epsilon out of range
}

TEST_CASE("edi_loss: perfect separation drives the loss toward zero") {
  Tape t;
  std::vector<NodeId> vars;
  std::vector<std::uint8_t> obs;
  for (int i = 0; i < 20; ++i) {
    vars.push_back(t.variable(i < 10 ? 1.0 : 9.0));
    obs.push_back(i < 10 ? 0 : 1);
  }
  const NodeId loss = edi_loss(t, vars, obs, 5.0, 1000.0);
  CHECK(t.value(loss) == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("edi_loss: H = F configuration scores a loss of 1") {
  Tape t;
  std::vector<NodeId> vars;
  std::vector<std::uint8_t> obs;
  // Same index distribution for fire and no-fire samples -> soft H == F.
  for (int i = 0; i < 10; ++i) {
    const double v = static_cast<double>(i);
    vars.push_back(t.variable(v));
    obs.push_back(0);
    vars.push_back(t.variable(v));
    obs.push_back(1);
  }
  const NodeId loss = edi_loss(t, vars, obs, 4.5, 10.0);
  CHECK(t.value(loss) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("edi_loss gradients match finite differences") {
  Rng rng(77, "lossgrad");
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 12;
    std::vector<double> x(n);
    std::vector<std::uint8_t> obs(n);
    bool has_fire = false, has_nofire = false;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(0.0, 10.0);
      if (std::fabs(x[i] - 5.0) < 0.1) x[i] += 0.2;
      obs[i] = rng.bernoulli(0.4) ? 1 : 0;
      (obs[i] ? has_fire : has_nofire) = true;
    }
    if (!has_fire || !has_nofire) continue;
    const GradCheckReport r = grad_check(
        [&](Tape& t, std::span<const NodeId> v) {
          return edi_loss(t, v, obs, 5.0, 3.0);
        },
        x, 1e-5);
    CAPTURE(r.summary());
    CHECK(r.max_rel_error <= 1e-4);
  }
}

TEST_CASE("soft EDI on a tape approaches hard EDI at large beta") {
  Rng rng(88, "tape-edi");
  std::vector<double> x;
  std::vector<std::uint8_t> obs;
  for (int i = 0; i < 60; ++i) {
    double v = rng.uniform(0.0, 10.0);
    if (std::fabs(v - 5.0) < 0.4) v += 0.8;
    x.push_back(v);
    obs.push_back(rng.bernoulli(0.25) ? 1 : 0);
  }
  const EdiScore hard = edi(hard_counts(x, obs, 5.0));
  Tape t;
  std::vector<NodeId> vars;
  for (const double v : x) vars.push_back(t.variable(v));
  const NodeId soft = edi_node(t, soft_counts(t, vars, obs, 5.0, 1000.0));
  CHECK(std::fabs(t.value(soft) - hard.value) <= 1e-2);
}
