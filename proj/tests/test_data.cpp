// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pyric/grid.hpp"
#include "pyric/rng.hpp"
#include "pyric/synthetic.hpp"

using namespace pyric;

namespace {

Layer2D constant_layer(const GridDefinition& g, double v) {
  Layer2D layer;
  layer.grid = g;
  layer.values.assign(g.n_cells(), v);
  return layer;
}

std::filesystem::path temp_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("dates: ISO round trip, day counts, calendar ranges") {
  const Date d = Date::from_iso("2010-01-01");
  CHECK(d.to_iso() == "2010-01-01");
  CHECK(d.year() == 2010);
  CHECK(days_between(d, Date::from_iso("2010-01-11")) == 10);

  // The paper-style split day counts follow from the calendar.
  const DateRange train{Date::from_iso("2010-01-01"),
                        Date::from_iso("2015-12-31")};
  const DateRange test{Date::from_iso("2016-01-01"),
                       Date::from_iso("2020-12-31")};
  CHECK(train.n_days() == 2191);
  CHECK(test.n_days() == 1827);
  CHECK(!train.overlaps(test));
  CHECK_THROWS_AS(Date::from_iso("2010-13-01"), IoError);
  CHECK_THROWS_AS(Date::from_iso("nonsense"), IoError);
}

TEST_CASE("temporal split gives disjoint index windows") {
  const TimeAxis axis{Date::from_iso("2010-01-01"), 2191 + 1827};
  const DateRange train{Date::from_iso("2010-01-01"),
                        Date::from_iso("2015-12-31")};
  const DateRange test{Date::from_iso("2016-01-01"),
                       Date::from_iso("2020-12-31")};
  const auto [a, b] = temporal_split(axis, train, test);
  CHECK(a.day_begin == 0);
  CHECK(a.n_days() == 2191);
  CHECK(b.day_begin == 2191);
  CHECK(b.n_days() == 1827);
  CHECK(a.n_days() + b.n_days() == axis.n_days);

  const DateRange overlapping{Date::from_iso("2015-12-31"),
                              Date::from_iso("2016-06-01")};
  CHECK_THROWS_AS(temporal_split(axis, train, overlapping), MismatchError);
  const DateRange outside{Date::from_iso("2021-01-01"),
                          Date::from_iso("2021-12-31")};
  CHECK_THROWS_AS(temporal_split(axis, train, outside), MismatchError);
}

TEST_CASE("bilinear resampling: identity, constants, midpoint") {
  const GridDefinition src = GridDefinition::regular(2, 2, 0.0, 0.0, 1.0);

  Layer2D layer;
  layer.grid = src;
  layer.values = {0.0, 1.0, 0.0, 1.0}; // rows: [0,1], [0,1]

  // Identity on the same grid.
  const Layer2D same = resample_continuous(layer, src);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(same.values[i] == doctest::Approx(layer.values[i]));

  // Constant fields stay constant on any target.
  const GridDefinition tgt = GridDefinition::regular(3, 3, -0.2, -0.2, 0.45);
  const Layer2D flat = resample_continuous(constant_layer(src, 7.5), tgt);
  for (const double v : flat.values) CHECK(v == doctest::Approx(7.5));

  // Midpoint of the [[0,1],[0,1]] field is 0.5.
  GridDefinition mid;
  mid.n_rows = 1;
  mid.n_cols = 1;
  mid.lat = {0.5};
  mid.lon = {0.5};
  mid.resolution_deg = 1.0;
  const Layer2D center = resample_continuous(layer, mid);
  CHECK(center.values[0] == doctest::Approx(0.5));

  // Outside the hull clamps to the nearest source value.
  GridDefinition outside;
  outside.n_rows = 1;
  outside.n_cols = 1;
  outside.lat = {9.0};
  outside.lon = {9.0};
  outside.resolution_deg = 1.0;
  CHECK(resample_continuous(layer, outside).values[0] == doctest::Approx(1.0));

  // A 1x1 source cannot support bilinear interpolation.
  const GridDefinition tiny = GridDefinition::regular(1, 1, 0.0, 0.0, 1.0);
  CHECK_THROWS_AS(resample_continuous(constant_layer(tiny, 1.0), tgt),
                  DomainError);
}

TEST_CASE("nearest-neighbor resampling: identity, uniform fields, tie-break") {
  const GridDefinition src = GridDefinition::regular(2, 2, 0.0, 0.0, 1.0);
  Layer2D classes;
  classes.grid = src;
  classes.values = {2.0, 7.0, 3.0, 5.0};

  const Layer2D same = resample_categorical(classes, src);
  for (std::size_t i = 0; i < 4; ++i) CHECK(same.values[i] == classes.values[i]);

  const GridDefinition tgt = GridDefinition::regular(5, 5, -0.4, -0.4, 0.35);
  const Layer2D flat = resample_categorical(constant_layer(src, 4.0), tgt);
  for (const double v : flat.values) CHECK(v == 4.0);

  // Target centered exactly between the class-2 and class-7 cells: the
  // lexicographically smaller source index wins.
  GridDefinition between;
  between.n_rows = 1;
  between.n_cols = 1;
  between.lat = {0.0};
  between.lon = {0.5};
  between.resolution_deg = 1.0;
  CHECK(resample_categorical(classes, between).values[0] == 2.0);

  // Idempotence on the source grid.
  const Layer2D twice = resample_categorical(same, src);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(twice.values[i] == classes.values[i]);
}

TEST_CASE("pool_fire: any fine fire lights the coarse cell") {
  const GridDefinition fine = GridDefinition::regular(4, 4, 0.0, 0.0, 1.0);
  const GridDefinition coarse = GridDefinition::regular(2, 2, 0.5, 0.5, 2.0);

  FireObservationGrid f;
  f.grid = fine;
  f.time = TimeAxis{Date::from_iso("2020-01-01"), 2};
  f.fire.assign(2 * 16, 0);
  f.cell_valid.assign(16, 1);
  // Day 0: single fire in the top-left 2x2 block; day 1: none.
  f.fire[fine.cell(1, 0)] = 1;

  const FireObservationGrid pooled = pool_fire(f, coarse);
  CHECK(pooled.fire[coarse.cell(0, 0)] == 1);
  CHECK(pooled.fire[coarse.cell(0, 1)] == 0);
  CHECK(pooled.fire[coarse.cell(1, 0)] == 0);
  CHECK(pooled.fire[coarse.cell(1, 1)] == 0);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(pooled.fire[4 + i] == 0); // day 1 all clear
    CHECK(pooled.cell_valid[i] == 1);
  }

  // Pooling an already-coarse grid onto itself is the identity.
  const FireObservationGrid again = pool_fire(pooled, coarse);
  CHECK(again.fire == pooled.fire);

  // A target far away from every fine cell is flagged invalid.
  const GridDefinition far = GridDefinition::regular(1, 1, 40.0, 40.0, 2.0);
  const FireObservationGrid missing = pool_fire(f, far);
  CHECK(missing.cell_valid[0] == 0);
}

TEST_CASE("fuzzy matching: neighbor credit and radius-0 equivalence") {
  const GridDefinition grid = GridDefinition::regular(3, 3, 0.0, 0.0, 1.0);
  std::vector<std::uint8_t> pred(9, 0), obs(9, 0);

  // Prediction at center, observation one cell east: hit at radius 1.
  pred[grid.cell(1, 1)] = 1;
  obs[grid.cell(1, 2)] = 1;
  const ConfusionCounts c1 = fuzzy_match(pred, obs, grid, 1);
  CHECK(c1.hits == 1.0);
  CHECK(c1.false_alarms == 0.0);
  CHECK(c1.misses == 1.0); // the observed-fire cell itself was not predicted

  // Same layout at radius 0 is plain contingency: a false alarm.
  const ConfusionCounts c0 = fuzzy_match(pred, obs, grid, 0);
  CHECK(c0.false_alarms == 1.0);
  CHECK(c0.hits == 0.0);

  // Isolated prediction beyond the radius stays a false alarm; widening
  // the radius converts it into a hit (the unpredicted observed cell is
  // still a miss).
  pred.assign(9, 0);
  obs.assign(9, 0);
  pred[grid.cell(2, 2)] = 1;
  obs[grid.cell(0, 0)] = 1;
  const ConfusionCounts c2 = fuzzy_match(pred, obs, grid, 1);
  CHECK(c2.false_alarms == 1.0);
  const ConfusionCounts c3 = fuzzy_match(pred, obs, grid, 2);
  CHECK(c3.false_alarms == 0.0);
  CHECK(c3.hits == 1.0);
  CHECK(c3.misses == 1.0);
}

TEST_CASE("fuzzy radius 0 equals hard counting on random fixtures") {
  const GridDefinition grid = GridDefinition::regular(6, 6, 0.0, 0.0, 1.0);
  Rng rng(4242, "fuzzy");
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> pred(36), obs(36);
    std::vector<double> index(36);
    for (int i = 0; i < 36; ++i) {
      index[i] = rng.uniform(0.0, 10.0);
      pred[i] = index[i] > 5.0 ? 1 : 0;
      obs[i] = rng.bernoulli(0.2) ? 1 : 0;
    }
    const ConfusionCounts a = fuzzy_match(pred, obs, grid, 0);
    const ConfusionCounts b = hard_counts(index, obs, 5.0);
    CHECK(a.hits == b.hits);
    CHECK(a.misses == b.misses);
    CHECK(a.false_alarms == b.false_alarms);
    CHECK(a.correct_negatives == b.correct_negatives);
    // Every cell-day lands in exactly one cell of the table.
    CHECK(a.hits + a.misses + a.false_alarms + a.correct_negatives == 36.0);
  }
}

TEST_CASE("quantile threshold: order statistics with linear interpolation") {
  const std::vector<double> odd{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(quantile_threshold(odd, 0.5) == doctest::Approx(3.0));
  const std::vector<double> even{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_threshold(even, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_threshold(even, 0.001) == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(quantile_threshold(even, 0.999) == doctest::Approx(4.0).epsilon(1e-2));

  const std::vector<double> empty;
  CHECK_THROWS_AS(quantile_threshold(empty, 0.5), DomainError);
  CHECK_THROWS_AS(quantile_threshold(odd, 0.0), DomainError);
  CHECK_THROWS_AS(quantile_threshold(odd, 1.0), DomainError);
}

TEST_CASE("quantile threshold: monotone in q, affine-equivariant") {
  Rng rng(9001, "quantile");
  std::vector<double> xs;
  for (int i = 0; i < 101; ++i) xs.push_back(rng.uniform(-5.0, 20.0));
  double prev = -1e300;
  for (double q = 0.05; q < 1.0; q += 0.05) {
    const double t = quantile_threshold(xs, q);
    CHECK(t >= prev);
    prev = t;
  }
  const double a = 2.5, b = -7.0;
  std::vector<double> ys;
  for (const double x : xs) ys.push_back(a * x + b);
  for (double q = 0.1; q < 1.0; q += 0.2) {
    CHECK(quantile_threshold(ys, q) ==
          doctest::Approx(a * quantile_threshold(xs, q) + b).epsilon(1e-12));
  }
}

TEST_CASE("synthetic generation is deterministic and writes identical bytes") {
  const GridDefinition grid = GridDefinition::regular(6, 6, 38.0, -120.0, 0.25);
  const SyntheticResult a =
      generate_synthetic(grid, 120, 7, Scenario::ParameterShift);
  const SyntheticResult b =
      generate_synthetic(grid, 120, 7, Scenario::ParameterShift);
  CHECK(a.fire_base_rate == b.fire_base_rate);
  CHECK(a.data.fire.fire == b.data.fire.fire);
  for (std::size_t v = 0; v < a.data.stack.variables.size(); ++v)
    CHECK(a.data.stack.variables[v].data == b.data.stack.variables[v].data);

  const SyntheticResult c =
      generate_synthetic(grid, 120, 8, Scenario::ParameterShift);
  CHECK(a.data.fire.fire != c.data.fire.fire);
}

TEST_CASE("synthetic parameter-shift fires are rare but present") {
  const GridDefinition grid = GridDefinition::regular(8, 8, 38.0, -120.0, 0.25);
  const SyntheticResult r =
      generate_synthetic(grid, 365, 3, Scenario::ParameterShift);
  CHECK(r.fire_base_rate >= 0.001);
  CHECK(r.fire_base_rate <= 0.05);
  CHECK(r.shifted_parameter == "qign.c1");
  CHECK(r.shifted_value > r.default_value);
  // Every generated cell-day assembles into valid inputs.
  Rng rng(5, "probe");
  for (int i = 0; i < 200; ++i) {
    const int day = static_cast<int>(rng.below(365));
    const int row = static_cast<int>(rng.below(8));
    const int col = static_cast<int>(rng.below(8));
    const CellDay cd = cell_inputs(r.data, day, row, col);
    CHECK(cd.valid);
  }
}

TEST_CASE("synthetic scenarios parse and reject unknown names") {
  CHECK(scenario_from_string("parameter-shift") == Scenario::ParameterShift);
  CHECK(scenario_from_string("seasonal") == Scenario::Seasonal);
  CHECK(scenario_from_string("random") == Scenario::Random);
  CHECK_THROWS_AS(scenario_from_string("bogus"), DomainError);
}

TEST_CASE("dataset manifest: binary round trip preserves every byte of data") {
  const GridDefinition grid = GridDefinition::regular(4, 5, 40.0, 7.0, 0.25);
  const SyntheticResult r = generate_synthetic(grid, 40, 11, Scenario::Random);
  const auto dir = temp_dir("pyric_ds_bin");
  save_dataset(r.data, dir / "manifest.json");
  const Dataset back = load_dataset(dir / "manifest.json");
  CHECK(back.stack.grid == r.data.stack.grid);
  CHECK(back.stack.time == r.data.stack.time);
  REQUIRE(back.stack.variables.size() == r.data.stack.variables.size());
  for (std::size_t v = 0; v < back.stack.variables.size(); ++v) {
    CHECK(back.stack.variables[v].name == r.data.stack.variables[v].name);
    CHECK(back.stack.variables[v].data == r.data.stack.variables[v].data);
  }
  CHECK(back.fire.fire == r.data.fire.fire);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset manifest: CSV fixtures load like binary layers") {
  const GridDefinition grid = GridDefinition::regular(3, 3, 40.0, 7.0, 0.25);
  const SyntheticResult r = generate_synthetic(grid, 10, 2, Scenario::Random);
  const auto dir = temp_dir("pyric_ds_csv");
  save_dataset(r.data, dir / "manifest.json", LayerFormat::Csv);
  const Dataset back = load_dataset(dir / "manifest.json");
  for (std::size_t v = 0; v < back.stack.variables.size(); ++v) {
    const auto& a = back.stack.variables[v].data;
    const auto& b = r.data.stack.variables[v].data;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
  }
  CHECK(back.fire.fire == r.data.fire.fire);
  std::filesystem::remove_all(dir);
}

TEST_CASE("missing values surface as invalid cell-days, never numbers") {
  const GridDefinition grid = GridDefinition::regular(2, 2, 0.0, 0.0, 1.0);
  SyntheticResult r = generate_synthetic(grid, 5, 1, Scenario::Random);
  // Punch a NaN into one temperature cell-day.
  Variable* temp = nullptr;
  for (auto& v : r.data.stack.variables)
    if (v.name == "temp") temp = &v;
  REQUIRE(temp != nullptr);
  temp->data[2 * 4 + grid.cell(1, 0)] =
      std::numeric_limits<float>::quiet_NaN();
  CHECK(!cell_inputs(r.data, 2, 1, 0).valid);
  CHECK(cell_inputs(r.data, 2, 0, 0).valid);
  CHECK(cell_inputs(r.data, 1, 1, 0).valid);
}

TEST_CASE("malformed manifests are rejected with I/O errors") {
  const auto dir = temp_dir("pyric_bad_manifest");
  std::ofstream(dir / "manifest.json") << "{\"format\": \"wrong\"}";
  CHECK_THROWS_AS(load_dataset(dir / "manifest.json"), IoError);
  CHECK_THROWS_AS(load_dataset(dir / "missing.json"), IoError);
  std::filesystem::remove_all(dir);
}
