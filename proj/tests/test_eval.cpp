// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pyric/eval.hpp"
#include "pyric/ic_model.hpp"
#include "pyric/synthetic.hpp"
#include "pyric/trainer.hpp"

using namespace pyric;

namespace {

struct Fixture {
  Dataset data;
  SplitView train_window;
  SplitView test_window;
  double threshold = 0.0;
};

// Synthetic region with a training-period threshold, test period split.
Fixture make_fixture() {
  Fixture f;
  f.data = generate_synthetic(GridDefinition::regular(5, 5, 38.0, -120.0, 0.25),
                              300, 17, Scenario::ParameterShift)
               .data;
  f.train_window = {0, 200};
  f.test_window = {200, 300};
  const IndexSeries train =
      hard_ic_series(f.data, f.train_window, ParameterSet::defaults(), 2);
  f.threshold = quantile_threshold(train.ic, 0.5);
  return f;
}

std::filesystem::path temp_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("evaluation is deterministic, including across thread counts") {
  const Fixture f = make_fixture();
  const ParameterSet params = ParameterSet::defaults();
  const SkillReport a =
      evaluate_region(f.data, f.test_window, params, f.threshold, 1, 1);
  const SkillReport b =
      evaluate_region(f.data, f.test_window, params, f.threshold, 1, 4);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].hits == b.cells[i].hits);
    CHECK(a.cells[i].edi == b.cells[i].edi);
    CHECK(a.cells[i].degenerate == b.cells[i].degenerate);
  }
  CHECK(a.aggregate.value == b.aggregate.value);
}

TEST_CASE("aggregate EDI equals EDI of the summed per-cell counts") {
  const Fixture f = make_fixture();
  const SkillReport r = evaluate_region(f.data, f.test_window,
                                        ParameterSet::defaults(), f.threshold,
                                        1, 2);
  ConfusionCounts total;
  int days_per_cell = f.test_window.n_days();
  for (const CellSkill& c : r.cells) {
    if (!c.valid) continue;
    total += ConfusionCounts{c.hits, c.misses, c.false_alarms,
                             c.correct_negatives, false};
    // Per-cell counts account for every evaluated day.
    CHECK(c.hits + c.misses + c.false_alarms + c.correct_negatives ==
          doctest::Approx(days_per_cell));
  }
  CHECK(r.aggregate.value == doctest::Approx(edi(total).value).epsilon(1e-12));
}

TEST_CASE("a forecast equal to the observations scores EDI 1 everywhere") {
  Fixture f = make_fixture();
  // Rewrite the fire record so that fire == (hard IC > threshold).
  const ParameterSet params = ParameterSet::defaults();
  IcModel model(params);
  const GridDefinition& grid = f.data.stack.grid;
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      std::vector<CellInputs> series;
      for (int d = f.test_window.day_begin; d < f.test_window.day_end; ++d)
        series.push_back(cell_inputs(f.data, d, r, c).inputs);
      MoistureCarry carry = model.spin_up(
          std::span<const CellInputs>(series).subspan(
              0, std::min<std::size_t>(30, series.size())));
      for (int i = 0; i < f.test_window.n_days(); ++i) {
        const ForwardResult out = model.forward(series[i], carry, Mode::Hard);
        carry = out.new_carry;
        const std::size_t idx =
            static_cast<std::size_t>(f.test_window.day_begin + i) *
                grid.n_cells() +
            grid.cell(r, c);
        f.data.fire.fire[idx] = out.state.ic > f.threshold ? 1 : 0;
      }
    }
  }
  const SkillReport report =
      evaluate_region(f.data, f.test_window, params, f.threshold, 0, 2);
  int scored = 0;
  for (const CellSkill& c : report.cells) {
    if (!c.valid || c.degenerate) continue;
    ++scored;
    CHECK(c.misses == 0.0);
    CHECK(c.false_alarms == 0.0);
    CHECK(c.edi == doctest::Approx(1.0).epsilon(1e-4));
  }
  CHECK(scored > 0);
}

TEST_CASE("cells without observed fires are flagged, not scored") {
  Fixture f = make_fixture();
  // Clear all fires in the test window for cell (0, 0).
  const GridDefinition& grid = f.data.stack.grid;
  for (int d = f.test_window.day_begin; d < f.test_window.day_end; ++d)
    f.data.fire.fire[static_cast<std::size_t>(d) * grid.n_cells() +
                     grid.cell(0, 0)] = 0;
  const SkillReport r = evaluate_region(f.data, f.test_window,
                                        ParameterSet::defaults(), f.threshold,
                                        1, 2);
  const CellSkill& c = r.cells[grid.cell(0, 0)];
  CHECK(c.valid);
  CHECK(c.degenerate);
  CHECK(c.fire_days == 0);
  CHECK(r.cells_degenerate >= 1);
  CHECK(r.cells_scored + r.cells_degenerate == 25);
}

TEST_CASE("threshold provenance: test-period data cannot move it") {
  Fixture f = make_fixture();
  const ParameterSet params = ParameterSet::defaults();
  const IndexSeries before =
      hard_ic_series(f.data, f.train_window, params, 2);
  const double thr_before = quantile_threshold(before.ic, 0.5);

  // Perturb the test-window weather wildly.
  for (auto& v : f.data.stack.variables) {
    if (v.name != "temp") continue;
    const std::size_t cells = f.data.stack.grid.n_cells();
    for (int d = f.test_window.day_begin; d < f.test_window.day_end; ++d)
      for (std::size_t i = 0; i < cells; ++i)
        v.data[static_cast<std::size_t>(d) * cells + i] += 11.5f;
  }
  const IndexSeries after = hard_ic_series(f.data, f.train_window, params, 2);
  const double thr_after = quantile_threshold(after.ic, 0.5);
  CHECK(thr_before == thr_after);
}

TEST_CASE("diff reports are antisymmetric and flag degenerate cells") {
  const Fixture f = make_fixture();
  ParameterSet other = ParameterSet::defaults();
  other.set_value("qign.c1", 0.35);
  const SkillReport a = evaluate_region(f.data, f.test_window,
                                        ParameterSet::defaults(), f.threshold,
                                        1, 2);
  const SkillReport b =
      evaluate_region(f.data, f.test_window, other, f.threshold, 1, 2);

  const DiffReport ab = diff_report(a, b);
  const DiffReport ba = diff_report(b, a);
  REQUIRE(ab.cells.size() == ba.cells.size());
  for (std::size_t i = 0; i < ab.cells.size(); ++i) {
    CHECK(ab.cells[i].flagged == ba.cells[i].flagged);
    if (!ab.cells[i].flagged)
      CHECK(ab.cells[i].delta == doctest::Approx(-ba.cells[i].delta));
  }
  CHECK(ab.aggregate_delta == doctest::Approx(-ba.aggregate_delta));

  // Self-diff is a zero map.
  const DiffReport self = diff_report(a, a);
  for (const DiffCell& c : self.cells)
    if (!c.flagged) CHECK(c.delta == 0.0);

  // Mismatched grids are rejected.
  SkillReport mangled = b;
  mangled.grid = GridDefinition::regular(3, 3, 0.0, 0.0, 1.0);
  CHECK_THROWS_AS(diff_report(a, mangled), MismatchError);
}

TEST_CASE("report rendering: CSV round-trips, PNG bytes are reproducible") {
  const Fixture f = make_fixture();
  const SkillReport r = evaluate_region(f.data, f.test_window,
                                        ParameterSet::defaults(), f.threshold,
                                        1, 2);
  const auto dir = temp_dir("pyric_render");
  render_report(r, dir);
  REQUIRE(std::filesystem::exists(dir / "report.csv"));
  REQUIRE(std::filesystem::exists(dir / "summary.json"));
  REQUIRE(std::filesystem::exists(dir / "map.png"));

  // One CSV data row per cell; EDI values round-trip.
  std::ifstream csv(dir / "report.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header ==
        "row,col,lat,lon,fire_days,hits,misses,false_alarms,"
        "correct_negatives,hit_rate,false_alarm_rate,edi,degenerate");
  int rows = 0;
  std::string line;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    int row, col, fire_days, degenerate;
    double lat, lon, hits, misses, fas, cns, h, fr, ediv;
    REQUIRE((is >> row >> col >> lat >> lon >> fire_days >> hits >> misses >>
             fas >> cns >> h >> fr >> ediv >> degenerate));
    const CellSkill& c = r.cells[r.grid.cell(row, col)];
    CHECK(std::fabs(ediv - c.edi) <= 1e-9);
    CHECK(std::fabs(hits - c.hits) <= 1e-9);
    ++rows;
  }
  CHECK(rows == 25);

  // Rendering twice produces identical bytes.
  const auto dir2 = temp_dir("pyric_render2");
  render_report(r, dir2);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  CHECK(slurp(dir / "map.png") == slurp(dir2 / "map.png"));
  CHECK(slurp(dir / "report.csv") == slurp(dir2 / "report.csv"));

  // Difference artifacts render too.
  const DiffReport d = diff_report(r, r);
  render_diff(d, dir2);
  CHECK(std::filesystem::exists(dir2 / "map.png"));
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}
