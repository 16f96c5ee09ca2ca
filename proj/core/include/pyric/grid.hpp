// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pyric/errors.hpp"
#include "pyric/inputs.hpp"
#include "pyric/loss.hpp"

namespace pyric {

// ---------------------------------------------------------------------------
// Dates

struct Date {
  std::chrono::sys_days day{};

  static Date from_iso(const std::string& text); // "YYYY-MM-DD"
  static Date ymd(int year, unsigned month, unsigned dom);
  std::string to_iso() const;
  int year() const;
  Date plus_days(int n) const { return Date{day + std::chrono::days{n}}; }
  auto operator<=>(const Date&) const = default;
};

/// b - a in days.
int days_between(Date a, Date b);

struct DateRange {
  Date start;
  Date end; // inclusive
  int n_days() const { return days_between(start, end) + 1; }
  bool overlaps(const DateRange& other) const {
    return !(end < other.start || other.end < start);
  }
};

struct TimeAxis {
  Date start{};
  int n_days = 0;

  Date date(int i) const { return start.plus_days(i); }
  /// Index of d, or -1 when outside the axis.
  int index(Date d) const;
  bool operator==(const TimeAxis&) const = default;
};

// ---------------------------------------------------------------------------
// Grids and layers

struct GridDefinition {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<double> lat; // cell-center latitudes, one per row
  std::vector<double> lon; // cell-center longitudes, one per column
  double resolution_deg = 0.0;

  static GridDefinition regular(int rows, int cols, double lat0, double lon0,
                                double resolution);
  void validate() const;
  std::size_t n_cells() const {
    return static_cast<std::size_t>(n_rows) * n_cols;
  }
  std::size_t cell(int row, int col) const {
    return static_cast<std::size_t>(row) * n_cols + col;
  }
  bool operator==(const GridDefinition&) const = default;
};

enum class VarKind : std::uint8_t { Continuous, Categorical };
enum class Temporal : std::uint8_t { Daily, Static };

/// One named layer. Daily layers hold n_days * n_cells values in
/// (time, row, col) order; static layers hold n_cells. Missing values are
/// NaN and are masked out of training and scoring, never imputed.
struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  Temporal temporal = Temporal::Daily;
  std::string units;
  std::vector<float> data;
};

struct RasterStack {
  GridDefinition grid;
  TimeAxis time;
  std::vector<Variable> variables;

  const Variable* find(std::string_view name) const;
  const Variable& at(std::string_view name) const;
  /// Value of a variable at (day, row, col); static layers ignore day.
  double value(const Variable& v, int day, int row, int col) const;
  void validate() const;
};

struct FireObservationGrid {
  GridDefinition grid;
  TimeAxis time;
  std::vector<std::uint8_t> fire;       // n_days * n_cells, values 0/1
  std::vector<std::uint8_t> cell_valid; // n_cells; 0 = no data, excluded

  std::uint8_t at(int day, int row, int col) const {
    return fire[static_cast<std::size_t>(day) * grid.n_cells() +
                grid.cell(row, col)];
  }
  void validate() const;
};

struct Dataset {
  RasterStack stack;
  FireObservationGrid fire;
};

/// A cell-day assembled into model inputs. `valid` is false when any
/// required layer is missing (NaN) for this cell-day.
struct CellDay {
  CellInputs inputs;
  bool valid = false;
};

CellDay cell_inputs(const Dataset& data, int day, int row, int col);

// ---------------------------------------------------------------------------
// Manifest + layer I/O
//
// The manifest is JSON; each variable references a flat binary file of
// 32-bit little-endian IEEE floats in (time, row, col) order, or a CSV
// file ("day,row,col,value" / "row,col,value") for small fixtures.

enum class LayerFormat : std::uint8_t { Binary, Csv };

Dataset load_dataset(const std::filesystem::path& manifest_path);
void save_dataset(const Dataset& data,
                  const std::filesystem::path& manifest_path,
                  LayerFormat format = LayerFormat::Binary);

// ---------------------------------------------------------------------------
// Resampling and pooling

/// A single 2-D field with its grid, the unit of spatial resampling.
struct Layer2D {
  GridDefinition grid;
  std::vector<double> values; // n_cells, NaN = missing
};

/// Bilinear interpolation on cell centers; target cells outside the
/// source hull clamp to the nearest source cell. Requires >= 2x2 source.
Layer2D resample_continuous(const Layer2D& source,
                            const GridDefinition& target);

/// Nearest-neighbor class transfer; ties broken toward the smaller
/// (row, col) source index.
Layer2D resample_categorical(const Layer2D& source,
                             const GridDefinition& target);

/// Binary-event pooling: a target cell records a fire on a day when any
/// contained fine cell does. Fine cells are assigned by center
/// containment; target cells receiving no fine cell are flagged invalid.
FireObservationGrid pool_fire(const FireObservationGrid& fine,
                              const GridDefinition& target);

// ---------------------------------------------------------------------------
// Scoring helpers

enum class Outcome : std::uint8_t { Hit, Miss, FalseAlarm, CorrectNegative };

/// Per-cell contingency outcome for one day with fuzzy-pixel credit: a
/// predicted fire with no local observation still counts as a hit when
/// any observed fire lies within the Chebyshev `radius` neighborhood.
/// radius 0 reduces to plain contingency classification.
std::vector<Outcome> fuzzy_classify(std::span<const std::uint8_t> predictions,
                                    std::span<const std::uint8_t> observations,
                                    const GridDefinition& grid, int radius);

/// Pooled counts of fuzzy_classify over one grid-day.
ConfusionCounts fuzzy_match(std::span<const std::uint8_t> predictions,
                            std::span<const std::uint8_t> observations,
                            const GridDefinition& grid, int radius);

/// Empirical quantile with linear interpolation between order statistics;
/// q in (0, 1). Throws DomainError on an empty series.
double quantile_threshold(std::span<const double> values, double q);

/// Index windows [begin, end) into a time axis for disjoint train/test
/// date ranges. Throws MismatchError on overlap or out-of-axis ranges.
struct SplitView {
  int day_begin = 0;
  int day_end = 0; // exclusive
  int n_days() const { return day_end - day_begin; }
};

std::pair<SplitView, SplitView> temporal_split(const TimeAxis& axis,
                                               const DateRange& train,
                                               const DateRange& test);

} // namespace pyric
