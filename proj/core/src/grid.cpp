// SPDX-License-Identifier: Apache-2.0
#include "pyric/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pyric {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Dates

Date Date::from_iso(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char dash1 = 0, dash2 = 0;
  std::istringstream is(text);
  is >> y >> dash1 >> m >> dash2 >> d;
  if (!is || dash1 != '-' || dash2 != '-')
    throw IoError("date: cannot parse '" + text + "' (expected YYYY-MM-DD)");
  return ymd(y, m, d);
}

Date Date::ymd(int year, unsigned month, unsigned dom) {
  const std::chrono::year_month_day date{std::chrono::year{year},
                                         std::chrono::month{month},
                                         std::chrono::day{dom}};
  if (!date.ok())
    throw IoError("date: invalid calendar date " + std::to_string(year) + "-" +
                  std::to_string(month) + "-" + std::to_string(dom));
  return Date{std::chrono::sys_days{date}};
}

std::string Date::to_iso() const {
  const std::chrono::year_month_day date{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(date.year()),
                unsigned(date.month()), unsigned(date.day()));
  return buf;
}

int Date::year() const {
  return int(std::chrono::year_month_day{day}.year());
}

int days_between(Date a, Date b) {
  return static_cast<int>((b.day - a.day).count());
}

int TimeAxis::index(Date d) const {
  const int i = days_between(start, d);
  return (i >= 0 && i < n_days) ? i : -1;
}

// ---------------------------------------------------------------------------
// Grid

GridDefinition GridDefinition::regular(int rows, int cols, double lat0,
                                       double lon0, double resolution) {
  GridDefinition g;
  g.n_rows = rows;
  g.n_cols = cols;
  g.resolution_deg = resolution;
  g.lat.resize(rows);
  g.lon.resize(cols);
  for (int r = 0; r < rows; ++r) g.lat[r] = lat0 + r * resolution;
  for (int c = 0; c < cols; ++c) g.lon[c] = lon0 + c * resolution;
  g.validate();
  return g;
}

void GridDefinition::validate() const {
  if (n_rows <= 0 || n_cols <= 0)
    throw DomainError("grid: dimensions must be positive");
  if (static_cast<int>(lat.size()) != n_rows ||
      static_cast<int>(lon.size()) != n_cols)
    throw DomainError("grid: coordinate arrays do not match dimensions");
  if (!(resolution_deg > 0.0))
    throw DomainError("grid: resolution must be positive");
  for (int r = 1; r < n_rows; ++r)
    if (!(lat[r] > lat[r - 1]))
      throw DomainError("grid: latitudes must be strictly increasing");
  for (int c = 1; c < n_cols; ++c)
    if (!(lon[c] > lon[c - 1]))
      throw DomainError("grid: longitudes must be strictly increasing");
}

// ---------------------------------------------------------------------------
// RasterStack

const Variable* RasterStack::find(std::string_view name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

const Variable& RasterStack::at(std::string_view name) const {
  const Variable* v = find(name);
  if (!v)
    throw DomainError("raster stack: missing variable '" + std::string(name) +
                      "'");
  return *v;
}

double RasterStack::value(const Variable& v, int day, int row, int col) const {
  const std::size_t cell = grid.cell(row, col);
  if (v.temporal == Temporal::Static) return v.data[cell];
  return v.data[static_cast<std::size_t>(day) * grid.n_cells() + cell];
}

void RasterStack::validate() const {
  grid.validate();
  if (time.n_days <= 0) throw DomainError("raster stack: empty time axis");
  for (const auto& v : variables) {
    const std::size_t expect = v.temporal == Temporal::Static
                                   ? grid.n_cells()
                                   : grid.n_cells() * time.n_days;
    if (v.data.size() != expect)
      throw DomainError("raster stack: variable '" + v.name +
                        "' has wrong length");
  }
}

void FireObservationGrid::validate() const {
  grid.validate();
  if (fire.size() != grid.n_cells() * static_cast<std::size_t>(time.n_days))
    throw DomainError("fire grid: wrong length");
  if (cell_valid.size() != grid.n_cells())
    throw DomainError("fire grid: validity mask has wrong length");
  for (const auto v : fire)
    if (v > 1) throw DomainError("fire grid: values must be 0 or 1");
}

// ---------------------------------------------------------------------------
// Cell-day assembly

namespace {

int class_code(double v, const char* field) {
  if (std::isnan(v)) return -1;
  const double r = std::round(v);
  if (std::fabs(v - r) > 1e-6)
    throw DomainError(std::string("dataset: non-integer class code in '") +
                      field + "'");
  return static_cast<int>(r);
}

} // namespace

CellDay cell_inputs(const Dataset& data, int day, int row, int col) {
  const RasterStack& s = data.stack;
  auto get = [&](const char* name) {
    return s.value(s.at(name), day, row, col);
  };

  CellDay out;
  const double temp = get("temp");
  const double temp_max = get("temp_max");
  const double temp_min = get("temp_min");
  const double rh = get("rh");
  const double rh_max = get("rh_max");
  const double rh_min = get("rh_min");
  const double wind = get("wind_speed");
  const double cloud = get("cloud_cover");
  const double pdur = get("precip_duration");
  const double aprecip = get("annual_precip_mean");
  const double stage = get("vegetation_stage");
  const double cover = get("vegetation_cover");
  const double slope = get("slope_class");
  const double fuel = get("fuel_model");
  const double zone = get("climate_zone");

  for (double v : {temp, temp_max, temp_min, rh, rh_max, rh_min, wind, cloud,
                   pdur, aprecip, stage, cover, slope, fuel, zone}) {
    if (std::isnan(v)) {
      out.valid = false;
      return out;
    }
  }

  CellInputs& in = out.inputs;
  in.temp = temp;
  in.temp_max = temp_max;
  in.temp_min = temp_min;
  in.rh = rh;
  in.rh_max = rh_max;
  in.rh_min = rh_min;
  in.wind_speed = wind;
  in.cloud_cover = cloud;
  in.precip_duration = pdur;
  in.annual_precip_mean = aprecip;
  in.vegetation_stage =
      vegetation_stage_from_code(class_code(stage, "vegetation_stage"));
  in.vegetation_cover = class_code(cover, "vegetation_cover");
  in.slope_class = class_code(slope, "slope_class");
  in.fuel_model = fuel_model_from_code(class_code(fuel, "fuel_model"));
  in.climate_zone = class_code(zone, "climate_zone");
  in.validate();
  out.valid = true;
  return out;
}

// ---------------------------------------------------------------------------
// Layer file I/O

namespace {

void require_little_endian() {
  if constexpr (std::endian::native != std::endian::little) {
    throw IoError("dataset: only little-endian hosts are supported");
  }
}

void write_binary_layer(const std::filesystem::path& path,
                        std::span<const float> data) {
  require_little_endian();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("dataset: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!out) throw IoError("dataset: write failed for " + path.string());
}

std::vector<float> read_binary_layer(const std::filesystem::path& path,
                                     std::size_t expect) {
  require_little_endian();
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("dataset: cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != expect * sizeof(float))
    throw IoError("dataset: " + path.string() + " has " +
                  std::to_string(bytes) + " bytes, expected " +
                  std::to_string(expect * sizeof(float)));
  std::vector<float> data(expect);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("dataset: read failed for " + path.string());
  return data;
}

void write_csv_layer(const std::filesystem::path& path,
                     std::span<const float> data, Temporal temporal,
                     const GridDefinition& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("dataset: cannot write " + path.string());
  const std::size_t cells = grid.n_cells();
  if (temporal == Temporal::Static) {
    out << "row,col,value\n";
    for (int r = 0; r < grid.n_rows; ++r)
      for (int c = 0; c < grid.n_cols; ++c) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%d,%d,%.9g\n", r, c,
                      data[grid.cell(r, c)]);
        out << buf;
      }
  } else {
    out << "day,row,col,value\n";
    const std::size_t days = data.size() / cells;
    for (std::size_t d = 0; d < days; ++d)
      for (int r = 0; r < grid.n_rows; ++r)
        for (int c = 0; c < grid.n_cols; ++c) {
          char buf[80];
          std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.9g\n", d, r, c,
                        data[d * cells + grid.cell(r, c)]);
          out << buf;
        }
  }
  if (!out) throw IoError("dataset: write failed for " + path.string());
}

std::vector<float> read_csv_layer(const std::filesystem::path& path,
                                  std::size_t expect, Temporal temporal,
                                  const GridDefinition& grid) {
  std::ifstream in(path);
  if (!in) throw IoError("dataset: cannot open " + path.string());
  std::vector<float> data(expect,
                          std::numeric_limits<float>::quiet_NaN());
  std::string line;
  std::getline(in, line); // header
  const std::size_t cells = grid.n_cells();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    long day = 0, row = 0, col = 0;
    double value = 0.0;
    if (temporal == Temporal::Static) {
      if (!(is >> row >> col >> value))
        throw IoError("dataset: bad CSV row in " + path.string());
    } else {
      if (!(is >> day >> row >> col >> value))
        throw IoError("dataset: bad CSV row in " + path.string());
    }
    if (row < 0 || row >= grid.n_rows || col < 0 || col >= grid.n_cols)
      throw IoError("dataset: CSV cell out of range in " + path.string());
    const std::size_t idx =
        static_cast<std::size_t>(day) * cells + grid.cell(row, col);
    if (idx >= expect)
      throw IoError("dataset: CSV day out of range in " + path.string());
    data[idx] = static_cast<float>(value);
  }
  return data;
}

bool is_csv(const std::filesystem::path& p) { return p.extension() == ".csv"; }

ordered_json grid_to_json(const GridDefinition& g) {
  ordered_json j;
  j["rows"] = g.n_rows;
  j["cols"] = g.n_cols;
  j["lat"] = g.lat;
  j["lon"] = g.lon;
  j["resolution_deg"] = g.resolution_deg;
  return j;
}

GridDefinition grid_from_json(const ordered_json& j) {
  GridDefinition g;
  g.n_rows = j.at("rows").get<int>();
  g.n_cols = j.at("cols").get<int>();
  g.lat = j.at("lat").get<std::vector<double>>();
  g.lon = j.at("lon").get<std::vector<double>>();
  g.resolution_deg = j.at("resolution_deg").get<double>();
  g.validate();
  return g;
}

} // namespace

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in)
    throw IoError("dataset: cannot open manifest " + manifest_path.string());
  ordered_json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    throw IoError(std::string("dataset: manifest parse failed: ") + e.what());
  }
  if (root.value("format", "") != "pyric-dataset-manifest-v1")
    throw IoError("dataset: missing or unknown manifest format marker");
  if (root.value("byte_order", "little") != "little")
    throw IoError("dataset: only little-endian layer files are supported");

  const auto dir = manifest_path.parent_path();
  Dataset data;
  data.stack.grid = grid_from_json(root.at("grid"));
  data.stack.time.start = Date::from_iso(root.at("time").at("start"));
  data.stack.time.n_days = root.at("time").at("days").get<int>();
  if (data.stack.time.n_days <= 0)
    throw IoError("dataset: time axis must have at least one day");

  const std::size_t cells = data.stack.grid.n_cells();
  for (const auto& vj : root.at("variables")) {
    Variable v;
    v.name = vj.at("name").get<std::string>();
    const std::string kind = vj.at("kind").get<std::string>();
    if (kind == "continuous")
      v.kind = VarKind::Continuous;
    else if (kind == "categorical")
      v.kind = VarKind::Categorical;
    else
      throw IoError("dataset: unknown kind '" + kind + "'");
    const std::string temporal = vj.at("temporal").get<std::string>();
    if (temporal == "daily")
      v.temporal = Temporal::Daily;
    else if (temporal == "static")
      v.temporal = Temporal::Static;
    else
      throw IoError("dataset: unknown temporal '" + temporal + "'");
    v.units = vj.value("units", "");
    const std::filesystem::path file = dir / vj.at("file").get<std::string>();
    const std::size_t expect =
        v.temporal == Temporal::Static
            ? cells
            : cells * static_cast<std::size_t>(data.stack.time.n_days);
    v.data = is_csv(file)
                 ? read_csv_layer(file, expect, v.temporal, data.stack.grid)
                 : read_binary_layer(file, expect);
    data.stack.variables.push_back(std::move(v));
  }
  data.stack.validate();

  const auto& fj = root.at("fire");
  const std::filesystem::path fire_file =
      dir / fj.at("file").get<std::string>();
  const std::size_t expect =
      cells * static_cast<std::size_t>(data.stack.time.n_days);
  const std::vector<float> raw =
      is_csv(fire_file)
          ? read_csv_layer(fire_file, expect, Temporal::Daily, data.stack.grid)
          : read_binary_layer(fire_file, expect);
  data.fire.grid = data.stack.grid;
  data.fire.time = data.stack.time;
  data.fire.fire.resize(expect);
  for (std::size_t i = 0; i < expect; ++i) {
    const float f = raw[i];
    if (f != 0.0f && f != 1.0f)
      throw IoError("dataset: fire layer must contain only 0/1");
    data.fire.fire[i] = f != 0.0f;
  }
  if (fj.contains("valid_file")) {
    const std::vector<float> mask = read_binary_layer(
        dir / fj.at("valid_file").get<std::string>(), cells);
    data.fire.cell_valid.resize(cells);
    for (std::size_t i = 0; i < cells; ++i)
      data.fire.cell_valid[i] = mask[i] != 0.0f;
  } else {
    data.fire.cell_valid.assign(cells, 1);
  }
  data.fire.validate();
  return data;
}

void save_dataset(const Dataset& data,
                  const std::filesystem::path& manifest_path,
                  LayerFormat format) {
  data.stack.validate();
  data.fire.validate();
  if (!(data.fire.grid == data.stack.grid) ||
      !(data.fire.time == data.stack.time))
    throw MismatchError("dataset: fire grid does not match the raster stack");

  const auto dir = manifest_path.parent_path();
  std::filesystem::create_directories(dir);
  const bool csv = format == LayerFormat::Csv;
  const char* ext = csv ? ".csv" : ".bin";

  auto write_layer = [&](const std::filesystem::path& path,
                         std::span<const float> values, Temporal temporal) {
    if (csv)
      write_csv_layer(path, values, temporal, data.stack.grid);
    else
      write_binary_layer(path, values);
  };

  ordered_json root;
  root["format"] = "pyric-dataset-manifest-v1";
  root["grid"] = grid_to_json(data.stack.grid);
  root["time"] = {{"start", data.stack.time.start.to_iso()},
                  {"days", data.stack.time.n_days}};
  root["byte_order"] = "little";
  ordered_json vars = ordered_json::array();
  for (const auto& v : data.stack.variables) {
    const std::string file = v.name + ext;
    ordered_json vj;
    vj["name"] = v.name;
    vj["kind"] = v.kind == VarKind::Continuous ? "continuous" : "categorical";
    vj["temporal"] = v.temporal == Temporal::Daily ? "daily" : "static";
    vj["units"] = v.units;
    vj["file"] = file;
    vars.push_back(std::move(vj));
    write_layer(dir / file, v.data, v.temporal);
  }
  root["variables"] = std::move(vars);

  std::vector<float> fire_raw(data.fire.fire.size());
  for (std::size_t i = 0; i < fire_raw.size(); ++i)
    fire_raw[i] = data.fire.fire[i] ? 1.0f : 0.0f;
  write_layer(dir / (std::string("fire") + ext), fire_raw, Temporal::Daily);
  ordered_json fj;
  fj["file"] = std::string("fire") + ext;
  std::vector<float> mask(data.fire.cell_valid.size());
  bool all_valid = true;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = data.fire.cell_valid[i] ? 1.0f : 0.0f;
    all_valid = all_valid && data.fire.cell_valid[i];
  }
  if (!all_valid) {
    write_binary_layer(dir / "fire_valid.bin", mask);
    fj["valid_file"] = "fire_valid.bin";
  }
  root["fire"] = std::move(fj);

  std::ofstream out(manifest_path, std::ios::binary);
  if (!out)
    throw IoError("dataset: cannot write manifest " + manifest_path.string());
  out << root.dump(2) << "\n";
  if (!out)
    throw IoError("dataset: manifest write failed " + manifest_path.string());
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

// Index of the source coordinate nearest to x; ties to the smaller index.
int nearest_index(const std::vector<double>& coords, double x) {
  const auto it = std::lower_bound(coords.begin(), coords.end(), x);
  if (it == coords.begin()) return 0;
  if (it == coords.end()) return static_cast<int>(coords.size()) - 1;
  const int hi = static_cast<int>(it - coords.begin());
  const int lo = hi - 1;
  const double d_lo = x - coords[lo];
  const double d_hi = coords[hi] - x;
  return d_lo <= d_hi ? lo : hi;
}

// Bracketing interval and interpolation weight, clamped to the hull.
struct Bracket {
  int lo;
  int hi;
  double w; // weight of hi
};

Bracket bracket(const std::vector<double>& coords, double x) {
  const int n = static_cast<int>(coords.size());
  if (x <= coords.front()) return {0, 0, 0.0};
  if (x >= coords.back()) return {n - 1, n - 1, 0.0};
  const auto it = std::upper_bound(coords.begin(), coords.end(), x);
  const int hi = static_cast<int>(it - coords.begin());
  const int lo = hi - 1;
  const double span = coords[hi] - coords[lo];
  return {lo, hi, (x - coords[lo]) / span};
}

} // namespace

Layer2D resample_continuous(const Layer2D& source,
                            const GridDefinition& target) {
  source.grid.validate();
  target.validate();
  if (source.grid.n_rows < 2 || source.grid.n_cols < 2)
    throw DomainError("resample: bilinear needs at least a 2x2 source grid");
  if (source.values.size() != source.grid.n_cells())
    throw DomainError("resample: source layer has wrong length");

  Layer2D out;
  out.grid = target;
  out.values.resize(target.n_cells());
  for (int r = 0; r < target.n_rows; ++r) {
    const Bracket br = bracket(source.grid.lat, target.lat[r]);
    for (int c = 0; c < target.n_cols; ++c) {
      const Bracket bc = bracket(source.grid.lon, target.lon[c]);
      const double v00 = source.values[source.grid.cell(br.lo, bc.lo)];
      const double v01 = source.values[source.grid.cell(br.lo, bc.hi)];
      const double v10 = source.values[source.grid.cell(br.hi, bc.lo)];
      const double v11 = source.values[source.grid.cell(br.hi, bc.hi)];
      const double top = v00 + (v01 - v00) * bc.w;
      const double bot = v10 + (v11 - v10) * bc.w;
      out.values[target.cell(r, c)] = top + (bot - top) * br.w;
    }
  }
  return out;
}

Layer2D resample_categorical(const Layer2D& source,
                             const GridDefinition& target) {
  source.grid.validate();
  target.validate();
  if (source.values.size() != source.grid.n_cells())
    throw DomainError("resample: source layer has wrong length");

  Layer2D out;
  out.grid = target;
  out.values.resize(target.n_cells());
  for (int r = 0; r < target.n_rows; ++r) {
    const int sr = nearest_index(source.grid.lat, target.lat[r]);
    for (int c = 0; c < target.n_cols; ++c) {
      const int sc = nearest_index(source.grid.lon, target.lon[c]);
      out.values[target.cell(r, c)] = source.values[source.grid.cell(sr, sc)];
    }
  }
  return out;
}

namespace {

// Cell ownership boundaries: midpoints between centers, with the outer
// edges extended by half the edge spacing.
std::vector<double> cell_edges(const std::vector<double>& centers) {
  const std::size_t n = centers.size();
  std::vector<double> edges(n + 1);
  if (n == 1) {
    edges[0] = centers[0] - 0.5;
    edges[1] = centers[0] + 0.5;
    return edges;
  }
  edges[0] = centers[0] - 0.5 * (centers[1] - centers[0]);
  for (std::size_t i = 1; i < n; ++i)
    edges[i] = 0.5 * (centers[i - 1] + centers[i]);
  edges[n] = centers[n - 1] + 0.5 * (centers[n - 1] - centers[n - 2]);
  return edges;
}

// Target cell owning coordinate x, or -1 when outside all cells.
int owning_cell(const std::vector<double>& edges, double x) {
  if (x < edges.front() || x >= edges.back()) return -1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return static_cast<int>(it - edges.begin()) - 1;
}

} // namespace

FireObservationGrid pool_fire(const FireObservationGrid& fine,
                              const GridDefinition& target) {
  fine.validate();
  target.validate();

  const std::vector<double> row_edges = cell_edges(target.lat);
  const std::vector<double> col_edges = cell_edges(target.lon);

  // Assignment of each fine cell to a target cell (or -1).
  std::vector<int> assign(fine.grid.n_cells(), -1);
  std::vector<std::uint8_t> covered(target.n_cells(), 0);
  for (int r = 0; r < fine.grid.n_rows; ++r) {
    const int tr = owning_cell(row_edges, fine.grid.lat[r]);
    for (int c = 0; c < fine.grid.n_cols; ++c) {
      const int tc = owning_cell(col_edges, fine.grid.lon[c]);
      if (tr >= 0 && tc >= 0) {
        const std::size_t t = target.cell(tr, tc);
        assign[fine.grid.cell(r, c)] = static_cast<int>(t);
        covered[t] = 1;
      }
    }
  }

  FireObservationGrid out;
  out.grid = target;
  out.time = fine.time;
  out.fire.assign(target.n_cells() * static_cast<std::size_t>(fine.time.n_days),
                  0);
  out.cell_valid = covered;
  const std::size_t fine_cells = fine.grid.n_cells();
  const std::size_t target_cells = target.n_cells();
  for (int d = 0; d < fine.time.n_days; ++d) {
    const std::size_t fbase = static_cast<std::size_t>(d) * fine_cells;
    const std::size_t tbase = static_cast<std::size_t>(d) * target_cells;
    for (std::size_t i = 0; i < fine_cells; ++i) {
      if (fine.fire[fbase + i] && assign[i] >= 0)
        out.fire[tbase + static_cast<std::size_t>(assign[i])] = 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fuzzy scoring

std::vector<Outcome> fuzzy_classify(std::span<const std::uint8_t> predictions,
                                    std::span<const std::uint8_t> observations,
                                    const GridDefinition& grid, int radius) {
  if (predictions.size() != grid.n_cells() ||
      observations.size() != grid.n_cells())
    throw MismatchError("fuzzy: layer sizes do not match the grid");
  if (radius < 0) throw DomainError("fuzzy: radius must be >= 0");

  std::vector<Outcome> out(grid.n_cells());
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      const std::size_t i = grid.cell(r, c);
      const bool pred = predictions[i] != 0;
      const bool obs = observations[i] != 0;
      if (obs) {
        out[i] = pred ? Outcome::Hit : Outcome::Miss;
        continue;
      }
      if (!pred) {
        out[i] = Outcome::CorrectNegative;
        continue;
      }
      // Predicted fire, none observed here: credit a hit when any
      // observed fire lies in the Chebyshev neighborhood.
      bool neighbor_fire = false;
      for (int dr = -radius; dr <= radius && !neighbor_fire; ++dr) {
        const int nr = r + dr;
        if (nr < 0 || nr >= grid.n_rows) continue;
        for (int dc = -radius; dc <= radius; ++dc) {
          const int nc = c + dc;
          if (nc < 0 || nc >= grid.n_cols) continue;
          if (observations[grid.cell(nr, nc)]) {
            neighbor_fire = true;
            break;
          }
        }
      }
      out[i] = neighbor_fire ? Outcome::Hit : Outcome::FalseAlarm;
    }
  }
  return out;
}

ConfusionCounts fuzzy_match(std::span<const std::uint8_t> predictions,
                            std::span<const std::uint8_t> observations,
                            const GridDefinition& grid, int radius) {
  ConfusionCounts counts;
  for (const Outcome o :
       fuzzy_classify(predictions, observations, grid, radius)) {
    switch (o) {
      case Outcome::Hit: counts.hits += 1.0; break;
      case Outcome::Miss: counts.misses += 1.0; break;
      case Outcome::FalseAlarm: counts.false_alarms += 1.0; break;
      case Outcome::CorrectNegative: counts.correct_negatives += 1.0; break;
    }
  }
  return counts;
}

// ---------------------------------------------------------------------------

double quantile_threshold(std::span<const double> values, double q) {
  if (values.empty()) throw DomainError("quantile: empty series");
  if (!(q > 0.0 && q < 1.0))
    throw DomainError("quantile: q must be inside (0, 1)");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::pair<SplitView, SplitView> temporal_split(const TimeAxis& axis,
                                               const DateRange& train,
                                               const DateRange& test) {
  if (train.end < train.start || test.end < test.start)
    throw MismatchError("split: range end precedes start");
  if (train.overlaps(test))
    throw MismatchError("split: train and test ranges overlap");
  auto view = [&](const DateRange& r) {
    const int b = axis.index(r.start);
    const int e = axis.index(r.end);
    if (b < 0 || e < 0)
      throw MismatchError("split: range " + r.start.to_iso() + ".." +
                          r.end.to_iso() + " outside the dataset time axis");
    return SplitView{b, e + 1};
  };
  return {view(train), view(test)};
}

} // namespace pyric
