// SPDX-License-Identifier: Apache-2.0
#include "pyric/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "pyric/ic_model.hpp"
#include "pyric/rng.hpp"

namespace pyric {

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::ParameterShift: return "parameter-shift";
    case Scenario::Seasonal: return "seasonal";
    case Scenario::Random: return "random";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "parameter-shift") return Scenario::ParameterShift;
  if (name == "seasonal") return Scenario::Seasonal;
  if (name == "random") return Scenario::Random;
  throw DomainError("synthetic: unknown scenario '" + name +
                    "' (expected parameter-shift, seasonal or random)");
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// The coefficient the parameter-shift scenario perturbs, and by how much.
constexpr const char* kShiftedParameter = "qign.c1";
constexpr double kShiftFactor = 2.0;
// Target fraction of fire cell-days; the Bernoulli rates are rescaled to
// land here so the event stays rare but learnable.
constexpr double kTargetFireRate = 0.015;

double clampd(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

int stage_code_for_doy(int doy, int row_shift) {
  const int d = (doy + row_shift) % 365;
  if (d < 60) return 0;        // cured (winter)
  if (d < 121) return 1;       // pre-green (spring)
  if (d < 201) return 2;       // green (early summer)
  if (d < 261) return 3;       // transition (late summer)
  return 0;                    // cured (fall/winter)
}

} // namespace

SyntheticResult generate_synthetic(const GridDefinition& grid, int days,
                                   std::uint64_t seed, Scenario scenario,
                                   Date start) {
  grid.validate();
  if (days <= 0) throw DomainError("synthetic: days must be positive");

  const int rows = grid.n_rows;
  const int cols = grid.n_cols;
  const std::size_t cells = grid.n_cells();
  const std::size_t n = cells * static_cast<std::size_t>(days);

  SyntheticResult result;
  Dataset& data = result.data;
  data.stack.grid = grid;
  data.stack.time = TimeAxis{start, days};

  auto add_daily = [&](const char* name, VarKind kind, const char* units) {
    Variable v;
    v.name = name;
    v.kind = kind;
    v.temporal = Temporal::Daily;
    v.units = units;
    v.data.resize(n);
    data.stack.variables.push_back(std::move(v));
    return &data.stack.variables.back();
  };
  auto add_static = [&](const char* name, VarKind kind, const char* units) {
    Variable v;
    v.name = name;
    v.kind = kind;
    v.temporal = Temporal::Static;
    v.units = units;
    v.data.resize(cells);
    data.stack.variables.push_back(std::move(v));
    return &data.stack.variables.back();
  };

  // Static site description: fuel-model quadrants, banded climate zones,
  // patterned slope and cover, a west-east precipitation gradient.
  Variable* ap = add_static("annual_precip_mean", VarKind::Continuous,
                            "inches/year");
  Variable* vc = add_static("vegetation_cover", VarKind::Categorical, "class");
  Variable* sl = add_static("slope_class", VarKind::Categorical, "class");
  Variable* fm = add_static("fuel_model", VarKind::Categorical, "class");
  Variable* cz = add_static("climate_zone", VarKind::Categorical, "class");
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = grid.cell(r, c);
      const double fc = cols > 1 ? double(c) / (cols - 1) : 0.0;
      ap->data[i] = static_cast<float>(10.0 + 28.0 * fc);
      vc->data[i] = static_cast<float>((r * cols + c) % 5 + 1);
      sl->data[i] = static_cast<float>((r + c) % 5 + 1);
      fm->data[i] = static_cast<float>(2 * (r >= rows / 2) + (c >= cols / 2));
      cz->data[i] = static_cast<float>(clampd(1 + (4 * c) / std::max(cols, 1),
                                              1, 4));
    }
  }

  Variable* temp = add_daily("temp", VarKind::Continuous, "degF");
  Variable* tmax = add_daily("temp_max", VarKind::Continuous, "degF");
  Variable* tmin = add_daily("temp_min", VarKind::Continuous, "degF");
  Variable* rh = add_daily("rh", VarKind::Continuous, "percent");
  Variable* rhmax = add_daily("rh_max", VarKind::Continuous, "percent");
  Variable* rhmin = add_daily("rh_min", VarKind::Continuous, "percent");
  Variable* wind = add_daily("wind_speed", VarKind::Continuous, "mph");
  Variable* cloud = add_daily("cloud_cover", VarKind::Continuous, "fraction");
  Variable* pdur = add_daily("precip_duration", VarKind::Continuous, "hours");
  Variable* stage = add_daily("vegetation_stage", VarKind::Categorical,
                              "class");

  Rng weather(seed, "weather");
  for (int d = 0; d < days; ++d) {
    const int doy = days_between(Date::ymd(start.year(), 1, 1),
                                 start.plus_days(d)) %
                    365;
    const double phase = 2.0 * kPi * doy / 365.0;
    const double summer = std::sin(phase - kPi / 2.0); // +1 mid-year
    const double winter_wet = 0.5 - 0.5 * summer;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const std::size_t i = static_cast<std::size_t>(d) * cells +
                              grid.cell(r, c);
        const double fr = rows > 1 ? double(r) / (rows - 1) : 0.0;
        const double fc = cols > 1 ? double(c) / (cols - 1) : 0.0;

        double t = 60.0 - 10.0 * fr + (20.0 + 5.0 * fc) * summer +
                   weather.gauss(0.0, 5.0);
        t = clampd(t, -40.0, 118.0);
        const double up = clampd(3.0 + std::fabs(weather.gauss(5.0, 2.5)),
                                 1.0, 20.0);
        const double dn = clampd(3.0 + std::fabs(weather.gauss(5.0, 2.5)),
                                 1.0, 20.0);

        double h = 72.0 - 0.55 * (t - 45.0) + 10.0 * (winter_wet - 0.5) +
                   weather.gauss(0.0, 8.0);
        h = clampd(h, 3.0, 97.0);
        const double hup = clampd(std::fabs(weather.gauss(8.0, 4.0)), 1.0,
                                  100.0 - h);
        const double hdn = clampd(std::fabs(weather.gauss(8.0, 4.0)), 1.0, h);

        const double w = clampd(std::fabs(weather.gauss(7.0, 4.0)), 0.0, 40.0);
        double cl = sigmoid_value(weather.gauss(-0.6, 1.2));

        double hours_rain = 0.0;
        const double p_wet = 0.05 + 0.16 * winter_wet;
        if (weather.uniform() < p_wet) {
          const double u = weather.uniform();
          hours_rain = clampd(1.0 + 9.0 * u * u, 0.5, 20.0);
          cl = clampd(cl + 0.4, 0.0, 1.0);
          h = clampd(h + 14.0, 3.0, 97.0);
        }

        temp->data[i] = static_cast<float>(t);
        tmax->data[i] = static_cast<float>(t + up);
        tmin->data[i] = static_cast<float>(t - dn);
        rh->data[i] = static_cast<float>(h);
        rhmax->data[i] = static_cast<float>(clampd(h + hup, h, 100.0));
        rhmin->data[i] = static_cast<float>(clampd(h - hdn, 0.0, h));
        wind->data[i] = static_cast<float>(w);
        cloud->data[i] = static_cast<float>(cl);
        pdur->data[i] = static_cast<float>(hours_rain);
        stage->data[i] = static_cast<float>(stage_code_for_doy(doy, r % 15));
      }
    }
  }
  data.stack.validate();

  // Fire observations.
  data.fire.grid = grid;
  data.fire.time = data.stack.time;
  data.fire.fire.assign(n, 0);
  data.fire.cell_valid.assign(cells, 1);

  std::vector<double> p(n, 0.0);
  result.shifted_parameter = kShiftedParameter;
  if (scenario == Scenario::ParameterShift) {
    ParameterSet truth = ParameterSet::defaults();
    result.default_value = truth.value(kShiftedParameter);
    result.shifted_value = result.default_value * kShiftFactor;
    truth.set_value(kShiftedParameter, result.shifted_value);
    IcModel model(truth);

    // Hard-mode IC of the generating model over every cell-day.
    std::vector<double> ic(n, 0.0);
    std::vector<CellInputs> series(days);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        for (int d = 0; d < days; ++d)
          series[d] = cell_inputs(data, d, r, c).inputs;
        const int warm = std::min(30, days);
        MoistureCarry carry = model.spin_up(
            std::span<const CellInputs>(series).subspan(0, warm));
        for (int d = 0; d < days; ++d) {
          const ForwardResult out = model.forward(series[d], carry, Mode::Hard);
          carry = out.new_carry;
          ic[static_cast<std::size_t>(d) * cells + grid.cell(r, c)] =
              out.state.ic;
        }
      }
    }

    const double tau = quantile_threshold(ic, 0.9);
    double mean_p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = 0.30 * sigmoid_value(0.25 * (ic[i] - tau));
      mean_p += p[i];
    }
    mean_p /= static_cast<double>(n);
    // Rescale to the target base rate; monotone in IC either way.
    const double k = mean_p > 0.0 ? kTargetFireRate / mean_p : 0.0;
    for (auto& pi : p) pi = std::min(0.6, pi * k);
  } else if (scenario == Scenario::Seasonal) {
    result.shifted_parameter.clear();
    for (int d = 0; d < days; ++d) {
      for (std::size_t cell = 0; cell < cells; ++cell) {
        const std::size_t i = static_cast<std::size_t>(d) * cells + cell;
        const bool dry = temp->data[i] > 75.0f && rh->data[i] < 30.0f &&
                         pdur->data[i] == 0.0f;
        p[i] = dry ? 0.03 : 0.001;
      }
    }
  } else {
    result.shifted_parameter.clear();
    std::fill(p.begin(), p.end(), 0.005);
  }

  Rng fire_rng(seed, "fire");
  std::size_t fires = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (fire_rng.bernoulli(p[i])) {
      data.fire.fire[i] = 1;
      ++fires;
    }
  }
  result.fire_base_rate = static_cast<double>(fires) / static_cast<double>(n);
  return result;
}

} // namespace pyric
