#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chemo/diagnostics.hpp"
#include "chemo/error.hpp"
#include "chemo/solver.hpp"

using namespace chemo;

namespace {

Field make_field(const Grid& g, const std::function<double(double, double)>& f) {
  Field out(g.size());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) out[g.index(i, j)] = f(g.center_x(i), g.center_y(j));
  return out;
}

double sum_volume(const Field& f, const Grid& g) {
  long double acc = 0;
  for (double x : f) acc += x;
  return static_cast<double>(acc) * g.cell_volume();
}

Field bump(const Grid& g, double height) {
  return make_field(g, [&](double x, double y) {
    return 0.1 + height * std::exp(-((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)) / 0.02);
  });
}

}  // namespace

TEST_CASE("grid construction and validation") {
  const Grid g = Grid::rectangle(2.0, 1.0, 16, 8);
  CHECK(g.size() == 128);
  CHECK(g.h[0] == 0.125);
  CHECK(g.diameter() == doctest::Approx(std::sqrt(5.0)));
  CHECK(g.refined(2).nx() == 32);
  CHECK_THROWS_AS(Grid::line(1.0, 4), ValidationError);
  CHECK_THROWS_AS(Grid::rectangle(1.0, 1.0, 16, 7), ValidationError);
  const Grid line = Grid::line(3.0, 12);
  CHECK(line.diameter() == 3.0);
  CHECK(line.domain_volume() == 3.0);
}

TEST_CASE("Neumann Laplacian") {
  const Grid g = Grid::rectangle(1.0, 1.0, 16, 16);
  for (double x : laplacian_neumann(Field(g.size(), 3.0), g)) CHECK(x == 0.0);
  const Field f = make_field(g, [](double x, double y) { return std::sin(7 * x) * std::exp(y); });
  CHECK(std::abs(sum_volume(laplacian_neumann(f, g), g)) < 1e-12);

  auto error = [](int n) {
    const double L = 2.0;
    const Grid line = Grid::line(L, n);
    const Field c = make_field(line, [&](double x, double) { return std::cos(std::numbers::pi * x / L); });
    const Field lap = laplacian_neumann(c, line);
    double e = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      e = std::max(e, std::abs(lap[i] + std::pow(std::numbers::pi / L, 2) * c[i]));
    }
    return e;
  };
  const double e1 = error(32), e2 = error(64);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("chemotactic flux") {
  const Grid g = Grid::rectangle(1.0, 1.0, 16, 16);
  const SensitivityParams sp{0.7, 1.0, 0.0};
  const Field u = bump(g, 3.0);
  const FaceFlux flat = chemotactic_flux(u, Field(g.size(), 2.0), g, sp, FluxScheme::Upwind);
  for (double x : flat.x) CHECK(x == 0.0);
  for (double y : flat.y) CHECK(y == 0.0);
  CHECK(flat.max_speed == 0.0);

  const Field v = make_field(g, [](double x, double y) { return 1.0 + x * x + 0.5 * std::sin(3 * y); });
  for (auto scheme : {FluxScheme::Upwind, FluxScheme::Central}) {
    const FaceFlux fl = chemotactic_flux(u, v, g, sp, scheme);
    CHECK(std::abs(sum_volume(flux_divergence(fl, g), g)) < 1e-12);
    for (int j = 0; j < g.ny(); ++j) {
      CHECK(fl.x[static_cast<std::size_t>(j) * (g.nx() + 1)] == 0.0);
      CHECK(fl.x[static_cast<std::size_t>(j) * (g.nx() + 1) + g.nx()] == 0.0);
    }
  }
  Field v0 = v;
  v0[5] = 0.0;
  v0[6] = 0.0;
  CHECK_THROWS_AS(chemotactic_flux(u, v0, g, sp, FluxScheme::Upwind), DomainError);
  CHECK_NOTHROW(chemotactic_flux(u, v0, g, {0.7, 1.0, 0.5}, FluxScheme::Upwind));
}

TEST_CASE("flux divergence with constant u matches the product rule at first order") {
  const SensitivityParams sp{2.0, 1.0, 50.0};
  auto error = [&](int n) {
    const Grid line = Grid::line(1.0, n);
    const Field u(line.size(), 1.0);
    const Field v = make_field(line, [](double x, double) { return 1.0 + std::cos(std::numbers::pi * x); });
    const Field div = flux_divergence(chemotactic_flux(u, v, line, sp, FluxScheme::Upwind), line);
    double e = 0;
    for (int i = 2; i < n - 2; ++i) {
      const double x = line.center_x(i);
      const double vv = 1.0 + std::cos(std::numbers::pi * x);
      const double d1 = -std::numbers::pi * std::sin(std::numbers::pi * x);
      const double d2 = -std::numbers::pi * std::numbers::pi * std::cos(std::numbers::pi * x);
      const double chi = sp.K / (sp.a + vv), dchi = -sp.K / ((sp.a + vv) * (sp.a + vv));
      e = std::max(e, std::abs(div[static_cast<std::size_t>(i)] - (chi * d2 + dchi * d1 * d1)));
    }
    return e;
  };
  const double e1 = error(64), e2 = error(128), e3 = error(256);
  CHECK(e2 < e1);
  CHECK(e3 < e2);
  CHECK(e1 / e2 > 1.8);
}

TEST_CASE("CG solves the shifted Neumann system") {
  const Grid g = Grid::rectangle(1.0, 2.0, 16, 32);
  const Field b = make_field(g, [](double x, double y) { return std::cos(x) + y * y; });
  Field x(g.size(), 0.0);
  const CgResult res = solve_shifted_laplacian(1.3, 0.01, b, x, g, 1e-12, 1000);
  CHECK(res.relative_residual < 1e-12);
  const Field lap = laplacian_neumann(x, g);
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(1.3 * x[i] - 0.01 * lap[i] - b[i]));
  CHECK(worst < 1e-10);
  CHECK_THROWS_AS(solve_shifted_laplacian(1.0, 10.0, b, x = Field(g.size(), 0.0), g, 1e-14, 1), NumericalError);
}

TEST_CASE("K = 0 with u = 1, v = 0 follows the logistic-free ODE v' = 1 - v") {
  for (int dim : {1, 2}) {
    const Grid g = dim == 1 ? Grid::line(1.0, 16) : Grid::rectangle(1.0, 1.0, 12, 12);
    SolverConfig cfg;
    cfg.sp = {0.0, 1.0, 0.0};
    cfg.dt_max = 1e-3;
    RunOptions opts;
    opts.horizon = 1.0;
    opts.cadence = 100;
    const RunReport rep = run(SimState::make(g, Field(g.size(), 1.0), Field(g.size(), 0.0)), cfg, opts);
    REQUIRE(rep.status == RunStatus::Completed);
    for (double x : rep.final_state.u) CHECK(x == doctest::Approx(1.0).epsilon(1e-13));
    const double v = rep.final_state.v[0];
    for (double x : rep.final_state.v) CHECK(x == doctest::Approx(v).epsilon(1e-12));
    CHECK(std::abs(v - (1 - std::exp(-1.0))) < 5e-4);
  }
}

TEST_CASE("uniform equilibrium stays put") {
  const Grid g = Grid::rectangle(1.0, 1.0, 10, 10);
  SolverConfig cfg;
  cfg.sp = {0.8, 1.0, 0.0};
  SimState s = SimState::make(g, Field(g.size(), 2.5), Field(g.size(), 2.5));
  for (int i = 0; i < 50; ++i) step_in_place(s, cfg);
  for (double x : s.u) CHECK(x == doctest::Approx(2.5).epsilon(1e-14));
  for (double x : s.v) CHECK(x == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("mass is conserved over 10^4 steps and u stays nonnegative") {
  const Grid g = Grid::rectangle(1.0, 1.0, 12, 12);
  SolverConfig cfg;
  cfg.sp = {0.5, 1.0, 0.0};
  cfg.dt_max = 2e-3;
  const Field u0 = make_field(g, [](double x, double y) { return std::exp(-((x - 0.3) * (x - 0.3) + y * y) / 0.01); });
  SimState s = SimState::make(g, u0, Field(g.size(), 1.0));
  const double m0 = mass(u0, g);
  double worst = 0, lowest = 0;
  for (int i = 0; i < 10000; ++i) {
    step_in_place(s, cfg);
    worst = std::max(worst, std::abs(mass(s.u, g) / m0 - 1));
    lowest = std::min(lowest, min_field(s.u));
  }
  CHECK(worst <= 1e-12);
  CHECK(lowest >= 0.0);
  CHECK(s.steps == 10000);
}

TEST_CASE("positivity with upwind fluxes at every step") {
  const Grid g = Grid::rectangle(1.0, 1.0, 24, 24);
  SolverConfig cfg;
  cfg.sp = {0.9, 1.0, 0.0};
  const Field u0 = make_field(g, [](double x, double y) {
    return (std::abs(x - 0.5) < 0.15 && std::abs(y - 0.4) < 0.2) ? 30.0 : 0.0;
  });
  SimState s = SimState::make(g, u0, make_field(g, [](double x, double) { return 0.2 + x; }));
  for (int i = 0; i < 400; ++i) {
    step_in_place(s, cfg);
    REQUIRE(min_field(s.u) >= 0.0);
  }
}

TEST_CASE("dt policy") {
  const Grid g = Grid::line(1.0, 20);
  SolverConfig cfg;
  const SimState s = SimState::make(g, Field(g.size(), 1.0), Field(g.size(), 1.0));
  CHECK(stable_dt(s, cfg, 0.0) == cfg.dt_max);
  CHECK(stable_dt(s, cfg, 100.0) == doctest::Approx(cfg.cfl_adv * 0.05 / 100.0));
  cfg.u_diffusion = DiffusionStepping::Explicit;
  CHECK(stable_dt(s, cfg, 0.0) == doctest::Approx(cfg.cfl_diff * 0.0025 / 2));
  cfg.dt_min = 2e-3;
  CHECK_THROWS_AS(stable_dt(s, cfg, 0.0), StepUnderflow);
  SolverConfig bad;
  bad.dt_min = bad.dt_max;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("explicit diffusion agrees with implicit diffusion at small dt") {
  const Grid g = Grid::line(1.0, 32);
  const Field u0 = make_field(g, [](double x, double) { return 1 + 0.5 * std::cos(std::numbers::pi * x); });
  SolverConfig imp, exp;
  imp.sp = exp.sp = {0.0, 1.0, 0.0};
  imp.dt_max = exp.dt_max = 1e-4;
  exp.u_diffusion = DiffusionStepping::Explicit;
  RunOptions opts;
  opts.horizon = 0.1;
  opts.cadence = 1000;
  const SimState s0 = SimState::make(g, u0, Field(g.size(), 1.0));
  const RunReport a = run(s0, imp, opts), b = run(s0, exp, opts);
  for (std::size_t i = 0; i < u0.size(); ++i) CHECK(a.final_state.u[i] == doctest::Approx(b.final_state.u[i]).epsilon(1e-4));
}

TEST_CASE("symmetric data stay symmetric") {
  const Grid g = Grid::rectangle(1.0, 1.0, 20, 20);
  SolverConfig cfg;
  cfg.sp = {0.5, 1.0, 0.0};
  SimState s = SimState::make(g, bump(g, 20.0), Field(g.size(), 1.0));
  for (int i = 0; i < 100; ++i) step_in_place(s, cfg);
  double worst = 0;
  for (int j = 0; j < 20; ++j) {
    for (int i = 0; i < 20; ++i) {
      const double c = s.u[g.index(i, j)];
      worst = std::max({worst, std::abs(c - s.u[g.index(19 - i, j)]), std::abs(c - s.u[g.index(i, 19 - j)]),
                        std::abs(c - s.u[g.index(j, i)])});
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("heat run contracts towards the mean") {
  const Grid g = Grid::rectangle(1.0, 1.0, 16, 16);
  SolverConfig cfg;
  cfg.sp = {0.0, 1.0, 0.0};
  RunOptions opts;
  opts.horizon = 0.5;
  opts.cadence = 1;
  const Field u0 = bump(g, 5.0);
  const double mean = mass(u0, g);
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  opts.observer = [&](const SimState& s, const MonitorSample&) {
    double acc = 0;
    for (double x : s.u) acc += (x - mean) * (x - mean);
    const double d = std::sqrt(acc * g.cell_volume());
    if (!(d < prev)) monotone = false;
    prev = d;
  };
  const RunReport rep = run(SimState::make(g, u0, Field(g.size(), 1.0)), cfg, opts);
  CHECK(rep.status == RunStatus::Completed);
  CHECK(monotone);
  CHECK(rep.final_time == 0.5);
}

TEST_CASE("blow-up signals") {
  const Grid g = Grid::rectangle(1.0, 1.0, 16, 16);
  RunOptions opts;
  opts.horizon = 5.0;
  opts.cadence = 5;
  const SimState s0 = SimState::make(g, bump(g, 60.0), Field(g.size(), 1.0));

  SolverConfig growth;
  growth.sp = {20.0, 1.0, 0.0};
  growth.blow_up_factor = 1.05;
  const RunReport a = run(s0, growth, opts);
  CHECK(a.status == RunStatus::BlowUpSuspected);
  CHECK(a.final_time < opts.horizon);
  CHECK(a.samples.back().linf_u > 1.05 * linf(s0.u));

  SolverConfig tight;
  tight.sp = {20.0, 1.0, 0.0};
  tight.dt_min = 5e-3;
  const RunReport b = run(s0, tight, opts);
  CHECK(b.status == RunStatus::BlowUpSuspected);
  CHECK(b.message.find("dt_min") != std::string::npos);
  CHECK(b.samples.back().dt == 0.0);

  SolverConfig cg;
  cg.sp = {0.5, 1.0, 0.0};
  cg.cg_max_iter = 1;
  const RunReport c = run(s0, cg, opts);
  CHECK(c.status == RunStatus::Error);
  CHECK(to_string(c.status) == "error");
}

TEST_CASE("run preconditions") {
  const Grid g = Grid::line(1.0, 10);
  SolverConfig cfg;
  RunOptions opts;
  CHECK_THROWS_AS(run(SimState::make(g, Field(g.size(), 0.0), Field(g.size(), 1.0)), cfg, opts), ValidationError);
  CHECK_THROWS_AS(run(SimState::make(g, Field(g.size(), 1.0), Field(g.size(), 0.0)), cfg, opts), ValidationError);
  CHECK_THROWS_AS(SimState::make(g, Field(g.size(), -1.0), Field(g.size(), 1.0)), ValidationError);
  CHECK_THROWS_AS(SimState::make(g, Field(3, 1.0), Field(g.size(), 1.0)), ValidationError);
  cfg.sp.a = 1.0;
  CHECK_NOTHROW(run(SimState::make(g, Field(g.size(), 1.0), Field(g.size(), 0.0)), cfg, opts));
}
