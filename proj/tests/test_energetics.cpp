#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fhd/energetics.hpp"
#include "fhd/errors.hpp"
#include "fhd/spectral.hpp"
#include "support/oracles.hpp"

using namespace fhd;
constexpr double pi = std::numbers::pi;

namespace {

class BandForcing final : public Forcing {
 public:
  void eval(double, const TorusGrid& g, ScalarField& f_rho, VectorField& f_m) const override {
    spectral::for_each_point(g, [&](std::size_t i, int a, int b, int) {
      f_rho.values[i] = 0.05 * std::cos(pi * g.coordinate(b));
      f_m[0].values[i] = 0.02 * std::cos(pi * g.coordinate(a));
      f_m[1].values[i] = 0.0;
    });
  }
};

ModelSpec full_model() {
  ModelSpec m;
  m.pressure = PressureLaw(1.0, 2.0);
  m.friction = FrictionLaw::saturating(0.5);
  m.attraction = KernelSpec::cosine(0.5);
  m.alignment = KernelSpec::cosine(0.5);
  m.epsilon = 1e-2;
  m.density_reg = 1e-3;
  return m;
}

FluidState wave_state(const TorusGrid& g) {
  FluidState s(g);
  spectral::for_each_point(g, [&](std::size_t i, int a, int b, int) {
    const double x = g.coordinate(a), y = g.coordinate(b);
    s.rho.values[i] = 1.0 + 0.25 * std::cos(pi * x) * std::cos(pi * y);
    s.momentum[0].values[i] = 0.1 * std::cos(pi * y);
    s.momentum[1].values[i] = -0.05 * std::sin(pi * x);
  });
  return s;
}

struct TrajectoryLog final : RunObserver {
  std::vector<FluidState> states;
  std::vector<BudgetAccum> accums;
  void on_sample(const FluidState& s, const BudgetAccum& a) override {
    states.push_back(s);
    accums.push_back(a);
  }
};

std::vector<SamplePoint> to_samples(const TrajectoryLog& log, const ModelSpec& m) {
  std::vector<SamplePoint> out;
  for (std::size_t k = 0; k < log.states.size(); ++k)
    out.push_back({energy_snapshot(log.states[k], m), log.accums[k]});
  return out;
}

}  // namespace

TEST_CASE("energy snapshot against closed-form values") {
  TorusGrid g(2, 16);
  const double a = 0.3, c = 0.7;
  ModelSpec m;
  m.pressure = PressureLaw(1.0, 2.0);
  m.attraction = KernelSpec::fourier_table({{{1, 0, 0}, c}});

  FluidState s(g);
  spectral::for_each_point(g, [&](std::size_t i, int ax, int, int) {
    s.rho.values[i] = 1.0 + a * std::cos(pi * g.coordinate(ax));
    s.momentum[0].values[i] = 0.1 * s.rho.values[i];
    s.momentum[1].values[i] = -0.2 * s.rho.values[i];
  });
  s.time = 0.7;

  // kinetic = |u|^2/2 * mass = 0.025*4, internal = 2a^2, interaction = 2a^2 c
  const EnergySnapshot e = energy_snapshot(s, m);
  CHECK(e.time == 0.7);
  CHECK(oracles::rel_diff(e.kinetic, 0.1) < 1e-13);
  CHECK(oracles::rel_diff(e.internal, 2.0 * a * a) < 1e-13);
  CHECK(oracles::rel_diff(e.interaction, 2.0 * a * a * c) < 1e-13);
  CHECK(oracles::rel_diff(e.total, e.kinetic + e.internal + e.interaction) < 1e-15);
}

TEST_CASE("recomputed rates match the assembler's rates") {
  TorusGrid g(2, 16);
  ModelSpec m = full_model();
  m.forcing = std::make_shared<BandForcing>();
  const FluidState s = wave_state(g);

  RhsAssembler rhs(m, g, 1e-8);
  BudgetRates from_assembler;
  rhs.assemble(s, &from_assembler);
  const BudgetRates recomputed =
      instantaneous_rates(s, m, rhs.attraction_engine(), rhs.alignment_engine(), 1e-8);

  auto close = [](double x, double y) {
    return std::abs(x - y) <= 1e-11 * std::max({1.0, std::abs(x), std::abs(y)});
  };
  CHECK(close(recomputed.viscous, from_assembler.viscous));
  CHECK(close(recomputed.density_reg, from_assembler.density_reg));
  CHECK(close(recomputed.friction, from_assembler.friction));
  CHECK(close(recomputed.alignment, from_assembler.alignment));
  CHECK(close(recomputed.reg_crossterm, from_assembler.reg_crossterm));
  CHECK(close(recomputed.forcing_power, from_assembler.forcing_power));
  CHECK(recomputed.viscous > 0.0);
  CHECK(recomputed.friction > 0.0);
  CHECK(recomputed.alignment > 0.0);
}

TEST_CASE("online budget audit accepts a clean run and rejects a tampered one") {
  TorusGrid g(2, 16);
  const ModelSpec m = full_model();
  IntegratorConfig cfg;
  cfg.t_end = 0.1;
  cfg.samples = 50;

  TrajectoryLog log;
  RunObserver* obs[] = {&log};
  run(wave_state(g), m, cfg, obs);
  REQUIRE(log.states.size() == 51);

  auto samples = to_samples(log, m);
  const BudgetReport rep = audit_energy(samples, 1e-7);
  CHECK(rep.pass);
  REQUIRE(rep.windows.size() == 50);
  // one defect entry per sample, the t0 sample contributing an exact zero
  REQUIRE(rep.defect_series.size() == rep.windows.size() + 1);
  CHECK(rep.defect_series.front() == 0.0);
  CHECK(rep.windows.front().t0 == 0.0);
  CHECK(rep.windows.back().t1 == doctest::Approx(0.1).epsilon(1e-12));
  for (std::size_t k = 0; k < rep.windows.size(); ++k)
    CHECK(rep.defect_series[k + 1] == std::max(0.0, rep.windows[k].defect));
  // dissipation channels all accumulated strictly
  CHECK(rep.windows.back().viscous > 0.0);
  CHECK(rep.windows.back().friction > 0.0);
  CHECK(rep.windows.back().alignment > 0.0);

  // inflating a dissipation accumulator fakes created energy, which must fail
  auto tampered = samples;
  tampered.back().accum.viscous += 1e-3;
  CHECK_FALSE(audit_energy(tampered, 1e-7).pass);
}

TEST_CASE("offline budget audit is conclusive only at sufficient cadence") {
  TorusGrid g(2, 16);
  const ModelSpec m = full_model();

  // The conclusiveness rule needs the Richardson estimate under half the
  // budget tol_rate * horizon; this trajectory needs a dense cadence for that.
  IntegratorConfig fine;
  fine.t_end = 0.1;
  fine.samples = 400;
  TrajectoryLog flog;
  RunObserver* fobs[] = {&flog};
  run(wave_state(g), m, fine, fobs);
  const BudgetReport rep = audit_energy(flog.states, m, 1e-6);
  CHECK(rep.pass);
  CHECK(rep.windows.size() == 400);

  IntegratorConfig coarse;
  coarse.t_end = 0.1;
  coarse.samples = 4;
  TrajectoryLog clog;
  RunObserver* cobs[] = {&clog};
  run(wave_state(g), m, coarse, cobs);
  CHECK_THROWS_AS(audit_energy(clog.states, m, 1e-6), AuditError);

  std::vector<FluidState> lone(flog.states.begin(), flog.states.begin() + 1);
  CHECK_THROWS_AS(audit_energy(lone, m, 1e-6), AuditError);
}

TEST_CASE("weak identities hold and sharpen at second order in cadence") {
  TorusGrid g(2, 16);
  const ModelSpec m = full_model();

  auto worst_rel = [](const IdentityReport& rep) {
    double floor = 0.0;
    for (const auto& e : rep.entries) floor = std::max(floor, e.scale);
    floor = std::max(1e-9 * floor, 1e-300);
    double worst = 0.0;
    for (const auto& e : rep.entries)
      worst = std::max(worst, std::abs(e.residual) / std::max(e.scale, floor));
    return worst;
  };

  IntegratorConfig fine;
  fine.t_end = 0.1;
  fine.samples = 50;
  TrajectoryLog flog;
  RunObserver* fobs[] = {&flog};
  run(wave_state(g), m, fine, fobs);
  const IdentityReport frep = audit_weak_identities(flog.states, m);
  REQUIRE_FALSE(frep.entries.empty());
  const double fworst = worst_rel(frep);
  // dominated by the trapezoid time quadrature, about 9e-6 at this cadence;
  // the refinement ratio below is the sharp part of this test
  CHECK(fworst < 1e-4);

  IntegratorConfig coarse;
  coarse.t_end = 0.1;
  coarse.samples = 25;
  TrajectoryLog clog;
  RunObserver* cobs[] = {&clog};
  run(wave_state(g), m, coarse, cobs);
  const double cworst = worst_rel(audit_weak_identities(clog.states, m));

  // trapezoid-in-time residual: halving the cadence should cut it about 4x
  CHECK(fworst < 0.4 * cworst);
}
