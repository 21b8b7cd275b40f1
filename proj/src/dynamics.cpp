#include "fhd/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "fhd/errors.hpp"

namespace fhd {

namespace {

void require_finite(const ScalarField& f, const char* term) {
  if (!all_finite(f)) throw BlowUpError(std::string("non-finite value in ") + term);
}

void require_finite(const VectorField& v, const char* term) {
  if (!all_finite(v)) throw BlowUpError(std::string("non-finite value in ") + term);
}

std::array<double, 6> pack(const BudgetRates& r) {
  return {r.viscous, r.density_reg, r.friction, r.alignment, r.reg_crossterm, r.forcing_power};
}

std::array<double, 6> pack(const BudgetAccum& a) {
  return {a.viscous, a.density_reg, a.friction, a.alignment, a.reg_crossterm, a.forcing_power};
}

BudgetAccum unpack(const std::array<double, 6>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

}  // namespace

RhsAssembler::RhsAssembler(const ModelSpec& model, const TorusGrid& grid, double rho_guard)
    : model_(model),
      grid_(grid),
      rho_guard_(rho_guard),
      attraction_(model.attraction, grid, ConvolutionEngine::Backend::fft),
      alignment_(model.alignment, grid, ConvolutionEngine::Backend::fft) {}

VectorField RhsAssembler::velocity(const FluidState& s) const {
  VectorField u(grid_);
  for (int a = 0; a < grid_.dim(); ++a)
    for (std::size_t i = 0; i < s.rho.size(); ++i)
      u[a][i] = s.momentum[a][i] / std::max(s.rho[i], rho_guard_);
  u = dealias(u);
  require_finite(u, "velocity");
  return u;
}

Tendency RhsAssembler::assemble(const FluidState& s, BudgetRates* rates) const {
  require_finite(s.rho, "state density");
  require_finite(s.momentum, "state momentum");

  const TorusGrid& g = grid_;
  const int dim = g.dim();
  const std::size_t n = g.point_count();
  const double nu = model_.density_reg;

  Tendency out(g);
  const VectorField u = velocity(s);

  ScalarField speed2(g);
  for (std::size_t i = 0; i < n; ++i) {
    double s2 = 0.0;
    for (int a = 0; a < dim; ++a) s2 += u[a][i] * u[a][i];
    speed2[i] = s2;
  }

  out.d_rho = divergence(s.momentum);
  scale(out.d_rho, -1.0);
  require_finite(out.d_rho, "mass transport");

  std::optional<VectorField> grad_rho;
  if (nu > 0.0) {
    add_scaled(out.d_rho, laplacian(s.rho), nu);
    require_finite(out.d_rho, "density regularization");
    grad_rho = gradient(s.rho);
  }

  for (int k = 0; k < dim; ++k)
    for (int l = 0; l < dim; ++l)
      add_scaled(out.d_momentum[k], derivative(dealias(multiply(s.momentum[k], u[l])), l), -1.0);
  require_finite(out.d_momentum, "momentum flux");

  ScalarField p(g);
  for (std::size_t i = 0; i < n; ++i) p[i] = model_.pressure.pressure(std::max(s.rho[i], 0.0));
  const VectorField grad_p = gradient(dealias(p));
  for (int k = 0; k < dim; ++k) add_scaled(out.d_momentum[k], grad_p[k], -1.0);
  require_finite(out.d_momentum, "pressure gradient");

  if (model_.epsilon > 0.0) {
    for (int k = 0; k < dim; ++k) add_scaled(out.d_momentum[k], laplacian(u[k]), model_.epsilon);
    require_finite(out.d_momentum, "velocity diffusion");
  }

  std::optional<ScalarField> friction_factor;
  if (model_.friction.enabled()) {
    friction_factor.emplace(g);
    for (std::size_t i = 0; i < n; ++i) (*friction_factor)[i] = model_.friction.factor(speed2[i]);
    for (int k = 0; k < dim; ++k)
      add_scaled(out.d_momentum[k], dealias(multiply(*friction_factor, s.momentum[k])), 1.0);
    require_finite(out.d_momentum, "friction");
  }

  if (!attraction_.kernel_is_zero()) {
    const VectorField gk = attraction_.grad_convolve(s.rho);
    for (int k = 0; k < dim; ++k)
      add_scaled(out.d_momentum[k], dealias(multiply(s.rho, gk[k])), -1.0);
    require_finite(out.d_momentum, "attraction");
  }

  // Alignment convolutions are kept around: the dissipation rate reuses them.
  std::optional<ScalarField> conv_rho;
  std::vector<ScalarField> conv_m;
  if (!alignment_.kernel_is_zero()) {
    conv_rho = alignment_.convolve(s.rho);
    for (int k = 0; k < dim; ++k) conv_m.push_back(alignment_.convolve(s.momentum[k]));
    for (int k = 0; k < dim; ++k) {
      add_scaled(out.d_momentum[k], dealias(multiply(s.rho, conv_m[k])), 1.0);
      add_scaled(out.d_momentum[k], dealias(multiply(s.momentum[k], *conv_rho)), -1.0);
    }
    require_finite(out.d_momentum, "alignment");
  }

  if (nu > 0.0) {
    for (int k = 0; k < dim; ++k) {
      ScalarField divterm(g);
      for (int l = 0; l < dim; ++l)
        add_scaled(divterm, derivative(dealias(multiply(u[k], (*grad_rho)[l])), l), 1.0);
      add_scaled(out.d_momentum[k], divterm, nu);
    }
    require_finite(out.d_momentum, "diffusion counterterm");
  }

  std::optional<ScalarField> f_rho;
  std::optional<VectorField> f_m;
  if (model_.forcing) {
    f_rho.emplace(g);
    f_m.emplace(g);
    model_.forcing->eval(s.time, g, *f_rho, *f_m);
    *f_rho = dealias(*f_rho);
    *f_m = dealias(*f_m);
    require_finite(*f_rho, "forcing");
    require_finite(*f_m, "forcing");
    add_scaled(out.d_rho, *f_rho, 1.0);
    for (int k = 0; k < dim; ++k) add_scaled(out.d_momentum[k], (*f_m)[k], 1.0);
  }

  if (rates) {
    BudgetRates r;
    if (model_.epsilon > 0.0) {
      double acc = 0.0;
      for (int k = 0; k < dim; ++k) {
        const VectorField gu = gradient(u[k]);
        for (int l = 0; l < dim; ++l) acc += inner(gu[l], gu[l]);
      }
      r.viscous = model_.epsilon * acc;
    }
    if (nu > 0.0) {
      const double guard = std::max(rho_guard_, 1e-300);
      ScalarField w(g);
      for (std::size_t i = 0; i < n; ++i) {
        double g2 = 0.0;
        for (int l = 0; l < dim; ++l) g2 += (*grad_rho)[l][i] * (*grad_rho)[l][i];
        w[i] = model_.pressure.potential_second(std::max(s.rho[i], guard)) * g2;
      }
      r.density_reg = nu * integrate(w);
      if (!attraction_.kernel_is_zero())
        r.reg_crossterm = nu * inner(s.rho, attraction_.laplacian_convolve(s.rho));
    }
    if (model_.friction.enabled()) {
      ScalarField w(g);
      for (std::size_t i = 0; i < n; ++i) w[i] = (*friction_factor)[i] * s.rho[i] * speed2[i];
      r.friction = integrate(w);
    }
    if (conv_rho) {
      double d = inner(multiply(s.rho, speed2), *conv_rho);
      for (int k = 0; k < dim; ++k) d -= inner(s.momentum[k], conv_m[k]);
      r.alignment = d;
    }
    if (f_rho) {
      double power = 0.0;
      for (int k = 0; k < dim; ++k) power += inner(u[k], (*f_m)[k]);
      std::optional<ScalarField> krho;
      if (!attraction_.kernel_is_zero()) krho = attraction_.convolve(s.rho);
      ScalarField chem(g);
      for (std::size_t i = 0; i < n; ++i)
        chem[i] = model_.pressure.potential_prime(std::max(s.rho[i], 0.0)) +
                  (krho ? (*krho)[i] : 0.0) - 0.5 * speed2[i];
      power += inner(chem, *f_rho);
      r.forcing_power = power;
    }
    for (double v : pack(r))
      if (!std::isfinite(v)) throw BlowUpError("non-finite value in energy rates");
    *rates = r;
  }
  return out;
}

Tendency assemble_rhs(const FluidState& state, const ModelSpec& model, double rho_guard) {
  return RhsAssembler(model, state.rho.grid, rho_guard).assemble(state);
}

double stable_dt(const FluidState& state, const RhsAssembler& rhs, const IntegratorConfig& cfg) {
  const TorusGrid& g = rhs.grid();
  const VectorField u = rhs.velocity(state);
  double wave = 0.0;
  for (std::size_t i = 0; i < g.point_count(); ++i) {
    double s2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) s2 += u[a][i] * u[a][i];
    const double c2 = rhs.model().pressure.pressure_prime(std::max(state.rho[i], 0.0));
    wave = std::max(wave, std::sqrt(s2) + std::sqrt(std::max(c2, 0.0)));
  }
  double dt = cfg.dt_max;
  if (wave > 0.0) dt = std::min(dt, cfg.cfl * g.spacing() / wave);
  const double diff = std::max(rhs.model().epsilon, rhs.model().density_reg);
  constexpr double pi = 3.14159265358979323846;
  if (diff > 0.0) dt = std::min(dt, g.spacing() * g.spacing() / (pi * pi * g.dim() * diff));
  if (!(dt >= 1e-12)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "stable step size fell below 1e-12 (dt = %.3e)", dt);
    throw StiffnessError(buf);
  }
  return dt;
}

StepInfo step(FluidState& state, BudgetAccum& accum, const RhsAssembler& rhs,
              const IntegratorConfig& cfg, double max_dt, double rho_floor) {
  const TorusGrid& g = rhs.grid();
  const int dim = g.dim();
  const std::size_t n = g.point_count();
  const double t0 = state.time;
  const double dt = std::min(stable_dt(state, rhs, cfg), max_dt);

  BudgetRates r1;
  const Tendency k1 = rhs.assemble(state, &r1);
  FluidState s1 = state;
  s1.time = t0 + dt;
  add_scaled(s1.rho, k1.d_rho, dt);
  add_scaled(s1.momentum, k1.d_momentum, dt);
  const std::array<double, 6> a0 = pack(accum);
  const std::array<double, 6> ra = pack(r1);
  std::array<double, 6> a1;
  for (int j = 0; j < 6; ++j) a1[j] = a0[j] + dt * ra[j];

  BudgetRates r2;
  const Tendency k2 = rhs.assemble(s1, &r2);
  FluidState s2(g);
  s2.time = t0 + 0.5 * dt;
  for (std::size_t i = 0; i < n; ++i)
    s2.rho[i] = 0.75 * state.rho[i] + 0.25 * (s1.rho[i] + dt * k2.d_rho[i]);
  for (int a = 0; a < dim; ++a)
    for (std::size_t i = 0; i < n; ++i)
      s2.momentum[a][i] = 0.75 * state.momentum[a][i] + 0.25 * (s1.momentum[a][i] + dt * k2.d_momentum[a][i]);
  const std::array<double, 6> rb = pack(r2);
  std::array<double, 6> a2;
  for (int j = 0; j < 6; ++j) a2[j] = 0.75 * a0[j] + 0.25 * (a1[j] + dt * rb[j]);

  BudgetRates r3;
  const Tendency k3 = rhs.assemble(s2, &r3);
  constexpr double c13 = 1.0 / 3.0, c23 = 2.0 / 3.0;
  for (std::size_t i = 0; i < n; ++i)
    state.rho[i] = c13 * state.rho[i] + c23 * (s2.rho[i] + dt * k3.d_rho[i]);
  for (int a = 0; a < dim; ++a)
    for (std::size_t i = 0; i < n; ++i)
      state.momentum[a][i] =
          c13 * state.momentum[a][i] + c23 * (s2.momentum[a][i] + dt * k3.d_momentum[a][i]);
  const std::array<double, 6> rc = pack(r3);
  std::array<double, 6> a3;
  for (int j = 0; j < 6; ++j) a3[j] = c13 * a0[j] + c23 * (a2[j] + dt * rc[j]);
  accum = unpack(a3);
  state.time = t0 + dt;

  double clipped = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (state.rho[i] < rho_floor) {
      clipped += rho_floor - state.rho[i];
      state.rho[i] = rho_floor;
    }
  }
  return {dt, clipped * g.cell_volume()};
}

RunResult run(const FluidState& initial, const ModelSpec& model, const IntegratorConfig& cfg,
              std::span<RunObserver* const> observers) {
  if (!(cfg.cfl > 0.0 && cfg.cfl < 1.0)) throw ConfigError("cfl must lie in (0, 1)");
  if (!(cfg.dt_max > 0.0)) throw ConfigError("dt_max must be positive");
  if (cfg.samples < 1) throw ConfigError("samples must be at least 1");
  if (!(cfg.rho_floor_rel >= 0.0)) throw ConfigError("rho_floor_rel must be nonnegative");
  if (!(cfg.t_end > initial.time)) throw ConfigError("t_end must exceed the initial time");

  const TorusGrid& g = initial.rho.grid;
  RunResult res{initial};
  res.state.rho = dealias(res.state.rho);
  res.state.momentum = dealias(res.state.momentum);

  const double mass0 = integrate(res.state.rho);
  const double floor_abs = cfg.rho_floor_rel * (mass0 / g.domain_volume());
  const RhsAssembler rhs(model, g, floor_abs);

  auto emit = [&] {
    for (RunObserver* o : observers) o->on_sample(res.state, res.accum);
  };
  auto finish = [&] {
    for (RunObserver* o : observers) o->on_finish();
  };

  emit();
  const double t0 = res.state.time;
  try {
    for (int k = 1; k <= cfg.samples; ++k) {
      const double target = t0 + (cfg.t_end - t0) * (double(k) / cfg.samples);
      while (target - res.state.time > 1e-14 * std::max(1.0, std::abs(target))) {
        const StepInfo info = step(res.state, res.accum, rhs, cfg, target - res.state.time, floor_abs);
        res.clipped_mass += info.clipped_mass;
        ++res.steps;
      }
      res.state.time = target;
      emit();
    }
  } catch (...) {
    finish();
    throw;
  }
  if (mass0 > 0.0 && res.clipped_mass > 1e-10 * mass0) res.valid = false;
  finish();
  return res;
}

}  // namespace fhd
