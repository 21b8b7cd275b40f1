#include "fhd/energetics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

#include "fhd/errors.hpp"
#include "fhd/spectral.hpp"

namespace fhd {

namespace {

std::array<double, 6> pack(const BudgetRates& r) {
  return {r.viscous, r.density_reg, r.friction, r.alignment, r.reg_crossterm, r.forcing_power};
}

std::array<double, 6> pack(const BudgetAccum& a) {
  return {a.viscous, a.density_reg, a.friction, a.alignment, a.reg_crossterm, a.forcing_power};
}

BudgetAccum unpack(const std::array<double, 6>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

VectorField dealiased_velocity(const FluidState& s, double rho_guard) {
  VectorField u(s.rho.grid);
  for (int a = 0; a < s.rho.grid.dim(); ++a)
    for (std::size_t i = 0; i < s.rho.size(); ++i)
      u[a][i] = s.momentum[a][i] / std::max(s.rho[i], rho_guard);
  return dealias(u);
}

}  // namespace

EnergySnapshot energy_snapshot(const FluidState& state, const ModelSpec& model,
                               const ConvolutionEngine& attraction, double rho_guard) {
  const TorusGrid& g = state.rho.grid;
  EnergySnapshot out;
  out.time = state.time;

  ScalarField kin(g);
  ScalarField pot(g);
  for (std::size_t i = 0; i < state.rho.size(); ++i) {
    double m2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) m2 += state.momentum[a][i] * state.momentum[a][i];
    kin[i] = 0.5 * m2 / std::max(state.rho[i], rho_guard);
    pot[i] = model.pressure.potential(std::max(state.rho[i], 0.0));
  }
  out.kinetic = integrate(kin);
  out.internal = integrate(pot);
  if (!attraction.kernel_is_zero())
    out.interaction = 0.5 * inner(state.rho, attraction.convolve(state.rho));
  out.total = out.kinetic + out.internal + out.interaction;
  return out;
}

EnergySnapshot energy_snapshot(const FluidState& state, const ModelSpec& model) {
  const ConvolutionEngine attraction(model.attraction, state.rho.grid, ConvolutionEngine::Backend::fft);
  return energy_snapshot(state, model, attraction);
}

BudgetRates instantaneous_rates(const FluidState& state, const ModelSpec& model,
                                const ConvolutionEngine& attraction,
                                const ConvolutionEngine& alignment, double rho_guard) {
  const TorusGrid& g = state.rho.grid;
  const int dim = g.dim();
  const std::size_t n = g.point_count();

  const VectorField u = dealiased_velocity(state, rho_guard);
  ScalarField speed2(g);
  for (std::size_t i = 0; i < n; ++i) {
    double s2 = 0.0;
    for (int a = 0; a < dim; ++a) s2 += u[a][i] * u[a][i];
    speed2[i] = s2;
  }

  BudgetRates r;
  if (model.epsilon > 0.0) {
    double acc = 0.0;
    for (int k = 0; k < dim; ++k) {
      const VectorField gu = gradient(u[k]);
      for (int l = 0; l < dim; ++l) acc += inner(gu[l], gu[l]);
    }
    r.viscous = model.epsilon * acc;
  }
  if (model.density_reg > 0.0) {
    const double guard = std::max(rho_guard, 1e-300);
    const VectorField grad_rho = gradient(state.rho);
    ScalarField w(g);
    for (std::size_t i = 0; i < n; ++i) {
      double g2 = 0.0;
      for (int l = 0; l < dim; ++l) g2 += grad_rho[l][i] * grad_rho[l][i];
      w[i] = model.pressure.potential_second(std::max(state.rho[i], guard)) * g2;
    }
    r.density_reg = model.density_reg * integrate(w);
    if (!attraction.kernel_is_zero())
      r.reg_crossterm = model.density_reg * inner(state.rho, attraction.laplacian_convolve(state.rho));
  }
  if (model.friction.enabled()) {
    ScalarField w(g);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = model.friction.factor(speed2[i]) * state.rho[i] * speed2[i];
    r.friction = integrate(w);
  }
  if (!alignment.kernel_is_zero()) r.alignment = alignment_dissipation(alignment, state.rho, u);
  if (model.forcing) {
    ScalarField f_rho(g);
    VectorField f_m(g);
    model.forcing->eval(state.time, g, f_rho, f_m);
    double power = 0.0;
    for (int k = 0; k < dim; ++k) power += inner(u[k], f_m[k]);
    std::optional<ScalarField> krho;
    if (!attraction.kernel_is_zero()) krho = attraction.convolve(state.rho);
    ScalarField chem(g);
    for (std::size_t i = 0; i < n; ++i)
      chem[i] = model.pressure.potential_prime(std::max(state.rho[i], 0.0)) +
                (krho ? (*krho)[i] : 0.0) - 0.5 * speed2[i];
    power += inner(chem, f_rho);
    r.forcing_power = power;
  }
  return r;
}

BudgetReport audit_energy(std::span<const SamplePoint> samples, double tol_rate) {
  if (samples.size() < 2) throw AuditError("energy audit needs at least two samples");
  BudgetReport rep;
  rep.tol_rate = tol_rate;
  rep.pass = true;
  const SamplePoint& s0 = samples[0];
  rep.defect_series.push_back(0.0);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    EnergyBudget w;
    w.t0 = s0.energy.time;
    w.t1 = samples[k].energy.time;
    w.start = s0.energy;
    w.finish = samples[k].energy;
    const std::array<double, 6> a = pack(samples[k].accum);
    const std::array<double, 6> b = pack(s0.accum);
    w.viscous = a[0] - b[0];
    w.density_reg = a[1] - b[1];
    w.friction = a[2] - b[2];
    w.alignment = a[3] - b[3];
    w.reg_crossterm = a[4] - b[4];
    w.forcing_power = a[5] - b[5];
    w.defect = (w.start.total + w.friction + w.reg_crossterm + w.forcing_power) -
               (w.finish.total + w.viscous + w.density_reg + w.alignment);
    const double tol_abs =
        tol_rate * (w.t1 - w.t0) + 1e-15 * std::max(1.0, std::abs(w.start.total));
    if (!(w.defect >= -tol_abs)) rep.pass = false;
    rep.defect_series.push_back(std::max(0.0, w.defect));
    rep.windows.push_back(w);
  }
  return rep;
}

BudgetReport audit_energy(std::span<const FluidState> states, const ModelSpec& model,
                          double tol_rate, double rho_guard) {
  const std::size_t n = states.size();
  if (n < 3) throw AuditError("offline energy audit needs at least three samples to bound its quadrature error");
  const TorusGrid& g = states[0].rho.grid;
  const ConvolutionEngine attraction(model.attraction, g, ConvolutionEngine::Backend::fft);
  const ConvolutionEngine alignment(model.alignment, g, ConvolutionEngine::Backend::fft);

  std::vector<SamplePoint> pts(n);
  std::vector<std::array<double, 6>> rates(n);
  double escale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    pts[k].energy = energy_snapshot(states[k], model, attraction, rho_guard);
    rates[k] = pack(instantaneous_rates(states[k], model, attraction, alignment, rho_guard));
    escale = std::max(escale, std::abs(pts[k].energy.total));
  }

  std::array<double, 6> acc{};
  pts[0].accum = unpack(acc);
  for (std::size_t k = 1; k < n; ++k) {
    const double dt = states[k].time - states[k - 1].time;
    for (int j = 0; j < 6; ++j) acc[j] += 0.5 * (rates[k - 1][j] + rates[k][j]) * dt;
    pts[k].accum = unpack(acc);
  }

  // Richardson cadence check: re-integrate on every other sample; the halved
  // mesh overstates the trapezoid error by about 3x for smooth rates.
  std::vector<std::size_t> half;
  for (std::size_t k = 0; k < n; k += 2) half.push_back(k);
  if (half.back() != n - 1) half.push_back(n - 1);
  std::array<double, 6> acc_half{};
  for (std::size_t j = 1; j < half.size(); ++j) {
    const std::size_t k0 = half[j - 1], k1 = half[j];
    const double dt = states[k1].time - states[k0].time;
    for (int c = 0; c < 6; ++c) acc_half[c] += 0.5 * (rates[k0][c] + rates[k1][c]) * dt;
  }
  double err = 0.0;
  for (int c = 0; c < 6; ++c) err += std::abs(acc[c] - acc_half[c]) / 3.0;
  const double horizon = states.back().time - states.front().time;
  if (err > 0.5 * tol_rate * horizon + 1e-15 * std::max(1.0, escale)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "sampling cadence too coarse for a conclusive audit "
                  "(quadrature error estimate %.3e exceeds half the budget %.3e)",
                  err, tol_rate * horizon);
    throw AuditError(buf);
  }
  return audit_energy(pts, tol_rate);
}

namespace {

struct SpaceTimeTest {
  std::string name;
  std::function<double(double)> tval;
  std::function<double(double)> tdot;
  ScalarField x_field;
  VectorField x_grad;
  ScalarField x_lap;
};

}  // namespace

IdentityReport audit_weak_identities(std::span<const FluidState> states, const ModelSpec& model,
                                     double rho_guard) {
  const std::size_t n = states.size();
  if (n < 2) throw AuditError("identity audit needs at least two samples");
  const TorusGrid& g = states[0].rho.grid;
  const int dim = g.dim();
  const double t_end = states.back().time;
  constexpr double pi = 3.14159265358979323846;

  const ConvolutionEngine attraction(model.attraction, g, ConvolutionEngine::Backend::fft);
  const ConvolutionEngine alignment(model.alignment, g, ConvolutionEngine::Backend::fft);

  auto constant_one = [](double) { return 1.0; };
  auto zero = [](double) { return 0.0; };

  std::vector<SpaceTimeTest> tests;
  auto add_test = [&](const std::string& name, std::function<double(double)> tv,
                      std::function<double(double)> td, auto&& xv) {
    ScalarField x(g);
    spectral::for_each_point(g, [&](std::size_t i, int a, int b, int c) {
      x[i] = xv(g.coordinate(a), g.coordinate(b), g.coordinate(c));
    });
    tests.push_back({name, std::move(tv), std::move(td), x, gradient(x), laplacian(x)});
  };
  add_test("phi=1", constant_one, zero, [](double, double, double) { return 1.0; });
  add_test("phi=cos(pi x1)", constant_one, zero,
           [&](double x, double, double) { return std::cos(pi * x); });
  add_test("phi=cos(pi x1)cos(pi x2)", constant_one, zero,
           [&](double x, double y, double) { return std::cos(pi * x) * std::cos(pi * y); });
  if (t_end > states.front().time) {
    const double t0 = states.front().time;
    const double horizon = t_end - t0;
    add_test(
        "phi=cos(pi x1)cos(pi t/T)",
        [t0, horizon, pi](double t) { return std::cos(pi * (t - t0) / horizon); },
        [t0, horizon, pi](double t) { return -pi / horizon * std::sin(pi * (t - t0) / horizon); },
        [&](double x, double, double) { return std::cos(pi * x); });
  }

  const std::size_t nt = tests.size();
  // integrand time series per test: continuity, then one per momentum component
  std::vector<std::vector<std::vector<double>>> series(
      nt, std::vector<std::vector<double>>(1 + dim, std::vector<double>(n, 0.0)));
  std::vector<std::vector<double>> scales(nt, std::vector<double>(1 + dim, 0.0));

  for (std::size_t k = 0; k < n; ++k) {
    const FluidState& s = states[k];
    const double tau = s.time;
    const VectorField u = dealiased_velocity(s, rho_guard);

    ScalarField pfield(g);
    for (std::size_t i = 0; i < s.rho.size(); ++i)
      pfield[i] = model.pressure.pressure(std::max(s.rho[i], 0.0));

    std::optional<ScalarField> factor;
    if (model.friction.enabled()) {
      factor.emplace(g);
      for (std::size_t i = 0; i < s.rho.size(); ++i) {
        double s2 = 0.0;
        for (int a = 0; a < dim; ++a) s2 += u[a][i] * u[a][i];
        (*factor)[i] = model.friction.factor(s2);
      }
    }
    std::optional<VectorField> grad_rho;
    if (model.density_reg > 0.0) grad_rho = gradient(s.rho);
    std::optional<VectorField> gk;
    if (!attraction.kernel_is_zero()) gk = attraction.grad_convolve(s.rho);
    std::optional<ScalarField> crho;
    std::vector<ScalarField> cm;
    if (!alignment.kernel_is_zero()) {
      crho = alignment.convolve(s.rho);
      for (int a = 0; a < dim; ++a) cm.push_back(alignment.convolve(s.momentum[a]));
    }
    std::optional<ScalarField> f_rho;
    std::optional<VectorField> f_m;
    if (model.forcing) {
      f_rho.emplace(g);
      f_m.emplace(g);
      model.forcing->eval(tau, g, *f_rho, *f_m);
    }

    for (std::size_t t = 0; t < nt; ++t) {
      const SpaceTimeTest& tf = tests[t];
      const double tv = tf.tval(tau), td = tf.tdot(tau);
      auto note = [&](std::size_t eq, double contribution) {
        scales[t][eq] = std::max(scales[t][eq], std::abs(contribution));
        return contribution;
      };

      double cont = note(0, td * inner(s.rho, tf.x_field));
      double flux = 0.0;
      for (int l = 0; l < dim; ++l) flux += inner(s.momentum[l], tf.x_grad[l]);
      cont += note(0, tv * flux);
      if (model.density_reg > 0.0)
        cont += note(0, tv * model.density_reg * inner(s.rho, tf.x_lap));
      if (f_rho) cont += note(0, tv * inner(*f_rho, tf.x_field));
      series[t][0][k] = cont;

      for (int c = 0; c < dim; ++c) {
        const std::size_t eq = 1 + static_cast<std::size_t>(c);
        double mom = note(eq, td * inner(s.momentum[c], tf.x_field));
        double mflux = 0.0;
        for (int l = 0; l < dim; ++l) mflux += inner(multiply(s.momentum[c], u[l]), tf.x_grad[l]);
        mom += note(eq, tv * mflux);
        mom += note(eq, tv * inner(pfield, tf.x_grad[c]));
        if (model.epsilon > 0.0) mom += note(eq, tv * model.epsilon * inner(u[c], tf.x_lap));
        if (factor) mom += note(eq, tv * inner(multiply(*factor, s.momentum[c]), tf.x_field));
        if (gk) mom += note(eq, -tv * inner(multiply(s.rho, (*gk)[c]), tf.x_field));
        if (crho) {
          mom += note(eq, tv * (inner(multiply(s.rho, cm[c]), tf.x_field) -
                                inner(multiply(s.momentum[c], *crho), tf.x_field)));
        }
        if (grad_rho) {
          ScalarField w(g);
          for (std::size_t i = 0; i < w.size(); ++i) {
            double dot = 0.0;
            for (int l = 0; l < dim; ++l) dot += (*grad_rho)[l][i] * tf.x_grad[l][i];
            w[i] = u[c][i] * dot;
          }
          mom += note(eq, -tv * model.density_reg * integrate(w));
        }
        if (f_m) mom += note(eq, tv * inner((*f_m)[c], tf.x_field));
        series[t][eq][k] = mom;
      }
    }
  }

  IdentityReport rep;
  for (std::size_t t = 0; t < nt; ++t) {
    const SpaceTimeTest& tf = tests[t];
    const FluidState& first = states.front();
    const FluidState& last = states.back();
    for (std::size_t eq = 0; eq < 1 + static_cast<std::size_t>(dim); ++eq) {
      const ScalarField& field_first = eq == 0 ? first.rho : first.momentum[static_cast<int>(eq - 1)];
      const ScalarField& field_last = eq == 0 ? last.rho : last.momentum[static_cast<int>(eq - 1)];
      const double b0 = tf.tval(first.time) * inner(field_first, tf.x_field);
      const double b1 = tf.tval(last.time) * inner(field_last, tf.x_field);
      double integral = 0.0;
      for (std::size_t k = 1; k < n; ++k)
        integral +=
            0.5 * (series[t][eq][k - 1] + series[t][eq][k]) * (states[k].time - states[k - 1].time);
      IdentityEntry e;
      e.test = tf.name;
      e.equation = eq == 0 ? "continuity" : "momentum[" + std::to_string(eq - 1) + "]";
      e.residual = std::abs((b1 - b0) - integral);
      e.scale = std::max({scales[t][eq], std::abs(b0), std::abs(b1), 1e-30});
      rep.entries.push_back(e);
    }
  }
  return rep;
}

}  // namespace fhd
