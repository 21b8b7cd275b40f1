#pragma once

#include <span>
#include <string>
#include <vector>

#include "fhd/dynamics.hpp"
#include "fhd/model.hpp"
#include "fhd/nonlocal.hpp"

namespace fhd {

struct EnergySnapshot {
  double time = 0.0;
  double kinetic = 0.0;      // int 1/2 |m|^2 / rho
  double internal = 0.0;     // int P(rho)
  double interaction = 0.0;  // 1/2 int rho (K * rho)
  double total = 0.0;
};

EnergySnapshot energy_snapshot(const FluidState& state, const ModelSpec& model,
                               const ConvolutionEngine& attraction, double rho_guard = 0.0);
EnergySnapshot energy_snapshot(const FluidState& state, const ModelSpec& model);

// Recomputes the instantaneous energy rates from a bare state. This is a
// second, independent implementation of the integrands accumulated in-step by
// the integrator; the offline audit leans on it so the two routes cross-check
// each other.
BudgetRates instantaneous_rates(const FluidState& state, const ModelSpec& model,
                                const ConvolutionEngine& attraction,
                                const ConvolutionEngine& alignment, double rho_guard = 0.0);

struct SamplePoint {
  EnergySnapshot energy;
  BudgetAccum accum;
};

// Balance over the cumulative window [t0, t1]: production enters with +,
// dissipation with -; defect > 0 means energy went missing (the dissipation
// defect direction), defect < 0 means the scheme created energy.
struct EnergyBudget {
  double t0 = 0.0, t1 = 0.0;
  EnergySnapshot start, finish;
  double viscous = 0.0, density_reg = 0.0, friction = 0.0, alignment = 0.0;
  double reg_crossterm = 0.0, forcing_power = 0.0;
  double defect = 0.0;  // (start.total + friction + reg_crossterm + forcing_power)
                        //   - (finish.total + viscous + density_reg + alignment)
};

struct BudgetReport {
  std::vector<EnergyBudget> windows;  // one per sample k >= 1, window [t0, t_k]
  std::vector<double> defect_series;  // max(0, signed defect), one per sample
  double tol_rate = 0.0;              // allowed negative defect per unit time
  bool pass = false;                  // every signed defect >= -tol_rate*(t_k - t0)
};

// Online route: samples carry the integrator's in-step accumulators.
BudgetReport audit_energy(std::span<const SamplePoint> samples, double tol_rate);

// Offline route: rates are recomputed from stored states and integrated by the
// trapezoid rule. Throws AuditError when the cadence-halving estimate puts the
// time-quadrature error above half the budget tolerance (inconclusive), or
// when fewer than two samples are given.
BudgetReport audit_energy(std::span<const FluidState> states, const ModelSpec& model,
                          double tol_rate, double rho_guard = 0.0);

struct IdentityEntry {
  std::string test;      // test function label
  std::string equation;  // "continuity" or "momentum[k]"
  double residual = 0.0;
  double scale = 0.0;  // largest contribution magnitude, for relative reading
};

struct IdentityReport {
  std::vector<IdentityEntry> entries;
};

// Residuals of the weak continuity and momentum identities over the sampled
// trajectory, against a fixed set of space-time trigonometric test functions.
// Spatial pairings are spectrally exact for the band-limited tests; the
// residual is dominated by the trapezoid time quadrature, so it must shrink
// at second order under cadence refinement.
IdentityReport audit_weak_identities(std::span<const FluidState> states, const ModelSpec& model,
                                     double rho_guard = 0.0);

}  // namespace fhd
