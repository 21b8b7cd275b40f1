#pragma once

#include <memory>
#include <span>

#include "fhd/fields.hpp"
#include "fhd/model.hpp"
#include "fhd/nonlocal.hpp"

namespace fhd {

struct FluidState {
  double time = 0.0;
  ScalarField rho;
  VectorField momentum;

  explicit FluidState(const TorusGrid& g) : rho(g), momentum(g) {}
};

struct Tendency {
  ScalarField d_rho;
  VectorField d_momentum;

  explicit Tendency(const TorusGrid& g) : d_rho(g), d_momentum(g) {}
};

// Instantaneous rates entering the energy balance, evaluated on a state.
struct BudgetRates {
  double viscous = 0.0;        // epsilon * int |grad u|^2
  double density_reg = 0.0;    // nu * int P''(rho) |grad rho|^2
  double friction = 0.0;       // int (1 - H(|u|^2)) rho |u|^2
  double alignment = 0.0;      // pairwise alignment dissipation
  double reg_crossterm = 0.0;  // nu * int rho (lap K * rho)
  double forcing_power = 0.0;  // int u.f_m + (P'(rho) + K*rho - |u|^2/2) f_rho
};

// Cumulative time integrals of BudgetRates. They are advanced inside the
// SSP-RK3 combination itself, so the accumulated integrals carry the scheme's
// own order of accuracy instead of a separate quadrature error.
struct BudgetAccum {
  double viscous = 0.0, density_reg = 0.0, friction = 0.0, alignment = 0.0,
         reg_crossterm = 0.0, forcing_power = 0.0;
};

enum class Scheme { ssp_rk3 };

struct IntegratorConfig {
  Scheme scheme = Scheme::ssp_rk3;
  double cfl = 0.4;             // advective Courant number, in (0,1)
  double dt_max = 0.05;
  double t_end = 1.0;
  double rho_floor_rel = 1e-8;  // absolute floor = rho_floor_rel * mean initial density
  int samples = 50;             // observer samples over (0, t_end]
};

struct StepInfo {
  double dt = 0.0;
  double clipped_mass = 0.0;
};

// Owns the convolution engines and evaluates the semi-discrete right-hand side
//   d rho = -div(m) + nu*lap(rho) + f_rho
//   d m_k = -sum_l d_l(m_k u_l) - d_k p(rho) + eps*lap(u_k) [+ (1-H(|u|^2)) m_k]
//           - rho (grad K * rho)_k + rho (psi * m)_k - m_k (psi * rho)
//           [+ nu * div(u_k grad rho)] + f_m,k
// with u = m / max(rho, rho_guard), every nonlinear product dealiased, and the
// bracketed terms active only when friction / density regularization are on.
// The div(u grad rho) counterterm is the momentum companion of the density
// diffusion; it cancels the |u|^2/2-weighted diffusion flux in the kinetic
// energy balance so the budget closes with the documented rate list.
class RhsAssembler {
public:
  RhsAssembler(const ModelSpec& model, const TorusGrid& grid, double rho_guard = 0.0);

  const ModelSpec& model() const { return model_; }
  const TorusGrid& grid() const { return grid_; }
  const ConvolutionEngine& attraction_engine() const { return attraction_; }
  const ConvolutionEngine& alignment_engine() const { return alignment_; }
  double rho_guard() const { return rho_guard_; }

  VectorField velocity(const FluidState& s) const;
  // Assembles the tendency; when rates is non-null also evaluates the energy
  // rates on the same state, sharing the convolution work.
  Tendency assemble(const FluidState& s, BudgetRates* rates = nullptr) const;

private:
  ModelSpec model_;
  TorusGrid grid_;
  double rho_guard_;
  ConvolutionEngine attraction_;
  ConvolutionEngine alignment_;
};

// One-shot convenience wrapper around RhsAssembler.
Tendency assemble_rhs(const FluidState& state, const ModelSpec& model, double rho_guard = 0.0);

// Largest stable step at this state: min(dt_max, cfl*dx/max(|u|+c), diffusive
// limit dx^2/(pi^2*dim*max(eps,nu))). Throws StiffnessError below 1e-12.
double stable_dt(const FluidState& state, const RhsAssembler& rhs, const IntegratorConfig& cfg);

// One SSP-RK3 step of at most max_dt; advances accum alongside the state and
// clips rho at rho_floor (clipped mass is reported, not silently dropped).
StepInfo step(FluidState& state, BudgetAccum& accum, const RhsAssembler& rhs,
              const IntegratorConfig& cfg, double max_dt, double rho_floor);

class RunObserver {
public:
  virtual ~RunObserver() = default;
  virtual void on_sample(const FluidState& state, const BudgetAccum& accum) = 0;
  virtual void on_finish() {}
};

struct RunResult {
  FluidState state;
  BudgetAccum accum;
  double clipped_mass = 0.0;
  bool valid = true;  // false if clipped mass exceeded 1e-10 of initial mass
  long steps = 0;
};

// Integrates to t_end, invoking every observer at cfg.samples equally spaced
// times (plus t = 0). Initial data is projected onto the dealiased space.
// On blow-up or stiffness errors observers are finished (partial output is
// flushed) before the error propagates.
RunResult run(const FluidState& initial, const ModelSpec& model, const IntegratorConfig& cfg,
              std::span<RunObserver* const> observers = {});

}  // namespace fhd
