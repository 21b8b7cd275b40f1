#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fhd/dynamics.hpp"
#include "fhd/fields.hpp"
#include "fhd/model.hpp"

namespace fhd {

// A closed-form reference flow (r, U) together with the machinery that turns
// it into an exact solution of the inviscid system: the residual left by
// substituting (r, U) is computed once per evaluation time and injected as a
// source pair (f_rho, f_m). The same sources go unchanged into every viscous
// run, so the viscous solutions are compared against a genuine strong solution
// of the inviscid system rather than one with epsilon-dependent forcing.
class ManufacturedSolution {
 public:
  static ManufacturedSolution preset(const std::string& name);
  static const std::vector<std::string>& preset_names();

  const std::string& name() const { return name_; }
  // Closed-form infimum of r over all times and positions; must be positive.
  double density_floor() const { return r_min_; }

  ScalarField density(double t, const TorusGrid& g) const;
  VectorField velocity(double t, const TorusGrid& g) const;
  ScalarField density_rate(double t, const TorusGrid& g) const;
  VectorField velocity_rate(double t, const TorusGrid& g) const;
  FluidState state(double t, const TorusGrid& g) const;  // (r, r U) at time t

  // Builds the source pair for the given closures; independent of epsilon and
  // density_reg by construction. Throws ConfigError if the preset density is
  // not bounded away from zero.
  std::shared_ptr<const Forcing> sources(const ModelSpec& model, const TorusGrid& grid) const;

  // Max-norm discrepancy between the assembled inviscid tendency (with the
  // sources injected) and the analytic time derivative of (r, rU) at time t.
  // This pits the independent source construction against the solver's own
  // assembly, so it validates both.
  double residual(const ModelSpec& model, const TorusGrid& grid, double t) const;

 private:
  ManufacturedSolution() = default;

  std::string name_;
  double r_min_ = 0.0;
  // pointwise closures: (t, x, y, z) -> value
  using Field3 = std::function<double(double, double, double, double)>;
  Field3 r_, dtr_;
  std::array<Field3, 3> u_, dtu_;

  friend class ManufacturedForcing;
};

}  // namespace fhd
