#pragma once

#include <array>
#include <span>
#include <vector>

#include "fhd/dynamics.hpp"
#include "fhd/fields.hpp"
#include "fhd/model.hpp"

namespace fhd {

// One weighted Dirac atom at (s, v) in density-velocity state space. Only the
// first grid.dim() components of v are meaningful; the rest stay zero.
struct Atom {
  double weight = 0.0;
  double s = 0.0;
  std::array<double, 3> v{0.0, 0.0, 0.0};
};

void validate_atoms(std::span<const Atom> atoms);  // probability measure check

// A finitely supported probability measure over state space at every grid
// point. Solver states lift to the single-atom case; multi-atom measures are
// built directly by tests and the property battery.
class AtomicYoungMeasure {
 public:
  explicit AtomicYoungMeasure(const TorusGrid& g) : grid_(g), atoms_(g.point_count()) {}

  // delta_{(rho(x), u(x))} with u = m / max(rho, rho_guard)
  static AtomicYoungMeasure lift(const FluidState& state, double rho_guard = 0.0);

  const TorusGrid& grid() const { return grid_; }
  std::vector<Atom>& atoms(std::size_t i) { return atoms_[i]; }
  const std::vector<Atom>& atoms(std::size_t i) const { return atoms_[i]; }

  void validate() const;  // throws std::invalid_argument on violated invariants

 private:
  TorusGrid grid_;
  std::vector<std::vector<Atom>> atoms_;
};

// Fixed menu of integrands F(s, v) for moment(). Factories taking fields keep
// a pointer; the field must outlive the Observable.
class Observable {
 public:
  static Observable density();                                 // s
  static Observable momentum(int axis);                        // s v_a
  static Observable kinetic_energy();                          // s |v|^2
  static Observable pressure(const PressureLaw& law);          // p(s)
  static Observable potential(const PressureLaw& law);         // P(s)
  static Observable kinetic_mismatch(const VectorField& U);    // s |v - U(x)|^2
  static Observable bregman_divergence(const PressureLaw& law, const ScalarField& r);
  static Observable density_gap(const ScalarField& r);         // |s - r(x)|

  double eval(std::size_t point, const Atom& a) const;

 private:
  enum class Kind { density, momentum, kinetic, pressure, potential, mismatch, bregman, gap };
  Observable(Kind k) : kind_(k) {}
  Kind kind_;
  int axis_ = 0;
  PressureLaw law_{1.0, 2.0};
  const ScalarField* r_ = nullptr;
  const VectorField* u_ = nullptr;
};

// Pointwise <nu_x, F>.
ScalarField moment(const AtomicYoungMeasure& nu, const Observable& f);

// int_Omega <nu, 1/2 s|v-U|^2 + P(s) - P'(r)(s-r) - P(r)> dx. Requires r > 0
// everywhere (domain error otherwise); vanishes exactly when nu lifts (r, U).
double relative_entropy(const AtomicYoungMeasure& nu, const ScalarField& r, const VectorField& U,
                        const PressureLaw& law);

struct PairIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
};

// Both sides of the two-point alignment energy identity at kernel value psi:
//   lhs = psi [ 1/2 <nu_x, s|v|^2><nu_y, s> - <nu_x, s v>.<nu_y, s v>
//               + 1/2 <nu_x, s><nu_y, s|v|^2> ]
//   rhs = psi/2 sum_jk w_j w_k s_j s_k |v_j - v_k|^2
// They agree identically and are nonnegative; both are returned so callers can
// check the identity rather than trust it.
PairIdentity pairwise_alignment_identity(std::span<const Atom> nu_x, std::span<const Atom> nu_y,
                                         double psi_val);

struct DensityGap {
  double gap = 0.0;            // int <nu, |s - r|> dx
  double entropy_bound = 0.0;  // Hoelder majorant sqrt(int <nu,bregman>) * sqrt(int 1 + <nu,s>)
};

DensityGap l1_density_gap(const AtomicYoungMeasure& nu, const ScalarField& r,
                          const PressureLaw& law);

}  // namespace fhd
