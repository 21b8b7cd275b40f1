#include "fhd/youngmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fhd {

void validate_atoms(std::span<const Atom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("measure has no atoms");
  double wsum = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.weight > 0.0)) throw std::invalid_argument("atom weight must be positive");
    if (!(a.s >= 0.0)) throw std::invalid_argument("atom density coordinate must be nonnegative");
    wsum += a.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("atom weights must sum to 1 (got " + std::to_string(wsum) + ")");
}

AtomicYoungMeasure AtomicYoungMeasure::lift(const FluidState& state, double rho_guard) {
  AtomicYoungMeasure nu(state.rho.grid);
  const int dim = nu.grid_.dim();
  for (std::size_t i = 0; i < state.rho.size(); ++i) {
    Atom a;
    a.weight = 1.0;
    a.s = state.rho[i];
    for (int k = 0; k < dim; ++k) a.v[k] = state.momentum[k][i] / std::max(state.rho[i], rho_guard);
    nu.atoms_[i].push_back(a);
  }
  nu.validate();
  return nu;
}

void AtomicYoungMeasure::validate() const {
  for (const auto& list : atoms_) validate_atoms(list);
}

Observable Observable::density() { return Observable(Kind::density); }

Observable Observable::momentum(int axis) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("momentum observable axis out of range");
  Observable o(Kind::momentum);
  o.axis_ = axis;
  return o;
}

Observable Observable::kinetic_energy() { return Observable(Kind::kinetic); }

Observable Observable::pressure(const PressureLaw& law) {
  Observable o(Kind::pressure);
  o.law_ = law;
  return o;
}

Observable Observable::potential(const PressureLaw& law) {
  Observable o(Kind::potential);
  o.law_ = law;
  return o;
}

Observable Observable::kinetic_mismatch(const VectorField& U) {
  Observable o(Kind::mismatch);
  o.u_ = &U;
  return o;
}

Observable Observable::bregman_divergence(const PressureLaw& law, const ScalarField& r) {
  Observable o(Kind::bregman);
  o.law_ = law;
  o.r_ = &r;
  return o;
}

Observable Observable::density_gap(const ScalarField& r) {
  Observable o(Kind::gap);
  o.r_ = &r;
  return o;
}

double Observable::eval(std::size_t point, const Atom& a) const {
  switch (kind_) {
    case Kind::density:
      return a.s;
    case Kind::momentum:
      return a.s * a.v[axis_];
    case Kind::kinetic:
      return a.s * (a.v[0] * a.v[0] + a.v[1] * a.v[1] + a.v[2] * a.v[2]);
    case Kind::pressure:
      return law_.pressure(a.s);
    case Kind::potential:
      return law_.potential(a.s);
    case Kind::mismatch: {
      double acc = 0.0;
      const VectorField& U = *u_;
      const int dim = U.grid.dim();
      for (int k = 0; k < 3; ++k) {
        const double d = a.v[k] - (k < dim ? U[k][point] : 0.0);
        acc += d * d;
      }
      return a.s * acc;
    }
    case Kind::bregman:
      return law_.bregman(a.s, (*r_)[point]);
    case Kind::gap:
      return std::abs(a.s - (*r_)[point]);
  }
  throw std::invalid_argument("unknown observable");
}

ScalarField moment(const AtomicYoungMeasure& nu, const Observable& f) {
  nu.validate();
  ScalarField out(nu.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (const Atom& a : nu.atoms(i)) acc += a.weight * f.eval(i, a);
    out[i] = acc;
  }
  return out;
}

double relative_entropy(const AtomicYoungMeasure& nu, const ScalarField& r, const VectorField& U,
                        const PressureLaw& law) {
  if (!(nu.grid() == r.grid) || !(nu.grid() == U.grid))
    throw std::invalid_argument("measure and reference fields live on different grids");
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!(r[i] > 0.0)) throw std::domain_error("reference density must be positive everywhere");
  nu.validate();

  const int dim = nu.grid().dim();
  ScalarField integrand(nu.grid());
  for (std::size_t i = 0; i < integrand.size(); ++i) {
    double acc = 0.0;
    for (const Atom& a : nu.atoms(i)) {
      double v2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double d = a.v[k] - (k < dim ? U[k][i] : 0.0);
        v2 += d * d;
      }
      acc += a.weight * (0.5 * a.s * v2 + law.bregman(a.s, r[i]));
    }
    integrand[i] = acc;
  }
  return integrate(integrand);
}

PairIdentity pairwise_alignment_identity(std::span<const Atom> nu_x, std::span<const Atom> nu_y,
                                         double psi_val) {
  validate_atoms(nu_x);
  validate_atoms(nu_y);
  if (!(psi_val >= 0.0)) throw std::invalid_argument("kernel value must be nonnegative");

  auto moments = [](std::span<const Atom> atoms) {
    double m0 = 0.0, m2 = 0.0;
    std::array<double, 3> m1{0.0, 0.0, 0.0};
    for (const Atom& a : atoms) {
      const double ws = a.weight * a.s;
      m0 += ws;
      double v2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        m1[k] += ws * a.v[k];
        v2 += a.v[k] * a.v[k];
      }
      m2 += ws * v2;
    }
    return std::array<double, 5>{m0, m1[0], m1[1], m1[2], m2};
  };

  const auto mx = moments(nu_x);
  const auto my = moments(nu_y);
  PairIdentity out;
  out.lhs = psi_val * (0.5 * mx[4] * my[0] - (mx[1] * my[1] + mx[2] * my[2] + mx[3] * my[3]) +
                       0.5 * mx[0] * my[4]);

  double rhs = 0.0;
  for (const Atom& a : nu_x) {
    for (const Atom& b : nu_y) {
      double d2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double d = a.v[k] - b.v[k];
        d2 += d * d;
      }
      rhs += a.weight * b.weight * a.s * b.s * d2;
    }
  }
  out.rhs = psi_val * 0.5 * rhs;
  return out;
}

DensityGap l1_density_gap(const AtomicYoungMeasure& nu, const ScalarField& r,
                          const PressureLaw& law) {
  if (!(nu.grid() == r.grid))
    throw std::invalid_argument("measure and reference field live on different grids");
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!(r[i] > 0.0) || !std::isfinite(r[i]))
      throw std::domain_error("reference density must be positive and bounded");
  nu.validate();

  DensityGap out;
  out.gap = integrate(moment(nu, Observable::density_gap(r)));
  const double breg = integrate(moment(nu, Observable::bregman_divergence(law, r)));
  ScalarField one_plus_s = moment(nu, Observable::density());
  for (std::size_t i = 0; i < one_plus_s.size(); ++i) one_plus_s[i] += 1.0;
  out.entropy_bound = std::sqrt(std::max(breg, 0.0)) * std::sqrt(std::max(integrate(one_plus_s), 0.0));
  return out;
}

}  // namespace fhd
