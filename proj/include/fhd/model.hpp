#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "fhd/fields.hpp"

namespace fhd {

// gamma-law pressure p(rho) = kappa * rho^gamma together with the internal
// energy density P it induces: P(rho) = kappa*(rho^gamma - rho)/(gamma - 1),
// the unique solution of rho*P'(rho) - P(rho) = p(rho) with P(1) = 0.
class PressureLaw {
public:
  PressureLaw(double kappa, double gamma);

  double kappa() const { return kappa_; }
  double gamma() const { return gamma_; }

  double pressure(double rho) const;
  double pressure_prime(double rho) const;
  double potential(double rho) const;
  double potential_prime(double rho) const;
  // P''(rho) = p'(rho)/rho, the relative-entropy weight.
  double potential_second(double rho) const;
  // P(s) - P'(r)(s - r) - P(r); nonnegative for convex P, zero iff s == r.
  double bregman(double s, double r) const;

private:
  double kappa_;
  double gamma_;
};

// Velocity-modulus friction factor (1 - H(|u|^2)). The built-in saturating
// law H(z) = h_inf * z / (1 + z) is smooth, nondecreasing, and bounded by h_inf.
class FrictionLaw {
public:
  enum class Kind { off, saturating };

  static FrictionLaw off() { return FrictionLaw(Kind::off, 0.0); }
  static FrictionLaw saturating(double h_inf) { return FrictionLaw(Kind::saturating, h_inf); }

  Kind kind() const { return kind_; }
  bool enabled() const { return kind_ != Kind::off; }
  double h_inf() const { return h_inf_; }
  double h(double z) const;
  double h_prime(double z) const;
  // 1 - H(z); only meaningful when enabled().
  double factor(double z) const { return 1.0 - h(z); }

private:
  FrictionLaw(Kind k, double h_inf) : kind_(k), h_inf_(h_inf) {}
  Kind kind_;
  double h_inf_;
};

// One cosine term coeff * cos(pi * k . x). Modes are kept canonical: the first
// nonzero component is positive, so each {k, -k} pair has one representative.
struct KernelMode {
  std::array<int, 3> k{0, 0, 0};
  double coeff = 0.0;
};

// Even, smooth interaction kernel given as a finite cosine series. Evenness
// and C^2 regularity are structural: every basis function cos(pi*k.x) is even
// and entire, so no sampled check can fail for a constructible spec.
class KernelSpec {
public:
  enum class Kind { zero, cosine, fourier_table };

  static KernelSpec zero();
  // amplitude * prod_a (1 + cos(pi x_a)) / 2: nonnegative bump, max at x = 0.
  static KernelSpec cosine(double amplitude);
  static KernelSpec fourier_table(std::vector<KernelMode> modes, double amplitude = 1.0);

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  bool is_zero() const;

  // Canonical expanded cosine series for the given dimension.
  std::vector<KernelMode> modes(int dim) const;
  // Largest |k_a| in the expanded series.
  int max_mode(int dim) const;
  double value_at(std::span<const double> x, int dim) const;

private:
  KernelSpec(Kind k, double a, std::vector<KernelMode> m)
      : kind_(k), amplitude_(a), table_(std::move(m)) {}
  Kind kind_;
  double amplitude_;
  std::vector<KernelMode> table_;  // fourier_table entries, canonical
};

// Samples the kernel at grid coordinates. Requires m >= 2*max_mode + 2 so the
// series is resolved without aliasing.
ScalarField sample_kernel(const KernelSpec& spec, const TorusGrid& grid);

// Time-dependent source terms injected into both the continuity and momentum
// equations (e.g. manufactured-solution forcing).
class Forcing {
public:
  virtual ~Forcing() = default;
  virtual void eval(double t, const TorusGrid& g, ScalarField& f_rho, VectorField& f_m) const = 0;
};

struct ModelSpec {
  PressureLaw pressure{1.0, 2.0};
  FrictionLaw friction = FrictionLaw::off();
  KernelSpec attraction = KernelSpec::zero();  // gradient-coupled kernel K
  KernelSpec alignment = KernelSpec::zero();   // nonnegative velocity-averaging kernel psi
  double epsilon = 0.0;                        // velocity viscosity
  double density_reg = 0.0;                    // density diffusion strength
  std::shared_ptr<const Forcing> forcing;      // null = unforced
};

struct ValidationCheck {
  std::string hypothesis;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const;
  std::string summary() const;
};

// Checks every structural hypothesis the analysis relies on: pressure-law
// positivity/monotonicity/convexity and the P/p growth ratio, friction bounds
// and monotonicity, kernel evenness on the grid, pointwise nonnegativity of
// the alignment kernel, sign of the diffusion strengths, and that the grid
// resolves both kernel tables.
ValidationReport validate_model(const ModelSpec& model, const TorusGrid& grid);

}  // namespace fhd
